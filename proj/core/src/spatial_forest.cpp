#include "spforest/spatial_forest.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "spforest/parallel.hpp"

namespace spforest {

PixelCounts::PixelCounts(const Domain& domain, const PointPattern& pattern) {
  point_pixel_.reserve(pattern.size());
  for (const auto& p : pattern.points()) {
    const auto px = domain.locate(p.x, p.y);
    if (!px) throw DataError("point lies outside the rasterized window");
    point_pixel_.push_back(*px);
  }
  accumulate(pattern.multiplicities());
}

PixelCounts::PixelCounts(const Domain& domain, const PointPattern& pattern, std::span<const std::uint32_t> weights)
    : PixelCounts(domain, pattern) {
  if (weights.size() != pattern.size()) throw std::invalid_argument("weights must match the pattern size");
  accumulate(weights);
}

void PixelCounts::accumulate(std::span<const std::uint32_t> weights) {
  std::vector<std::pair<std::size_t, double>> raw;
  raw.reserve(point_pixel_.size());
  for (std::size_t i = 0; i < point_pixel_.size(); ++i)
    if (weights[i]) raw.emplace_back(point_pixel_[i], static_cast<double>(weights[i]));
  std::sort(raw.begin(), raw.end());
  occupied_.clear();
  total_ = 0.0;
  for (const auto& [px, w] : raw) {
    if (!occupied_.empty() && occupied_.back().first == px)
      occupied_.back().second += w;
    else
      occupied_.emplace_back(px, w);
    total_ += w;
  }
}

// ---------------------------------------------------------------------------

double SpatialTree::cell_estimate(std::size_t cell) const {
  return counts[cell] / (a_n * partition.cell_areas()[cell]);
}

double SpatialTree::pixel_estimate(std::size_t pixel) const {
  const auto l = partition.label(pixel);
  if (l < 0) throw std::out_of_range("pixel outside W");
  return cell_estimate(static_cast<std::size_t>(l));
}

SpatialForest::SpatialForest(std::shared_ptr<const Domain> domain, std::vector<SpatialTree> trees, double gamma,
                             RngSeed seed)
    : domain_(std::move(domain)), trees_(std::move(trees)), gamma_(gamma), seed_(seed) {
  if (!domain_) throw std::invalid_argument("forest needs a domain");
  if (trees_.empty()) throw std::invalid_argument("forest needs at least one tree");
  for (const auto& t : trees_)
    if (!(t.partition.grid() == domain_->grid())) throw std::invalid_argument("tree lattice differs from the domain");
}

double SpatialForest::predict(double x, double y) const {
  const auto px = domain_->locate(x, y);
  if (!px) throw std::out_of_range("prediction location lies outside W");
  double sum = 0.0;
  for (const auto& t : trees_) sum += t.pixel_estimate(*px);
  return sum / static_cast<double>(trees_.size());
}

RasterGrid SpatialForest::predict_grid() const {
  RasterGrid out(domain_->grid(), kNA);
  for (std::size_t p : domain_->interior_pixels()) out[p] = 0.0;
  for (const auto& t : trees_) {
    std::vector<double> est(t.counts.size());
    for (std::size_t j = 0; j < est.size(); ++j) est[j] = t.cell_estimate(j);
    for (std::size_t p : domain_->interior_pixels()) out[p] += est[static_cast<std::size_t>(t.partition.label(p))];
  }
  const double m = static_cast<double>(trees_.size());
  for (std::size_t p : domain_->interior_pixels()) out[p] /= m;
  return out;
}

RasterGrid SpatialForest::predict_grid(const GridGeometry& geom) const {
  if (geom == domain_->grid()) return predict_grid();
  RasterGrid out(geom, kNA);
  for (std::size_t i = 0; i < geom.size(); ++i) {
    const Point c = geom.center(i);
    if (domain_->locate(c.x, c.y)) out[i] = predict(c.x, c.y);
  }
  return out;
}

// ---------------------------------------------------------------------------

double rule_of_thumb_gamma(const PointPattern& pattern, int d) {
  if (pattern.total_count() == 0) throw std::invalid_argument("rule of thumb needs a non-empty pattern");
  if (d < 1) throw std::invalid_argument("dimension must be positive");
  const double n = static_cast<double>(pattern.total_count());
  const double numerator = std::pow(n, static_cast<double>(d) / 3.0);
  const double iqr = pattern.total_count() >= 2 ? mean_iqr(pattern) : 0.0;
  if (!(iqr > 0.0)) return numerator / window_area(pattern.window());
  return numerator / (std::pow(2.0, d) * std::pow(iqr, d));
}

std::vector<std::uint32_t> bootstrap_multiplicities(const PointPattern& pattern, Engine& eng) {
  std::vector<std::uint32_t> draws(pattern.size(), 0);
  const auto total = pattern.total_count();
  if (total == 0) return draws;
  // Expanded index list so points with multiplicity m are m times as likely.
  std::vector<std::uint32_t> expanded;
  expanded.reserve(total);
  const auto mult = pattern.multiplicities();
  for (std::size_t i = 0; i < mult.size(); ++i) expanded.insert(expanded.end(), mult[i], static_cast<std::uint32_t>(i));
  std::uniform_int_distribution<std::size_t> pick(0, expanded.size() - 1);
  for (std::uint64_t k = 0; k < total; ++k) ++draws[expanded[pick(eng)]];
  return draws;
}

SpatialTree fit_spatial_tree(const PointPattern& pattern, const Domain& domain, double gamma, double a_n, RngSeed rng,
                             bool bootstrap, const VoronoiOptions& opts) {
  if (!(a_n > 0.0)) throw std::invalid_argument("a_n must be positive");
  SpatialTree tree{poisson_voronoi_partition(domain, gamma, rng, opts), {}, a_n, {}};
  tree.counts.assign(tree.partition.cell_count(), 0.0);
  if (bootstrap) {
    Engine eng = rng.child(0xb007).engine();
    tree.multiplicities = bootstrap_multiplicities(pattern, eng);
  }
  const PixelCounts pc = bootstrap ? PixelCounts(domain, pattern, tree.multiplicities) : PixelCounts(domain, pattern);
  for (const auto& [px, w] : pc.occupied()) tree.counts[static_cast<std::size_t>(tree.partition.label(px))] += w;
  return tree;
}

SpatialForest fit_spatial_forest(const PointPattern& pattern, std::shared_ptr<const Domain> domain,
                                 const SpatialForestOptions& options, RngSeed rng) {
  if (options.trees < 1) throw std::invalid_argument("forest needs at least one tree");
  const double gamma = options.gamma ? *options.gamma : rule_of_thumb_gamma(pattern);
  std::vector<std::optional<SpatialTree>> slots(options.trees);
  parallel_for(
      options.trees,
      [&](std::size_t i) {
        slots[i] = fit_spatial_tree(pattern, *domain, gamma, options.a_n, rng.child(i), options.bootstrap,
                                    options.voronoi);
      },
      options.threads);
  std::vector<SpatialTree> trees;
  trees.reserve(slots.size());
  for (auto& s : slots) trees.push_back(std::move(*s));
  return SpatialForest(std::move(domain), std::move(trees), gamma, rng);
}

double predict_spatial(const SpatialForest& forest, double x, double y) { return forest.predict(x, y); }

RasterGrid predict_spatial_grid(const SpatialForest& forest) { return forest.predict_grid(); }

double spatial_forest_estimate_at(const PixelCounts& counts, const Domain& domain, double gamma, double a_n,
                                  std::size_t trees, Point x, RngSeed rng, const VoronoiOptions& opts) {
  if (trees < 1) throw std::invalid_argument("forest needs at least one tree");
  const auto px = domain.locate(x.x, x.y);
  if (!px) throw std::out_of_range("prediction location lies outside W");
  const auto& occ = counts.occupied();
  double sum = 0.0;
  for (std::size_t i = 0; i < trees; ++i) {
    const NucleusIndex nuclei = draw_voronoi_nuclei(domain, gamma, rng.child(i), opts);
    const auto cell = zero_cell_pixels(domain, nuclei, *px);  // sorted
    double n = 0.0;
    // Both lists are sorted by pixel index.
    auto it = occ.begin();
    for (std::size_t p : cell) {
      it = std::lower_bound(it, occ.end(), p, [](const auto& e, std::size_t v) { return e.first < v; });
      if (it == occ.end()) break;
      if (it->first == p) n += it->second;
    }
    sum += n / (a_n * static_cast<double>(cell.size()) * domain.pixel_area());
  }
  return sum / static_cast<double>(trees);
}

}  // namespace spforest
