#include "spforest/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "spforest/parallel.hpp"

namespace spforest {

double lcv(std::span<const double> counts, std::span<const double> areas) {
  if (counts.size() != areas.size()) throw std::invalid_argument("lcv: counts and areas differ in length");
  double total = 0.0;
  for (std::size_t j = 0; j < counts.size(); ++j) {
    if (!(areas[j] > 0.0)) throw std::invalid_argument("lcv: cell areas must be positive");
    total += cell_log_term(counts[j], areas[j]) - counts[j];
  }
  return total;
}

double oob_floor(const PointPattern& pattern, double fraction) {
  return fraction * static_cast<double>(pattern.total_count()) / window_area(pattern.window());
}

namespace {

template <typename EstimateAt>
OobTreeScore oob_sum(std::span<const std::uint32_t> mult, std::size_t n, double floor, EstimateAt&& estimate_at) {
  if (mult.size() != n) throw std::invalid_argument("tree has no bootstrap record for this pattern");
  OobTreeScore s;
  for (std::size_t i = 0; i < n; ++i) {
    if (mult[i] != 0) continue;
    ++s.oob_points;
    s.score += std::log(std::max(estimate_at(i), floor));
  }
  s.empty = s.oob_points == 0;
  return s;
}

}  // namespace

OobTreeScore oob_score_tree(const SpatialTree& tree, const PointPattern& pattern, const Domain& domain, double floor) {
  const PixelCounts pc(domain, pattern);
  return oob_sum(tree.multiplicities, pattern.size(), floor,
                 [&](std::size_t i) { return tree.pixel_estimate(pc.pixel_of(i)); });
}

OobTreeScore oob_score_tree(const CovariateTree& tree, const PointPattern& pattern, const CovariateStack& stack,
                            const Domain& domain, double floor) {
  const PixelCounts pc(domain, pattern);
  return oob_sum(tree.multiplicities(), pattern.size(), floor,
                 [&](std::size_t i) { return tree.leaf_estimate(tree.leaf_for_pixel(stack, pc.pixel_of(i))); });
}

namespace {

ScoreReport summarize(std::vector<OobTreeScore> scores) {
  ScoreReport r;
  for (const auto& s : scores) {
    r.tree_scores.push_back(s.score);
    r.empty_trees += s.empty;
  }
  r.mean_oob = std::accumulate(r.tree_scores.begin(), r.tree_scores.end(), 0.0) /
               static_cast<double>(std::max<std::size_t>(1, r.tree_scores.size()));
  return r;
}

}  // namespace

ScoreReport oob_score_forest(const SpatialForest& forest, const PointPattern& pattern, double floor) {
  std::vector<OobTreeScore> scores;
  for (const auto& t : forest.trees()) scores.push_back(oob_score_tree(t, pattern, forest.domain(), floor));
  return summarize(std::move(scores));
}

ScoreReport oob_score_forest(const CovariateForest& forest, const PointPattern& pattern, const CovariateStack& stack,
                             const Domain& domain, double floor) {
  std::vector<OobTreeScore> scores;
  for (const auto& t : forest.trees()) scores.push_back(oob_score_tree(t, pattern, stack, domain, floor));
  return summarize(std::move(scores));
}

std::size_t argmax_first(std::span<const double> scores) {
  if (scores.empty()) throw std::invalid_argument("argmax of an empty list");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i)
    if (scores[i] > scores[best]) best = i;
  return best;
}

CovariateTuning tune_covariate(const PointPattern& pattern, const CovariateStack& stack, const Domain& domain,
                               const std::vector<CovariateTuple>& grid, RngSeed rng, double a_n, unsigned threads) {
  if (grid.empty()) throw std::invalid_argument("tuning grid is empty");
  const double floor = oob_floor(pattern);
  CovariateTuning out;
  out.grid = grid;
  out.reports.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CovariateForestOptions opts;
    opts.trees = grid[i].trees;
    opts.mtry = grid[i].mtry;
    opts.n_min = grid[i].n_min;
    opts.a_n = a_n;
    opts.threads = threads;
    const auto forest = fit_covariate_forest(pattern, stack, domain, opts, rng.child(i));
    out.reports[i] = oob_score_forest(forest, pattern, stack, domain, floor);
  }
  std::vector<double> means;
  for (const auto& r : out.reports) means.push_back(r.mean_oob);
  out.best = argmax_first(means);
  return out;
}

SpatialTuning tune_spatial(const PointPattern& pattern, std::shared_ptr<const Domain> domain,
                           const std::vector<double>& gammas, std::size_t trees, RngSeed rng, unsigned threads) {
  if (gammas.empty()) throw std::invalid_argument("tuning grid is empty");
  const double floor = oob_floor(pattern);
  SpatialTuning out;
  out.grid = gammas;
  out.reports.resize(gammas.size());
  for (std::size_t i = 0; i < gammas.size(); ++i) {
    SpatialForestOptions opts;
    opts.trees = trees;
    opts.gamma = gammas[i];
    opts.bootstrap = true;
    opts.threads = threads;
    const auto forest = fit_spatial_forest(pattern, domain, opts, rng.child(i));
    out.reports[i] = oob_score_forest(forest, pattern, floor);
  }
  std::vector<double> means;
  for (const auto& r : out.reports) means.push_back(r.mean_oob);
  out.best = argmax_first(means);
  return out;
}

namespace {

template <typename Loss>
double integrated_error(const RasterGrid& estimate, const RasterGrid& truth, Loss&& loss) {
  if (!(estimate.geometry() == truth.geometry())) throw DataError("estimate and truth grids differ in geometry");
  double sum = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (is_na(truth[i])) continue;
    if (is_na(estimate[i])) throw DataError("estimate is NA where the truth is defined");
    sum += loss(estimate[i] - truth[i]);
  }
  return sum * truth.pixel_area();
}

}  // namespace

double mise(const RasterGrid& estimate, const RasterGrid& truth) {
  return integrated_error(estimate, truth, [](double d) { return d * d; });
}

double miae(const RasterGrid& estimate, const RasterGrid& truth) {
  return integrated_error(estimate, truth, [](double d) { return std::abs(d); });
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) throw std::invalid_argument("spearman needs two equal-length samples");
  const auto ra = average_ranks(a), rb = average_ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

std::vector<InfillLevel> infill_study(const IntensityModel& model, const Domain& domain,
                                      const std::vector<double>& a_grid, const std::function<double(double)>& h_rule,
                                      Point x, const InfillOptions& options, RngSeed rng) {
  for (std::size_t i = 1; i < a_grid.size(); ++i)
    if (!(a_grid[i] > a_grid[i - 1])) throw std::invalid_argument("a_n grid must be increasing");
  if (options.reps < 2) throw std::invalid_argument("infill study needs at least two replications");
  const double truth = model(x.x, x.y);
  std::vector<InfillLevel> out;
  for (std::size_t l = 0; l < a_grid.size(); ++l) {
    const double a_n = a_grid[l];
    const double h = h_rule(a_n);
    if (!(h > 0.0)) throw std::invalid_argument("h rule must return a positive bandwidth");
    const double gamma = 1.0 / (h * h);
    const IntensityModel scaled = model.scaled(a_n);
    std::vector<double> sq(options.reps), est(options.reps);
    parallel_for(
        options.reps,
        [&](std::size_t r) {
          const RngSeed rep = rng.child(l).child(r);
          const PointPattern pattern = simulate_inhomogeneous_poisson(domain, scaled, rep.child(0));
          const PixelCounts counts(domain, pattern);
          est[r] = spatial_forest_estimate_at(counts, domain, gamma, a_n, options.trees, x, rep.child(1),
                                              options.voronoi);
          sq[r] = (est[r] - truth) * (est[r] - truth);
        },
        options.threads);
    InfillLevel lev;
    lev.a_n = a_n;
    lev.h = h;
    lev.gamma = gamma;
    lev.truth = truth;
    const double n = static_cast<double>(options.reps);
    lev.mse = std::accumulate(sq.begin(), sq.end(), 0.0) / n;
    lev.mean_estimate = std::accumulate(est.begin(), est.end(), 0.0) / n;
    double var = 0.0;
    for (double s : sq) var += (s - lev.mse) * (s - lev.mse);
    lev.mse_se = std::sqrt(var / (n - 1) / n);
    out.push_back(lev);
  }
  return out;
}

}  // namespace spforest
