#include "spforest/covariate_forest.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>

#include "spforest/parallel.hpp"
#include "spforest/spatial_forest.hpp"

namespace spforest {

Domain covariate_domain(const CovariateStack& stack, const Window* restrict_to) {
  const GridGeometry& g = stack.geometry();
  std::vector<std::uint8_t> interior(g.size(), 1);
  for (std::size_t k = 0; k < stack.size(); ++k) {
    const auto vals = stack.grid(k).values();
    for (std::size_t i = 0; i < g.size(); ++i)
      if (is_na(vals[i])) interior[i] = 0;
  }
  if (restrict_to) {
    for (std::size_t i = 0; i < g.size(); ++i) {
      const Point c = g.center(i);
      if (interior[i] && !restrict_to->contains(c)) interior[i] = 0;
    }
  }
  std::vector<double> mask(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) mask[i] = interior[i] ? 1.0 : 0.0;
  return Domain(Window::masked(RasterGrid(g, std::move(mask))), g, std::move(interior));
}

double cell_log_term(double n, double area) {
  if (!(n > 1.0)) return 0.0;
  return n * std::log((n - 1.0) / area);
}

double split_score(double n_minus, double area_minus, double n_plus, double area_plus) {
  constexpr double kIneligible = -std::numeric_limits<double>::infinity();
  if ((n_minus > 1.0 && !(area_minus > 0.0)) || (n_plus > 1.0 && !(area_plus > 0.0))) return kIneligible;
  return cell_log_term(n_minus, area_minus) + cell_log_term(n_plus, area_plus);
}

// ---------------------------------------------------------------------------

CovariateTree::CovariateTree(std::vector<CovariateNode> nodes, double a_n, std::vector<std::uint32_t> multiplicities)
    : nodes_(std::move(nodes)), a_n_(a_n), mult_(std::move(multiplicities)) {
  if (nodes_.empty()) throw std::invalid_argument("tree needs a root node");
  if (!(a_n_ > 0.0)) throw std::invalid_argument("a_n must be positive");
  const auto n = static_cast<std::int32_t>(nodes_.size());
  for (std::int32_t i = 0; i < n; ++i) {
    const auto& node = nodes_[static_cast<std::size_t>(i)];
    if (node.is_leaf()) continue;
    if (node.sub <= i || node.super <= i || node.sub >= n || node.super >= n)
      throw std::invalid_argument("malformed tree: child indices must point forward");
  }
}

std::size_t CovariateTree::leaf_for(std::span<const double> z) const {
  std::size_t i = 0;
  while (!nodes_[i].is_leaf()) {
    const auto& node = nodes_[i];
    i = static_cast<std::size_t>(z[static_cast<std::size_t>(node.covariate)] <= node.threshold ? node.sub : node.super);
  }
  return i;
}

std::size_t CovariateTree::leaf_for_pixel(const CovariateStack& stack, std::size_t pixel) const {
  std::size_t i = 0;
  while (!nodes_[i].is_leaf()) {
    const auto& node = nodes_[i];
    const double v = stack.grid(static_cast<std::size_t>(node.covariate))[pixel];
    i = static_cast<std::size_t>(v <= node.threshold ? node.sub : node.super);
  }
  return i;
}

double CovariateTree::leaf_estimate(std::size_t node) const {
  const auto& n = nodes_.at(node);
  if (!(n.area > 0.0)) return 0.0;
  return n.boot_count / (a_n_ * n.area);
}

double CovariateTree::predict(std::span<const double> z) const {
  for (double v : z)
    if (is_na(v)) throw std::invalid_argument("covariate value is NA");
  // Child indices only ever reference covariates the tree was grown with.
  for (const auto& n : nodes_)
    if (!n.is_leaf() && static_cast<std::size_t>(n.covariate) >= z.size())
      throw std::invalid_argument("covariate vector is too short");
  return leaf_estimate(leaf_for(z));
}

std::vector<std::size_t> CovariateTree::leaves() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].is_leaf()) out.push_back(i);
  return out;
}

Partition CovariateTree::leaf_partition(const CovariateStack& stack, const Domain& domain) const {
  if (!(stack.geometry() == domain.grid())) throw std::invalid_argument("domain is not on the covariate lattice");
  std::vector<std::int32_t> cell_of_node(nodes_.size(), -1);
  std::int32_t next = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].is_leaf()) cell_of_node[i] = next++;
  std::vector<std::int32_t> labels(domain.grid().size(), Partition::kOutside);
  for (std::size_t p : domain.interior_pixels()) labels[p] = cell_of_node[leaf_for_pixel(stack, p)];
  // Leaves that received no pixel (possible only for a foreign stack) would
  // break id contiguity; compact them away.
  std::vector<std::int32_t> remap(static_cast<std::size_t>(next), -1);
  std::int32_t used = 0;
  for (auto& l : labels) {
    if (l < 0) continue;
    auto& r = remap[static_cast<std::size_t>(l)];
    if (r < 0) r = used++;
  }
  bool identity = used == next;
  for (std::int32_t j = 0; identity && j < next; ++j) identity = remap[static_cast<std::size_t>(j)] == j;
  if (!identity) {
    // Keep leaf order: renumber by original id.
    std::vector<std::int32_t> order;
    for (std::int32_t j = 0; j < next; ++j)
      if (remap[static_cast<std::size_t>(j)] >= 0) order.push_back(j);
    std::vector<std::int32_t> to_new(static_cast<std::size_t>(next), -1);
    for (std::size_t k = 0; k < order.size(); ++k) to_new[static_cast<std::size_t>(order[k])] = static_cast<std::int32_t>(k);
    for (auto& l : labels)
      if (l >= 0) l = to_new[static_cast<std::size_t>(l)];
  }
  return Partition(domain.grid(), std::move(labels), PartitionOrigin{PartitionOrigin::Kind::tree});
}

std::vector<std::pair<std::size_t, double>> CovariateTree::split_gains() const {
  std::vector<std::pair<std::size_t, double>> out;
  for (const auto& n : nodes_)
    if (!n.is_leaf()) out.emplace_back(static_cast<std::size_t>(n.covariate), n.gain);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

struct PendingCell {
  std::size_t node;
  std::vector<std::uint32_t> pixels;
  std::vector<std::pair<std::uint32_t, double>> points;  // (pixel, bootstrap weight)
};

double lower_median(std::vector<double>& buf) {
  const auto mid = buf.begin() + static_cast<std::ptrdiff_t>((buf.size() - 1) / 2);
  std::nth_element(buf.begin(), mid, buf.end());
  return *mid;
}

double weighted_lower_median(std::vector<std::pair<double, double>>& vw) {
  std::sort(vw.begin(), vw.end());
  double total = 0.0;
  for (const auto& e : vw) total += e.second;
  // Position (total - 1) / 2 in the expanded multiset, 0-based.
  const double target = std::floor((total - 1.0) / 2.0);
  double seen = 0.0;
  for (const auto& e : vw) {
    seen += e.second;
    if (seen > target) return e.first;
  }
  return vw.back().first;
}

}  // namespace

CovariateTree fit_covariate_tree(const PointPattern& pattern, const CovariateStack& stack, const Domain& domain,
                                 std::size_t mtry, std::size_t n_min, double a_n, RngSeed rng, std::size_t max_depth,
                                 MedianRule median) {
  const std::size_t p = stack.size();
  if (mtry < 1 || mtry > p) throw std::invalid_argument("mtry must lie in [1, p]");
  if (n_min < 2) throw std::invalid_argument("n_min must be at least 2");
  if (!(a_n > 0.0)) throw std::invalid_argument("a_n must be positive");
  if (!(stack.geometry() == domain.grid())) throw std::invalid_argument("domain is not on the covariate lattice");
  if (pattern.total_count() == 0) throw std::invalid_argument("covariate tree needs a non-empty pattern");

  Engine boot_eng = rng.child(0).engine();
  Engine split_eng = rng.child(1).engine();
  std::vector<std::uint32_t> mult = bootstrap_multiplicities(pattern, boot_eng);
  const PixelCounts boot(domain, pattern, mult);

  std::vector<const double*> z(p);
  for (std::size_t k = 0; k < p; ++k) z[k] = stack.grid(k).values().data();
  const double pa = domain.pixel_area();

  std::vector<CovariateNode> nodes(1);
  PendingCell root{0, {}, {}};
  root.pixels.reserve(domain.interior_count());
  for (std::size_t px : domain.interior_pixels()) root.pixels.push_back(static_cast<std::uint32_t>(px));
  for (const auto& [px, w] : boot.occupied()) root.points.emplace_back(static_cast<std::uint32_t>(px), w);
  nodes[0].area = static_cast<double>(root.pixels.size()) * pa;
  nodes[0].boot_count = boot.total();

  std::vector<std::size_t> order(p);
  std::vector<double> buf;
  std::vector<std::pair<double, double>> wbuf;
  std::deque<PendingCell> queue;
  queue.push_back(std::move(root));

  while (!queue.empty()) {
    PendingCell cell = std::move(queue.front());
    queue.pop_front();
    CovariateNode& node = nodes[cell.node];
    if (!(node.boot_count > static_cast<double>(n_min))) continue;
    if (max_depth && node.depth >= max_depth) continue;

    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = 0; i < mtry; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, p - 1);
      std::swap(order[i], order[pick(split_eng)]);
    }
    std::vector<std::size_t> sampled(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(mtry));
    std::sort(sampled.begin(), sampled.end());

    double best_score = -std::numeric_limits<double>::infinity();
    std::optional<std::size_t> best_k;
    double best_threshold = 0.0;
    std::vector<std::int32_t> cand;
    std::vector<double> cand_scores;
    for (std::size_t k : sampled) {
      const double* zk = z[k];
      double threshold;
      if (median == MedianRule::pixel) {
        buf.resize(cell.pixels.size());
        for (std::size_t i = 0; i < cell.pixels.size(); ++i) buf[i] = zk[cell.pixels[i]];
        threshold = lower_median(buf);
      } else {
        wbuf.clear();
        for (const auto& [px, w] : cell.points) wbuf.emplace_back(zk[px], w);
        threshold = weighted_lower_median(wbuf);
      }
      std::size_t below = 0;
      for (std::uint32_t px : cell.pixels) below += zk[px] <= threshold;
      const std::size_t above = cell.pixels.size() - below;
      double n_minus = 0.0;
      for (const auto& [px, w] : cell.points)
        if (zk[px] <= threshold) n_minus += w;
      const double n_plus = node.boot_count - n_minus;
      double score = -std::numeric_limits<double>::infinity();
      if (below > 0 && above > 0)
        score = split_score(n_minus, static_cast<double>(below) * pa, n_plus, static_cast<double>(above) * pa);
      cand.push_back(static_cast<std::int32_t>(k));
      cand_scores.push_back(score);
      if (score > best_score) {
        best_score = score;
        best_k = k;
        best_threshold = threshold;
      }
    }
    node.candidates = std::move(cand);
    node.candidate_scores = std::move(cand_scores);
    if (!best_k) continue;

    const double* zk = z[*best_k];
    PendingCell lo{nodes.size(), {}, {}}, hi{nodes.size() + 1, {}, {}};
    for (std::uint32_t px : cell.pixels) (zk[px] <= best_threshold ? lo : hi).pixels.push_back(px);
    double n_lo = 0.0, n_hi = 0.0;
    for (const auto& e : cell.points) {
      if (zk[e.first] <= best_threshold) {
        lo.points.push_back(e);
        n_lo += e.second;
      } else {
        hi.points.push_back(e);
        n_hi += e.second;
      }
    }

    node.covariate = static_cast<std::int32_t>(*best_k);
    node.threshold = best_threshold;
    node.score = best_score;
    node.gain = best_score - cell_log_term(node.boot_count, node.area);
    node.sub = static_cast<std::int32_t>(lo.node);
    node.super = static_cast<std::int32_t>(hi.node);
    const std::uint32_t depth = node.depth + 1;

    CovariateNode child_lo, child_hi;  // `node` is invalidated by the push_backs below
    child_lo.area = static_cast<double>(lo.pixels.size()) * pa;
    child_lo.boot_count = n_lo;
    child_lo.depth = depth;
    child_hi.area = static_cast<double>(hi.pixels.size()) * pa;
    child_hi.boot_count = n_hi;
    child_hi.depth = depth;
    nodes.push_back(std::move(child_lo));
    nodes.push_back(std::move(child_hi));
    queue.push_back(std::move(lo));
    queue.push_back(std::move(hi));
  }

  // Raw (non-bootstrap) counts per leaf.
  const auto mult_raw = pattern.multiplicities();
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    const std::size_t px = boot.pixel_of(i);
    std::size_t n = 0;
    while (!nodes[n].is_leaf())
      n = static_cast<std::size_t>(z[static_cast<std::size_t>(nodes[n].covariate)][px] <= nodes[n].threshold
                                       ? nodes[n].sub
                                       : nodes[n].super);
    nodes[n].raw_count += mult_raw[i];
  }
  return CovariateTree(std::move(nodes), a_n, std::move(mult));
}

// ---------------------------------------------------------------------------

CovariateForest::CovariateForest(std::vector<std::string> names, CovariateForestOptions options,
                                 std::vector<CovariateTree> trees, RngSeed seed)
    : names_(std::move(names)), options_(options), trees_(std::move(trees)), seed_(seed) {
  if (trees_.empty()) throw std::invalid_argument("forest needs at least one tree");
  for (const auto& t : trees_)
    for (const auto& n : t.nodes())
      if (!n.is_leaf() && static_cast<std::size_t>(n.covariate) >= names_.size())
        throw std::invalid_argument("tree splits on an unknown covariate");
}

double CovariateForest::predict(std::span<const double> z) const {
  if (z.size() != names_.size()) throw std::invalid_argument("covariate vector has the wrong length");
  double sum = 0.0;
  for (const auto& t : trees_) sum += t.predict(z);
  return sum / static_cast<double>(trees_.size());
}

RasterGrid CovariateForest::predict_grid(const CovariateStack& stack, const Domain& domain) const {
  if (stack.size() != names_.size()) throw std::invalid_argument("stack does not match the forest covariates");
  if (!(stack.geometry() == domain.grid())) throw std::invalid_argument("domain is not on the covariate lattice");
  RasterGrid out(domain.grid(), kNA);
  for (std::size_t px : domain.interior_pixels()) out[px] = 0.0;
  for (const auto& t : trees_)
    for (std::size_t px : domain.interior_pixels()) out[px] += t.leaf_estimate(t.leaf_for_pixel(stack, px));
  const double m = static_cast<double>(trees_.size());
  for (std::size_t px : domain.interior_pixels()) out[px] /= m;
  return out;
}

CovariateForest fit_covariate_forest(const PointPattern& pattern, const CovariateStack& stack, const Domain& domain,
                                     const CovariateForestOptions& options, RngSeed rng) {
  if (options.trees < 1) throw std::invalid_argument("forest needs at least one tree");
  CovariateForestOptions opts = options;
  if (opts.mtry == 0) opts.mtry = stack.size();
  std::vector<std::optional<CovariateTree>> slots(opts.trees);
  parallel_for(
      opts.trees,
      [&](std::size_t i) {
        slots[i] = fit_covariate_tree(pattern, stack, domain, opts.mtry, opts.n_min, opts.a_n, rng.child(i),
                                      opts.max_depth, opts.median);
      },
      opts.threads);
  std::vector<CovariateTree> trees;
  trees.reserve(slots.size());
  for (auto& s : slots) trees.push_back(std::move(*s));
  return CovariateForest(stack.names(), opts, std::move(trees), rng);
}

double predict_covariate(const CovariateForest& forest, std::span<const double> z) { return forest.predict(z); }

double predict_covariate(const CovariateTree& tree, std::span<const double> z) { return tree.predict(z); }

std::vector<double> variable_importance(const CovariateForest& forest) {
  std::vector<double> vip(forest.names().size(), 0.0);
  for (const auto& t : forest.trees())
    for (const auto& [k, g] : t.split_gains()) vip[k] += g;
  for (double& v : vip) v /= static_cast<double>(forest.size());
  return vip;
}

}  // namespace spforest
