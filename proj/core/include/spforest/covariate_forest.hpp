#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "spforest/geometry.hpp"
#include "spforest/rng.hpp"
#include "spforest/tessellation.hpp"

namespace spforest {

/// Domain on the covariate lattice: interior where every covariate is non-NA
/// (and, if given, inside `restrict_to`).
Domain covariate_domain(const CovariateStack& stack, const Window* restrict_to = nullptr);

/// LCV contribution of splitting a cell into sub-level (minus) and
/// super-level (plus) sides. Counts are bootstrap-multiplicity weighted; a side
/// with count <= 1 contributes nothing. Returns -infinity when a side with
/// count > 1 has no area.
double split_score(double n_minus, double area_minus, double n_plus, double area_plus);

/// n * log((n - 1) / area) for n > 1, else 0.
double cell_log_term(double n, double area);

struct CovariateNode {
  std::int32_t covariate = -1;  // -1 for leaves
  double threshold = 0.0;       // sub-level: z <= threshold
  std::int32_t sub = -1;
  std::int32_t super = -1;

  double boot_count = 0.0;  // bootstrap points in the cell
  double raw_count = 0.0;   // original points in the cell (leaves)
  double area = 0.0;
  std::uint32_t depth = 0;

  double score = 0.0;  // split score of the chosen covariate
  double gain = 0.0;   // score - cell_log_term(boot_count, area)

  /// Sampled covariates (ascending) and their scores; filled by fitting only.
  std::vector<std::int32_t> candidates;
  std::vector<double> candidate_scores;

  bool is_leaf() const { return covariate < 0; }
};

/// How the split threshold of a cell is chosen.
enum class MedianRule {
  pixel,  // median of the covariate over the cell's pixels (area median)
  points  // median of the covariate at the cell's bootstrap points
};

class CovariateTree {
 public:
  CovariateTree(std::vector<CovariateNode> nodes, double a_n, std::vector<std::uint32_t> multiplicities = {});

  std::span<const CovariateNode> nodes() const { return nodes_; }
  double a_n() const { return a_n_; }
  /// Bootstrap draws per point index (empty for trees loaded from disk).
  std::span<const std::uint32_t> multiplicities() const { return mult_; }

  /// Leaf node reached by covariate vector z (<= goes to the sub-level child).
  std::size_t leaf_for(std::span<const double> z) const;
  /// Leaf node of lattice pixel `pixel` of the stack.
  std::size_t leaf_for_pixel(const CovariateStack& stack, std::size_t pixel) const;
  double leaf_estimate(std::size_t node) const;
  /// Throws std::invalid_argument on NA entries or a wrong length.
  double predict(std::span<const double> z) const;

  /// Leaf node indices in node order; position = partition cell id.
  std::vector<std::size_t> leaves() const;
  /// Leaf regions as a partition of the domain (cell j = leaves()[j]).
  Partition leaf_partition(const CovariateStack& stack, const Domain& domain) const;
  /// (covariate, gain) for every split.
  std::vector<std::pair<std::size_t, double>> split_gains() const;

 private:
  std::vector<CovariateNode> nodes_;
  double a_n_;
  std::vector<std::uint32_t> mult_;
};

struct CovariateForestOptions {
  std::size_t trees = 100;
  std::size_t mtry = 0;  // 0: all covariates
  std::size_t n_min = 10;
  double a_n = 1.0;
  std::size_t max_depth = 0;  // 0: unlimited
  MedianRule median = MedianRule::pixel;
  unsigned threads = 0;
};

/**
 * Grows one tree: bootstrap the pattern, then split every cell holding more
 * than n_min bootstrap points along the best of mtry randomly chosen
 * covariates at their median. Cells where no candidate leaves both sides
 * non-empty stay leaves. `domain` must live on the stack lattice.
 */
CovariateTree fit_covariate_tree(const PointPattern& pattern, const CovariateStack& stack, const Domain& domain,
                                 std::size_t mtry, std::size_t n_min, double a_n, RngSeed rng,
                                 std::size_t max_depth = 0, MedianRule median = MedianRule::pixel);

class CovariateForest {
 public:
  CovariateForest(std::vector<std::string> names, CovariateForestOptions options, std::vector<CovariateTree> trees,
                  RngSeed seed);

  const std::vector<std::string>& names() const { return names_; }
  const CovariateForestOptions& options() const { return options_; }
  std::span<const CovariateTree> trees() const { return trees_; }
  std::size_t size() const { return trees_.size(); }
  RngSeed seed() const { return seed_; }

  double predict(std::span<const double> z) const;
  /// Estimates at every interior pixel of `domain` (NA elsewhere).
  RasterGrid predict_grid(const CovariateStack& stack, const Domain& domain) const;

 private:
  std::vector<std::string> names_;
  CovariateForestOptions options_;
  std::vector<CovariateTree> trees_;
  RngSeed seed_;
};

/// Tree i uses rng.child(i); output does not depend on the thread count.
CovariateForest fit_covariate_forest(const PointPattern& pattern, const CovariateStack& stack, const Domain& domain,
                                     const CovariateForestOptions& options, RngSeed rng);

double predict_covariate(const CovariateForest& forest, std::span<const double> z);
double predict_covariate(const CovariateTree& tree, std::span<const double> z);

/// Per covariate: sum of split gains within each tree, averaged over trees.
std::vector<double> variable_importance(const CovariateForest& forest);

}  // namespace spforest
