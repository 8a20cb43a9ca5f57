#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "spforest/covariate_forest.hpp"
#include "spforest/geometry.hpp"
#include "spforest/simulate.hpp"
#include "spforest/spatial_forest.hpp"

namespace spforest {

/// Leave-one-out Poisson log-likelihood of a partition estimator:
/// sum_j (n_j log((n_j - 1) / |A_j|) 1{n_j > 1} - n_j).
double lcv(std::span<const double> counts, std::span<const double> areas);

/// Estimates below this value are raised to it before taking logs in OOB
/// scores: `fraction` times the average intensity of the pattern.
double oob_floor(const PointPattern& pattern, double fraction = 1e-6);

struct OobTreeScore {
  double score = 0.0;
  std::size_t oob_points = 0;  // distinct point indices with zero bootstrap draws
  bool empty = false;          // no out-of-bag point; score is 0
};

/// Sum of log estimates at the points the tree never drew. The tree must carry
/// bootstrap multiplicities for `pattern`.
OobTreeScore oob_score_tree(const SpatialTree& tree, const PointPattern& pattern, const Domain& domain, double floor);
OobTreeScore oob_score_tree(const CovariateTree& tree, const PointPattern& pattern, const CovariateStack& stack,
                            const Domain& domain, double floor);

struct ScoreReport {
  std::vector<double> tree_scores;
  double mean_oob = 0.0;
  std::size_t empty_trees = 0;
  std::optional<double> lcv;
};

ScoreReport oob_score_forest(const SpatialForest& forest, const PointPattern& pattern, double floor);
ScoreReport oob_score_forest(const CovariateForest& forest, const PointPattern& pattern, const CovariateStack& stack,
                             const Domain& domain, double floor);

struct CovariateTuple {
  std::size_t mtry = 1;
  std::size_t n_min = 10;
  std::size_t trees = 100;
  bool operator==(const CovariateTuple&) const = default;
};

struct CovariateTuning {
  std::vector<CovariateTuple> grid;
  std::vector<ScoreReport> reports;  // aligned with grid
  std::size_t best = 0;
};

struct SpatialTuning {
  std::vector<double> grid;  // gamma candidates
  std::vector<ScoreReport> reports;
  std::size_t best = 0;
};

/// Fits one forest per tuple (tuple i uses rng.child(i)) and picks the largest
/// mean OOB score; ties go to the earlier tuple.
CovariateTuning tune_covariate(const PointPattern& pattern, const CovariateStack& stack, const Domain& domain,
                               const std::vector<CovariateTuple>& grid, RngSeed rng, double a_n = 1.0,
                               unsigned threads = 0);

/// Bootstrap spatial forests, one per gamma candidate.
SpatialTuning tune_spatial(const PointPattern& pattern, std::shared_ptr<const Domain> domain,
                           const std::vector<double>& gammas, std::size_t trees, RngSeed rng, unsigned threads = 0);

/// Index of the maximal score; the first one on ties.
std::size_t argmax_first(std::span<const double> scores);

/// Integrated squared error over the non-NA pixels of `truth`
/// (sum of squared differences times pixel area). Throws DataError when the
/// geometries differ or the estimate is NA where the truth is not.
double mise(const RasterGrid& estimate, const RasterGrid& truth);
/// Integrated absolute error, same conventions as mise.
double miae(const RasterGrid& estimate, const RasterGrid& truth);

/// Spearman rank correlation (average ranks for ties).
double spearman(std::span<const double> a, std::span<const double> b);

struct InfillLevel {
  double a_n = 1.0;
  double h = 1.0;
  double gamma = 1.0;
  double mse = 0.0;
  double mse_se = 0.0;
  double mean_estimate = 0.0;
  double truth = 0.0;
};

struct InfillOptions {
  std::size_t trees = 50;
  std::size_t reps = 200;
  VoronoiOptions voronoi;
  unsigned threads = 0;
};

/**
 * For each a_n: simulate Poisson with intensity a_n * lambda, estimate
 * lambda(x) by a spatial forest with gamma = h(a_n)^-2 and normalization a_n,
 * and report the Monte Carlo MSE against lambda(x). Replication r of level l
 * uses rng.child(l).child(r).
 */
std::vector<InfillLevel> infill_study(const IntensityModel& model, const Domain& domain,
                                      const std::vector<double>& a_grid, const std::function<double(double)>& h_rule,
                                      Point x, const InfillOptions& options, RngSeed rng);

}  // namespace spforest
