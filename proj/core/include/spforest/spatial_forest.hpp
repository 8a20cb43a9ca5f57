#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "spforest/geometry.hpp"
#include "spforest/rng.hpp"
#include "spforest/tessellation.hpp"

namespace spforest {

/// Multiplicity-weighted point counts per lattice pixel of a domain.
class PixelCounts {
 public:
  /// Throws DataError if a point of the pattern is not in an interior pixel.
  PixelCounts(const Domain& domain, const PointPattern& pattern);
  /// Counts with per-point weights replacing the pattern multiplicities.
  PixelCounts(const Domain& domain, const PointPattern& pattern, std::span<const std::uint32_t> weights);

  /// Pixel of point i.
  std::size_t pixel_of(std::size_t i) const { return point_pixel_[i]; }
  std::span<const std::size_t> point_pixels() const { return point_pixel_; }
  /// (pixel, count) pairs with count > 0, sorted by pixel.
  const std::vector<std::pair<std::size_t, double>>& occupied() const { return occupied_; }
  double total() const { return total_; }

 private:
  void accumulate(std::span<const std::uint32_t> weights);

  std::vector<std::size_t> point_pixel_;
  std::vector<std::pair<std::size_t, double>> occupied_;
  double total_ = 0.0;
};

/// One tessellation tree: count / (a_n * area) on each cell.
struct SpatialTree {
  Partition partition;
  std::vector<double> counts;  // per cell, multiplicity weighted
  double a_n = 1.0;
  /// Bootstrap draws per point index; empty when the tree used the raw pattern.
  std::vector<std::uint32_t> multiplicities;

  double cell_estimate(std::size_t cell) const;
  /// Estimate at an interior pixel of the partition lattice.
  double pixel_estimate(std::size_t pixel) const;
};

struct SpatialForestOptions {
  std::size_t trees = 100;
  /// Tessellation intensity; rule of thumb when unset.
  std::optional<double> gamma;
  double a_n = 1.0;
  bool bootstrap = false;
  VoronoiOptions voronoi;
  unsigned threads = 0;
};

class SpatialForest {
 public:
  SpatialForest(std::shared_ptr<const Domain> domain, std::vector<SpatialTree> trees, double gamma, RngSeed seed);

  const Domain& domain() const { return *domain_; }
  std::shared_ptr<const Domain> domain_ptr() const { return domain_; }
  std::span<const SpatialTree> trees() const { return trees_; }
  std::size_t size() const { return trees_.size(); }
  double gamma() const { return gamma_; }
  RngSeed seed() const { return seed_; }

  /// Mean of the tree estimates at (x, y). Throws std::out_of_range outside W.
  double predict(double x, double y) const;
  /// Forest estimate at every pixel of the domain lattice, NA outside W.
  RasterGrid predict_grid() const;
  /// Forest estimate at pixel centers of `geom`, NA where the center is outside W.
  RasterGrid predict_grid(const GridGeometry& geom) const;

 private:
  std::shared_ptr<const Domain> domain_;
  std::vector<SpatialTree> trees_;
  double gamma_;
  RngSeed seed_;
};

/// |X|^(d/3) / (2^d * IQR^d) with IQR the mean coordinate interquartile range;
/// falls back to |X|^(d/3) / |W| when the IQR is zero. Throws on an empty pattern.
double rule_of_thumb_gamma(const PointPattern& pattern, int d = 2);

/// Draws total_count indices with replacement (weighted by multiplicity) and
/// returns the number of draws per point index.
std::vector<std::uint32_t> bootstrap_multiplicities(const PointPattern& pattern, Engine& eng);

/// One tree on a fresh Poisson Voronoi tessellation independent of the pattern.
SpatialTree fit_spatial_tree(const PointPattern& pattern, const Domain& domain, double gamma, double a_n, RngSeed rng,
                             bool bootstrap, const VoronoiOptions& opts = {});

/// Tree i uses rng.child(i); output does not depend on the thread count.
SpatialForest fit_spatial_forest(const PointPattern& pattern, std::shared_ptr<const Domain> domain,
                                 const SpatialForestOptions& options, RngSeed rng);

double predict_spatial(const SpatialForest& forest, double x, double y);
RasterGrid predict_spatial_grid(const SpatialForest& forest);

/**
 * Forest estimate at a single location without building full partitions:
 * each tree only materializes the cell containing `x`. Tree i uses
 * rng.child(i), so the value equals predict() of fit_spatial_forest with the
 * same arguments and no bootstrap.
 */
double spatial_forest_estimate_at(const PixelCounts& counts, const Domain& domain, double gamma, double a_n,
                                  std::size_t trees, Point x, RngSeed rng, const VoronoiOptions& opts = {});

}  // namespace spforest
