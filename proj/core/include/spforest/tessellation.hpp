#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "spforest/geometry.hpp"
#include "spforest/rng.hpp"

namespace spforest {

/// Where a partition came from.
struct PartitionOrigin {
  enum class Kind { voronoi, tree };
  Kind kind = Kind::voronoi;
  double gamma = 0.0;  // voronoi only
  RngSeed seed{};
  /// Zero nuclei were drawn and a single uniform nucleus was substituted.
  bool fallback_nucleus = false;
};

/**
 * Pixel-resolution partition of a domain into cells 0..J-1.
 *
 * Pixels outside W carry label -1. Cell areas are pixel counts times the pixel
 * area, so they sum to Domain::area().
 */
class Partition {
 public:
  static constexpr std::int32_t kOutside = -1;

  Partition(GridGeometry geom, std::vector<std::int32_t> labels, PartitionOrigin origin = {});

  const GridGeometry& grid() const { return geom_; }
  std::span<const std::int32_t> labels() const { return labels_; }
  std::int32_t label(std::size_t pixel) const { return labels_[pixel]; }
  std::size_t cell_count() const { return areas_.size(); }
  std::span<const double> cell_areas() const { return areas_; }
  std::span<const std::size_t> cell_pixel_counts() const { return pixel_counts_; }
  const PartitionOrigin& origin() const { return origin_; }
  double total_area() const;

  /// Cell containing (x, y); empty outside W.
  std::optional<std::size_t> cell_of(double x, double y) const;

  /// Label grid as a raster (NA outside W).
  RasterGrid to_raster() const;
  /// Inverse of to_raster; labels must be contiguous integers from 0.
  static Partition from_raster(const RasterGrid& labels, PartitionOrigin origin = {});

 private:
  GridGeometry geom_;
  std::vector<std::int32_t> labels_;
  std::vector<std::size_t> pixel_counts_;
  std::vector<double> areas_;
  PartitionOrigin origin_;
};

struct VoronoiOptions {
  /// Nuclei are drawn on the window bounding box dilated by
  /// margin_factor / sqrt(gamma) on every side.
  double margin_factor = 2.0;
};

/**
 * Nearest-nucleus lookup over a bucket grid. Ties resolve to the lowest
 * nucleus index.
 */
class NucleusIndex {
 public:
  NucleusIndex(std::vector<Point> nuclei, double xmin, double ymin, double xmax, double ymax);

  std::size_t nearest(double x, double y) const;
  std::span<const Point> nuclei() const { return nuclei_; }

 private:
  std::vector<Point> nuclei_;
  double x0_, y0_, bucket_;
  long nx_, ny_;
  std::vector<std::uint32_t> start_;
  std::vector<std::uint32_t> items_;
};

/// Homogeneous Poisson nuclei on the dilated bounding box of the domain. When
/// no nucleus is drawn, one uniform nucleus is returned and `fallback` is set.
NucleusIndex draw_voronoi_nuclei(const Domain& domain, double gamma, RngSeed rng, const VoronoiOptions& opts,
                                 bool* fallback = nullptr);

/**
 * Poisson Voronoi tessellation restricted to W. Each interior pixel goes to
 * its nearest nucleus; the 4-connected components of every cell within W
 * become separate cells, numbered in row-major order of first pixel.
 */
Partition poisson_voronoi_partition(const Domain& domain, double gamma, RngSeed rng, const VoronoiOptions& opts = {});

/**
 * Pixels of the cell containing interior pixel `seed_pixel`, for the same
 * tessellation poisson_voronoi_partition(domain, gamma, rng, opts) would
 * build, found by flood fill without labeling the whole domain.
 */
std::vector<std::size_t> zero_cell_pixels(const Domain& domain, const NucleusIndex& nuclei, std::size_t seed_pixel);

/// Maximum distance between pixel centers of a pixel set (convex hull +
/// rotating calipers).
double pixel_set_diameter(const GridGeometry& geom, std::span<const std::size_t> pixels);

struct ZeroCellStatistics {
  double mean_inverse_area = 0.0;
  double mean_diam = 0.0;
  double mean_diam_sq = 0.0;
  double se_inverse_area = 0.0;
  double se_diam = 0.0;
  std::size_t reps = 0;
};

/// Monte Carlo moments of the cell containing `x` over `reps` independent
/// tessellations (replication i uses rng.child(i)).
ZeroCellStatistics zero_cell_statistics(const Domain& domain, double gamma, Point x, std::size_t reps, RngSeed rng,
                                        const VoronoiOptions& opts = {});

}  // namespace spforest
