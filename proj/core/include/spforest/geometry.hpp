#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace spforest {

/// Pixels on the longer window side when a window is rasterized.
inline constexpr int kDefaultResolution = 256;

/// Missing-value marker for raster grids.
inline constexpr double kNA = std::numeric_limits<double>::quiet_NaN();

inline bool is_na(double v) { return std::isnan(v); }

/// Thrown for malformed input data (files, inconsistent geometry, points off-window).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/**
 * Geometry of a regular square-pixel lattice.
 *
 * Pixels are stored row-major with row 0 at the top (largest y), the same
 * order in which the text raster format lists its lines.
 */
struct GridGeometry {
  std::size_t ncols = 0;
  std::size_t nrows = 0;
  double xmin = 0.0;
  double ymin = 0.0;
  double cellsize = 1.0;

  std::size_t size() const { return ncols * nrows; }
  double xmax() const { return xmin + static_cast<double>(ncols) * cellsize; }
  double ymax() const { return ymin + static_cast<double>(nrows) * cellsize; }
  double pixel_area() const { return cellsize * cellsize; }

  std::size_t index(std::size_t row, std::size_t col) const { return row * ncols + col; }
  std::size_t row_of(std::size_t idx) const { return idx / ncols; }
  std::size_t col_of(std::size_t idx) const { return idx % ncols; }

  Point center(std::size_t idx) const {
    const auto r = row_of(idx);
    const auto c = col_of(idx);
    return {xmin + (static_cast<double>(c) + 0.5) * cellsize,
            ymin + (static_cast<double>(nrows - r) - 0.5) * cellsize};
  }

  /// Pixel whose square contains (x, y); points on the outer edge map to the
  /// adjacent pixel. Empty outside the lattice bounds.
  std::optional<std::size_t> locate(double x, double y) const;

  bool operator==(const GridGeometry&) const = default;
};

/// Regular grid of reals over a rectangle; NaN is the NA token.
class RasterGrid {
 public:
  RasterGrid() = default;
  RasterGrid(GridGeometry geometry, double fill);
  RasterGrid(GridGeometry geometry, std::vector<double> values);

  const GridGeometry& geometry() const { return geom_; }
  std::size_t ncols() const { return geom_.ncols; }
  std::size_t nrows() const { return geom_.nrows; }
  std::size_t size() const { return values_.size(); }
  double cellsize() const { return geom_.cellsize; }
  double pixel_area() const { return geom_.pixel_area(); }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  double operator[](std::size_t idx) const { return values_[idx]; }
  double& operator[](std::size_t idx) { return values_[idx]; }
  double at(std::size_t row, std::size_t col) const { return values_.at(geom_.index(row, col)); }

  /// Nearest-pixel-center lookup. NA outside the grid or at an NA pixel.
  double value_at(double x, double y) const;

  /// Same geometry and same NA pattern.
  bool congruent(const RasterGrid& other) const;

  double min_value() const;
  double max_value() const;

 private:
  GridGeometry geom_;
  std::vector<double> values_;
};

/**
 * Observation window W: an axis-aligned rectangle, optionally restricted by a
 * binary mask grid whose bounds coincide with the rectangle.
 */
class Window {
 public:
  static Window rectangle(double xmin, double ymin, double xmax, double ymax);
  /// Pixels with value != 0 (and not NA) are inside W.
  static Window masked(RasterGrid mask);

  double xmin() const { return xmin_; }
  double ymin() const { return ymin_; }
  double xmax() const { return xmax_; }
  double ymax() const { return ymax_; }
  double width() const { return xmax_ - xmin_; }
  double height() const { return ymax_ - ymin_; }

  bool has_mask() const { return mask_ != nullptr; }
  const RasterGrid* mask() const { return mask_.get(); }

  bool contains(double x, double y) const;
  bool contains(const Point& p) const { return contains(p.x, p.y); }

  Window translated(double dx, double dy) const;

 private:
  Window() = default;
  double xmin_ = 0, ymin_ = 0, xmax_ = 1, ymax_ = 1;
  std::shared_ptr<const RasterGrid> mask_;
};

/// |W|: rectangle area, or interior mask pixels times pixel area.
double window_area(const Window& w);

/**
 * Pixel rasterization of a window. All areas in the library (cells, level
 * sets, the window itself) are pixel counts times pixel area on one Domain.
 */
class Domain {
 public:
  /// Unmasked windows get square pixels with `resolution` pixels on the longer
  /// side; masked windows use the mask lattice and ignore `resolution`.
  explicit Domain(const Window& w, int resolution = kDefaultResolution);
  /// Lattice `geom` with explicit interior flags (e.g. a covariate NA pattern).
  Domain(const Window& w, GridGeometry geom, std::vector<std::uint8_t> interior);

  const Window& window() const { return window_; }
  const GridGeometry& grid() const { return geom_; }
  double pixel_area() const { return geom_.pixel_area(); }
  double area() const { return pixel_area() * static_cast<double>(interior_pixels_.size()); }

  bool interior(std::size_t pixel) const { return interior_[pixel] != 0; }
  std::span<const std::size_t> interior_pixels() const { return interior_pixels_; }
  std::size_t interior_count() const { return interior_pixels_.size(); }

  /// Interior pixel containing (x, y), if any.
  std::optional<std::size_t> locate(double x, double y) const;

 private:
  void index_interior();

  Window window_;
  GridGeometry geom_;
  std::vector<std::uint8_t> interior_;
  std::vector<std::size_t> interior_pixels_;
};

/// Planar points with positive integer multiplicities, all inside `window`.
class PointPattern {
 public:
  explicit PointPattern(Window w) : window_(std::move(w)) {}
  /// Throws DataError if any point lies outside the window.
  PointPattern(Window w, std::vector<Point> points);

  void add(Point p, std::uint32_t multiplicity = 1);

  const Window& window() const { return window_; }
  std::span<const Point> points() const { return points_; }
  std::span<const std::uint32_t> multiplicities() const { return mult_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  /// Sum of multiplicities.
  std::uint64_t total_count() const { return total_; }

  PointPattern translated(double dx, double dy) const;

 private:
  Window window_;
  std::vector<Point> points_;
  std::vector<std::uint32_t> mult_;
  std::uint64_t total_ = 0;
};

/// p congruent covariate grids with unique names.
class CovariateStack {
 public:
  CovariateStack() = default;
  CovariateStack(std::vector<std::string> names, std::vector<RasterGrid> grids);

  std::size_t size() const { return grids_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  const RasterGrid& grid(std::size_t k) const { return grids_.at(k); }
  const RasterGrid& grid(const std::string& name) const;
  std::optional<std::size_t> find(const std::string& name) const;
  const GridGeometry& geometry() const { return grids_.front().geometry(); }

  /// Window whose mask is the common non-NA pattern of the grids.
  Window window() const;

  /// Covariate vector at the pixel containing (x, y); NA entries outside.
  std::vector<double> values_at(double x, double y) const;

  void replace(std::size_t k, RasterGrid grid);

 private:
  std::vector<std::string> names_;
  std::vector<RasterGrid> grids_;
};

/// Linear-interpolation quantile (type 7) of sorted data.
double quantile_type7(std::span<const double> sorted, double prob);

/// Average over x and y of the interquartile range of the point coordinates,
/// counting each point multiplicity times.
double mean_iqr(const PointPattern& pattern);

}  // namespace spforest
