#include "spforest/geometry.hpp"

#include <algorithm>
#include <unordered_set>

namespace spforest {

namespace {

std::size_t clamp_index(double offset, std::size_t n) {
  if (offset <= 0.0) return 0;
  const auto i = static_cast<std::size_t>(offset);
  return std::min(i, n - 1);
}

}  // namespace

std::optional<std::size_t> GridGeometry::locate(double x, double y) const {
  if (!(x >= xmin && x <= xmax() && y >= ymin && y <= ymax())) return std::nullopt;
  const auto col = clamp_index((x - xmin) / cellsize, ncols);
  const auto row_from_bottom = clamp_index((y - ymin) / cellsize, nrows);
  return index(nrows - 1 - row_from_bottom, col);
}

// ---------------------------------------------------------------------------

RasterGrid::RasterGrid(GridGeometry geometry, double fill)
    : geom_(geometry), values_(geometry.size(), fill) {
  if (geom_.ncols == 0 || geom_.nrows == 0) throw DataError("raster grid must have positive dimensions");
  if (!(geom_.cellsize > 0.0)) throw DataError("raster cellsize must be positive");
}

RasterGrid::RasterGrid(GridGeometry geometry, std::vector<double> values)
    : geom_(geometry), values_(std::move(values)) {
  if (geom_.ncols == 0 || geom_.nrows == 0) throw DataError("raster grid must have positive dimensions");
  if (!(geom_.cellsize > 0.0)) throw DataError("raster cellsize must be positive");
  if (values_.size() != geom_.size()) throw DataError("raster value count does not match ncols*nrows");
}

double RasterGrid::value_at(double x, double y) const {
  const auto idx = geom_.locate(x, y);
  return idx ? values_[*idx] : kNA;
}

bool RasterGrid::congruent(const RasterGrid& other) const {
  if (!(geom_ == other.geom_)) return false;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (is_na(values_[i]) != is_na(other.values_[i])) return false;
  }
  return true;
}

double RasterGrid::min_value() const {
  double m = std::numeric_limits<double>::infinity();
  for (double v : values_)
    if (!is_na(v)) m = std::min(m, v);
  return m;
}

double RasterGrid::max_value() const {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : values_)
    if (!is_na(v)) m = std::max(m, v);
  return m;
}

// ---------------------------------------------------------------------------

Window Window::rectangle(double xmin, double ymin, double xmax, double ymax) {
  if (!(xmax > xmin) || !(ymax > ymin) || !std::isfinite(xmin) || !std::isfinite(ymin) ||
      !std::isfinite(xmax) || !std::isfinite(ymax)) {
    throw DataError("window requires finite bounds with xmax > xmin and ymax > ymin");
  }
  Window w;
  w.xmin_ = xmin;
  w.ymin_ = ymin;
  w.xmax_ = xmax;
  w.ymax_ = ymax;
  return w;
}

Window Window::masked(RasterGrid mask) {
  const auto& g = mask.geometry();
  bool any = false;
  for (double v : mask.values()) {
    if (!is_na(v) && v != 0.0) {
      any = true;
      break;
    }
  }
  if (!any) throw DataError("mask has no interior pixel");
  Window w = rectangle(g.xmin, g.ymin, g.xmax(), g.ymax());
  w.mask_ = std::make_shared<const RasterGrid>(std::move(mask));
  return w;
}

bool Window::contains(double x, double y) const {
  if (!(x >= xmin_ && x <= xmax_ && y >= ymin_ && y <= ymax_)) return false;
  if (!mask_) return true;
  const double v = mask_->value_at(x, y);
  return !is_na(v) && v != 0.0;
}

Window Window::translated(double dx, double dy) const {
  Window w = rectangle(xmin_ + dx, ymin_ + dy, xmax_ + dx, ymax_ + dy);
  if (mask_) {
    GridGeometry g = mask_->geometry();
    g.xmin += dx;
    g.ymin += dy;
    std::vector<double> values(mask_->values().begin(), mask_->values().end());
    w.mask_ = std::make_shared<const RasterGrid>(g, std::move(values));
  }
  return w;
}

double window_area(const Window& w) {
  if (!w.has_mask()) return w.width() * w.height();
  std::size_t inside = 0;
  for (double v : w.mask()->values())
    if (!is_na(v) && v != 0.0) ++inside;
  return static_cast<double>(inside) * w.mask()->pixel_area();
}

// ---------------------------------------------------------------------------

Domain::Domain(const Window& w, int resolution) : window_(w) {
  if (w.has_mask()) {
    const RasterGrid& mask = *w.mask();
    geom_ = mask.geometry();
    interior_.resize(geom_.size());
    for (std::size_t i = 0; i < geom_.size(); ++i) {
      const double v = mask[i];
      interior_[i] = (!is_na(v) && v != 0.0) ? 1 : 0;
    }
  } else {
    if (resolution < 1) throw std::invalid_argument("resolution must be at least 1");
    const double longer = std::max(w.width(), w.height());
    geom_.cellsize = longer / static_cast<double>(resolution);
    geom_.ncols = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(w.width() / geom_.cellsize)));
    geom_.nrows = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(w.height() / geom_.cellsize)));
    geom_.xmin = w.xmin();
    geom_.ymin = w.ymin();
    interior_.assign(geom_.size(), 1);
  }
  index_interior();
}

Domain::Domain(const Window& w, GridGeometry geom, std::vector<std::uint8_t> interior)
    : window_(w), geom_(geom), interior_(std::move(interior)) {
  if (interior_.size() != geom_.size()) throw DataError("interior flags do not match lattice size");
  index_interior();
}

void Domain::index_interior() {
  interior_pixels_.clear();
  for (std::size_t i = 0; i < interior_.size(); ++i)
    if (interior_[i]) interior_pixels_.push_back(i);
  if (interior_pixels_.empty()) throw DataError("domain has no interior pixel");
}

std::optional<std::size_t> Domain::locate(double x, double y) const {
  if (!window_.contains(x, y)) return std::nullopt;
  const auto col = clamp_index((x - geom_.xmin) / geom_.cellsize, geom_.ncols);
  const auto row_from_bottom = clamp_index((y - geom_.ymin) / geom_.cellsize, geom_.nrows);
  const auto idx = geom_.index(geom_.nrows - 1 - row_from_bottom, col);
  if (!interior_[idx]) return std::nullopt;
  return idx;
}

// ---------------------------------------------------------------------------

PointPattern::PointPattern(Window w, std::vector<Point> points) : window_(std::move(w)) {
  points_.reserve(points.size());
  mult_.reserve(points.size());
  for (const auto& p : points) add(p);
}

void PointPattern::add(Point p, std::uint32_t multiplicity) {
  if (multiplicity == 0) throw std::invalid_argument("multiplicity must be positive");
  if (!window_.contains(p)) {
    throw DataError("point (" + std::to_string(p.x) + ", " + std::to_string(p.y) + ") lies outside the window");
  }
  points_.push_back(p);
  mult_.push_back(multiplicity);
  total_ += multiplicity;
}

PointPattern PointPattern::translated(double dx, double dy) const {
  PointPattern out(window_.translated(dx, dy));
  for (std::size_t i = 0; i < points_.size(); ++i) out.add({points_[i].x + dx, points_[i].y + dy}, mult_[i]);
  return out;
}

// ---------------------------------------------------------------------------

CovariateStack::CovariateStack(std::vector<std::string> names, std::vector<RasterGrid> grids)
    : names_(std::move(names)), grids_(std::move(grids)) {
  if (grids_.empty()) throw DataError("covariate stack needs at least one grid");
  if (names_.size() != grids_.size()) throw DataError("covariate names and grids differ in length");
  std::unordered_set<std::string> seen;
  for (const auto& n : names_)
    if (!seen.insert(n).second) throw DataError("duplicate covariate name: " + n);
  for (std::size_t k = 1; k < grids_.size(); ++k)
    if (!grids_[k].congruent(grids_[0])) throw DataError("covariate grid '" + names_[k] + "' is not congruent");
}

const RasterGrid& CovariateStack::grid(const std::string& name) const {
  const auto k = find(name);
  if (!k) throw DataError("missing covariate: " + name);
  return grids_[*k];
}

std::optional<std::size_t> CovariateStack::find(const std::string& name) const {
  for (std::size_t k = 0; k < names_.size(); ++k)
    if (names_[k] == name) return k;
  return std::nullopt;
}

Window CovariateStack::window() const {
  const auto& g = geometry();
  std::vector<double> mask(g.size());
  bool full = true;
  for (std::size_t i = 0; i < g.size(); ++i) {
    mask[i] = is_na(grids_[0][i]) ? 0.0 : 1.0;
    full = full && mask[i] != 0.0;
  }
  if (full) return Window::rectangle(g.xmin, g.ymin, g.xmax(), g.ymax());
  return Window::masked(RasterGrid(g, std::move(mask)));
}

std::vector<double> CovariateStack::values_at(double x, double y) const {
  std::vector<double> z(grids_.size());
  for (std::size_t k = 0; k < grids_.size(); ++k) z[k] = grids_[k].value_at(x, y);
  return z;
}

void CovariateStack::replace(std::size_t k, RasterGrid grid) {
  if (!grid.congruent(grids_.at(k))) throw DataError("replacement grid is not congruent");
  grids_[k] = std::move(grid);
}

// ---------------------------------------------------------------------------

double quantile_type7(std::span<const double> sorted, double prob) {
  if (sorted.empty()) throw std::invalid_argument("quantile of empty data");
  prob = std::clamp(prob, 0.0, 1.0);
  const double h = (static_cast<double>(sorted.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double mean_iqr(const PointPattern& pattern) {
  if (pattern.total_count() == 0) throw std::invalid_argument("mean_iqr of an empty pattern");
  std::vector<double> xs, ys;
  xs.reserve(pattern.total_count());
  ys.reserve(pattern.total_count());
  const auto pts = pattern.points();
  const auto mult = pattern.multiplicities();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::uint32_t m = 0; m < mult[i]; ++m) {
      xs.push_back(pts[i].x);
      ys.push_back(pts[i].y);
    }
  }
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  const double iqr_x = quantile_type7(xs, 0.75) - quantile_type7(xs, 0.25);
  const double iqr_y = quantile_type7(ys, 0.75) - quantile_type7(ys, 0.25);
  return 0.5 * (iqr_x + iqr_y);
}

}  // namespace spforest
