#include "spforest/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace spforest {

IntensityModel IntensityModel::constant(double lambda) {
  if (!std::isfinite(lambda) || lambda < 0.0) throw std::invalid_argument("constant intensity must be finite and >= 0");
  IntensityModel m;
  m.kind_ = Kind::constant;
  m.coefficient_ = lambda;
  return m;
}

IntensityModel IntensityModel::from_grid(RasterGrid grid) {
  for (double v : grid.values())
    if (!is_na(v) && (!std::isfinite(v) || v < 0.0))
      throw std::invalid_argument("intensity grid has negative or non-finite values");
  IntensityModel m;
  m.kind_ = Kind::grid;
  m.coefficient_ = 1.0;
  m.shape_ = std::make_shared<const RasterGrid>(std::move(grid));
  return m;
}

IntensityModel IntensityModel::analytic(std::function<double(double, double)> fn, double upper_bound) {
  if (!std::isfinite(upper_bound) || upper_bound < 0.0) throw std::invalid_argument("upper bound must be finite");
  IntensityModel m;
  m.kind_ = Kind::analytic;
  m.coefficient_ = 1.0;
  m.fn_ = std::move(fn);
  m.fn_bound_ = upper_bound;
  return m;
}

double IntensityModel::operator()(double x, double y) const {
  switch (kind_) {
    case Kind::constant:
      return coefficient_;
    case Kind::analytic:
      return coefficient_ * fn_(x, y);
    case Kind::grid:
    case Kind::covariate_formula: {
      const double v = shape_->value_at(x, y);
      return is_na(v) ? 0.0 : coefficient_ * v;
    }
  }
  return 0.0;
}

RasterGrid IntensityModel::rasterize(const Domain& domain) const {
  RasterGrid out(domain.grid(), kNA);
  for (std::size_t p : domain.interior_pixels()) {
    const Point c = domain.grid().center(p);
    out[p] = (*this)(c.x, c.y);
  }
  return out;
}

double IntensityModel::expected_count(const Domain& domain) const {
  double sum = 0.0;
  for (std::size_t p : domain.interior_pixels()) {
    const Point c = domain.grid().center(p);
    sum += (*this)(c.x, c.y);
  }
  return sum * domain.pixel_area();
}

double IntensityModel::upper_bound(const Domain& domain) const {
  switch (kind_) {
    case Kind::constant:
      return coefficient_;
    case Kind::analytic:
      return coefficient_ * fn_bound_;
    case Kind::grid:
    case Kind::covariate_formula: {
      double m = 0.0;
      for (double v : shape_->values())
        if (!is_na(v)) m = std::max(m, v);
      (void)domain;
      return coefficient_ * m;
    }
  }
  return 0.0;
}

IntensityModel IntensityModel::scaled(double factor) const {
  if (!std::isfinite(factor) || factor < 0.0) throw std::invalid_argument("scale factor must be finite and >= 0");
  IntensityModel m = *this;
  m.coefficient_ *= factor;
  return m;
}

// ---------------------------------------------------------------------------

namespace {

Point uniform_in_window(const Window& w, Engine& eng) {
  std::uniform_real_distribution<double> ux(w.xmin(), w.xmax());
  std::uniform_real_distribution<double> uy(w.ymin(), w.ymax());
  for (;;) {
    const Point p{ux(eng), uy(eng)};
    if (w.contains(p)) return p;
  }
}

std::uint64_t poisson_draw(double mean, Engine& eng) {
  if (mean <= 0.0) return 0;
  std::poisson_distribution<std::uint64_t> pois(mean);
  return pois(eng);
}

}  // namespace

PointPattern simulate_homogeneous_poisson(const Window& w, double lambda, RngSeed rng) {
  if (!std::isfinite(lambda)) throw std::invalid_argument("lambda must be finite");
  if (lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");
  Engine eng = rng.engine();
  const auto n = poisson_draw(lambda * window_area(w), eng);
  PointPattern out(w);
  for (std::uint64_t i = 0; i < n; ++i) out.add(uniform_in_window(w, eng));
  return out;
}

PointPattern simulate_inhomogeneous_poisson(const Domain& domain, const IntensityModel& model, RngSeed rng) {
  for (std::size_t p : domain.interior_pixels()) {
    const Point c = domain.grid().center(p);
    const double v = model(c.x, c.y);
    if (!std::isfinite(v) || v < 0.0) throw std::invalid_argument("intensity model is negative or non-finite on W");
  }
  const double bound = model.upper_bound(domain);
  const Window& w = domain.window();
  Engine eng = rng.engine();
  const auto n = poisson_draw(bound * window_area(w), eng);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  PointPattern out(w);
  for (std::uint64_t i = 0; i < n; ++i) {
    const Point p = uniform_in_window(w, eng);
    const double keep = unit(eng);
    if (keep * bound < model(p.x, p.y)) out.add(p);
  }
  return out;
}

PointPattern simulate_thomas(const Window& w, double parent_intensity, double mean_offspring, double cluster_sd,
                             RngSeed rng) {
  if (!(parent_intensity > 0.0) || !(mean_offspring > 0.0) || !(cluster_sd > 0.0))
    throw std::invalid_argument("Thomas process parameters must be positive");
  Engine eng = rng.engine();
  const double margin = 4.0 * cluster_sd;
  const double x0 = w.xmin() - margin, x1 = w.xmax() + margin;
  const double y0 = w.ymin() - margin, y1 = w.ymax() + margin;
  const auto parents = poisson_draw(parent_intensity * (x1 - x0) * (y1 - y0), eng);
  std::uniform_real_distribution<double> ux(x0, x1), uy(y0, y1);
  std::normal_distribution<double> offset(0.0, cluster_sd);
  PointPattern out(w);
  for (std::uint64_t i = 0; i < parents; ++i) {
    const Point c{ux(eng), uy(eng)};
    const auto children = poisson_draw(mean_offspring, eng);
    for (std::uint64_t j = 0; j < children; ++j) {
      const Point p{c.x + offset(eng), c.y + offset(eng)};
      if (w.contains(p)) out.add(p);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<std::string> default_covariate_names(std::size_t p) {
  static const char* kSoil[] = {"elev", "grad", "Al", "B", "Ca", "Cu", "Fe", "K",
                                "Mg",   "Mn",   "P",  "Zn", "N", "Nmin", "pH"};
  std::vector<std::string> names;
  for (std::size_t k = 0; k < p; ++k) names.push_back(k < 15 ? kSoil[k] : "z" + std::to_string(k + 1));
  return names;
}

namespace {

RasterGrid bump_field(const Domain& domain, double smoothness, Engine& eng) {
  const GridGeometry& g = domain.grid();
  const double margin = 3.0 * smoothness;
  const double x0 = g.xmin - margin, x1 = g.xmax() + margin;
  const double y0 = g.ymin - margin, y1 = g.ymax() + margin;
  const auto nbumps = static_cast<std::size_t>(std::ceil((x1 - x0) * (y1 - y0) / (smoothness * smoothness)));
  std::uniform_real_distribution<double> ux(x0, x1), uy(y0, y1);
  std::normal_distribution<double> amp(0.0, 1.0);

  std::vector<double> field(g.size(), 0.0);
  const double reach = 4.0 * smoothness;
  const double inv2s2 = 1.0 / (2.0 * smoothness * smoothness);
  std::vector<double> fx(g.ncols), fy(g.nrows);
  for (std::size_t b = 0; b < nbumps; ++b) {
    const double cx = ux(eng), cy = uy(eng), a = amp(eng);
    const auto col_lo = static_cast<long>(std::floor((cx - reach - g.xmin) / g.cellsize));
    const auto col_hi = static_cast<long>(std::ceil((cx + reach - g.xmin) / g.cellsize));
    const auto rowb_lo = static_cast<long>(std::floor((cy - reach - g.ymin) / g.cellsize));
    const auto rowb_hi = static_cast<long>(std::ceil((cy + reach - g.ymin) / g.cellsize));
    const long c0 = std::max(0L, col_lo), c1 = std::min(static_cast<long>(g.ncols) - 1, col_hi);
    const long r0 = std::max(0L, rowb_lo), r1 = std::min(static_cast<long>(g.nrows) - 1, rowb_hi);
    if (c0 > c1 || r0 > r1) continue;
    for (long c = c0; c <= c1; ++c) {
      const double dx = g.xmin + (static_cast<double>(c) + 0.5) * g.cellsize - cx;
      fx[c] = std::exp(-dx * dx * inv2s2);
    }
    for (long rb = r0; rb <= r1; ++rb) {
      const double dy = g.ymin + (static_cast<double>(rb) + 0.5) * g.cellsize - cy;
      fy[rb] = a * std::exp(-dy * dy * inv2s2);
    }
    for (long rb = r0; rb <= r1; ++rb) {
      const std::size_t row = g.nrows - 1 - static_cast<std::size_t>(rb);
      double* dst = field.data() + row * g.ncols;
      for (long c = c0; c <= c1; ++c) dst[c] += fy[rb] * fx[c];
    }
  }

  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t p : domain.interior_pixels()) {
    lo = std::min(lo, field[p]);
    hi = std::max(hi, field[p]);
  }
  const double span = hi - lo;
  std::vector<double> out(g.size(), kNA);
  for (std::size_t p : domain.interior_pixels()) out[p] = span > 0.0 ? (field[p] - lo) / span : 0.0;
  return RasterGrid(g, std::move(out));
}

}  // namespace

CovariateStack synthetic_covariates(const Domain& domain, std::size_t p, double smoothness, RngSeed rng) {
  if (p < 1) throw std::invalid_argument("need at least one covariate");
  if (!(smoothness > 0.0)) throw std::invalid_argument("smoothness must be positive");
  std::vector<RasterGrid> grids;
  grids.reserve(p);
  for (std::size_t k = 0; k < p; ++k) {
    Engine eng = rng.child(k).engine();
    grids.push_back(bump_field(domain, smoothness, eng));
  }
  return CovariateStack(default_covariate_names(p), std::move(grids));
}

namespace {

std::pair<double, double> range_of(const RasterGrid& g) { return {g.min_value(), g.max_value()}; }

double unit_scale(double v, std::pair<double, double> r) {
  const double span = r.second - r.first;
  return span > 0.0 ? (v - r.first) / span : 0.0;
}

}  // namespace

IntensityModel synthetic_intensity_model(const CovariateStack& stack, const std::string& mn, const std::string& zn,
                                         const std::string& fe, double target_mean_count) {
  if (!(target_mean_count > 0.0)) throw std::invalid_argument("target mean count must be positive");
  const RasterGrid& g_mn = stack.grid(mn);
  const RasterGrid& g_zn = stack.grid(zn);
  const RasterGrid& g_fe = stack.grid(fe);
  const auto r_zn = range_of(g_zn);
  const auto r_fe = range_of(g_fe);

  const GridGeometry& geom = stack.geometry();
  std::vector<double> shape(geom.size(), kNA);
  double sum = 0.0;
  for (std::size_t i = 0; i < geom.size(); ++i) {
    if (is_na(g_mn[i]) || is_na(g_zn[i]) || is_na(g_fe[i])) continue;
    const double psi = 1.0 + std::sin(20.0 + g_mn[i] / 100.0);
    shape[i] = std::exp(0.5 * psi + 1.2 * unit_scale(g_zn[i], r_zn) + 0.8 * unit_scale(g_fe[i], r_fe));
    sum += shape[i];
  }
  if (!(sum > 0.0)) throw DataError("covariates have no joint non-NA pixel");

  IntensityModel m;
  m.kind_ = IntensityModel::Kind::covariate_formula;
  m.coefficient_ = target_mean_count / (sum * geom.pixel_area());
  m.shape_ = std::make_shared<const RasterGrid>(geom, std::move(shape));
  return m;
}

RasterGrid surrogate_mn_raw(const RasterGrid& mn_unit) {
  RasterGrid out = mn_unit;
  for (double& v : out.values())
    if (!is_na(v)) v = 100.0 * (40.0 * v - 20.0);
  return out;
}

SurrogateScenario surrogate_soil_scenario(const Domain& domain, std::size_t p, double smoothness,
                                          double target_mean_count, RngSeed rng) {
  if (p < 12) throw std::invalid_argument("the soil scenario needs the Fe, Mn and Zn fields (p >= 12)");
  CovariateStack stack = synthetic_covariates(domain, p, smoothness, rng);
  CovariateStack raw = stack;
  const auto mn = *stack.find("Mn");
  raw.replace(mn, surrogate_mn_raw(stack.grid(mn)));
  IntensityModel model = synthetic_intensity_model(raw, "Mn", "Zn", "Fe", target_mean_count);
  RasterGrid truth = model.rasterize(domain);
  return {std::move(stack), std::move(model), std::move(truth), {"Fe", "Mn", "Zn"}};
}

}  // namespace spforest
