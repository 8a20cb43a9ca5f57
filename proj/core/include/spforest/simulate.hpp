#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "spforest/geometry.hpp"
#include "spforest/rng.hpp"

namespace spforest {

/// Bounded nonnegative intensity function on a window.
class IntensityModel {
 public:
  enum class Kind { constant, grid, analytic, covariate_formula };

  static IntensityModel constant(double lambda);
  /// Piecewise constant on the pixels of `grid`; NA pixels count as zero.
  static IntensityModel from_grid(RasterGrid grid);
  /// Closed-form intensity with a caller-supplied upper bound over W.
  static IntensityModel analytic(std::function<double(double, double)> fn, double upper_bound);

  Kind kind() const { return kind_; }
  /// Multiplicative constant (lambda for constant models, c for formulas).
  double coefficient() const { return coefficient_; }

  double operator()(double x, double y) const;
  /// Intensity at the interior pixel centers of `domain`, NA elsewhere.
  RasterGrid rasterize(const Domain& domain) const;
  /// Grid integral of the intensity over the domain (pixel sum times pixel area).
  double expected_count(const Domain& domain) const;
  /// Bound used as the dominating rate for thinning.
  double upper_bound(const Domain& domain) const;

  /// Copy with every value multiplied by `factor` (infill scaling a_n * lambda).
  IntensityModel scaled(double factor) const;

 private:
  friend IntensityModel synthetic_intensity_model(const CovariateStack&, const std::string&, const std::string&,
                                                  const std::string&, double);
  IntensityModel() = default;

  Kind kind_ = Kind::constant;
  double coefficient_ = 0.0;
  // grid / covariate_formula: shape surface; intensity = coefficient * shape.
  std::shared_ptr<const RasterGrid> shape_;
  std::function<double(double, double)> fn_;
  double fn_bound_ = 0.0;
};

PointPattern simulate_homogeneous_poisson(const Window& w, double lambda, RngSeed rng);

/// Thinning of a homogeneous process at the model's upper bound. Throws
/// std::invalid_argument if the rasterized model is negative or non-finite.
PointPattern simulate_inhomogeneous_poisson(const Domain& domain, const IntensityModel& model, RngSeed rng);

/// Thomas (Neyman-Scott) process: Poisson parents on W dilated by 4 sd,
/// Poisson(mean_offspring) isotropic Gaussian children per parent, clipped to W.
PointPattern simulate_thomas(const Window& w, double parent_intensity, double mean_offspring, double cluster_sd,
                             RngSeed rng);

/// Names for p surrogate covariates: 15 soil and terrain fields
/// (elev, grad, Al, ..., pH), then z16, z17, ...
std::vector<std::string> default_covariate_names(std::size_t p);

/// p independent smooth random fields on the domain lattice, each a sum of
/// Gaussian bumps of width `smoothness`, min-max normalized to [0, 1] over W.
CovariateStack synthetic_covariates(const Domain& domain, std::size_t p, double smoothness, RngSeed rng);

/**
 * lambda(x) = c * exp(0.5 * (1 + sin(20 + Mn(x) / 100)) + 1.2 * Zn~(x) + 0.8 * Fe~(x))
 *
 * Zn~ and Fe~ are min-max normalized to [0, 1] over W (the non-NA pixels of
 * the stack); Mn enters raw. c is set so the grid integral equals
 * `target_mean_count`.
 */
IntensityModel synthetic_intensity_model(const CovariateStack& stack, const std::string& mn, const std::string& zn,
                                         const std::string& fe, double target_mean_count);

/// Raw-scale stand-in for a [0,1] surrogate Mn field: 100 * (40 * Mn - 20),
/// so that sin(20 + Mn_raw / 100) = sin(40 * Mn) oscillates over the field.
RasterGrid surrogate_mn_raw(const RasterGrid& mn_unit);

/// Surrogate version of the synthetic soil-covariate experiment.
struct SurrogateScenario {
  CovariateStack stack;   // covariates seen by the estimators, all in [0, 1]
  IntensityModel model;   // true intensity
  RasterGrid truth;       // model rasterized on the stack lattice
  std::vector<std::string> active;  // {"Fe", "Mn", "Zn"}
};

SurrogateScenario surrogate_soil_scenario(const Domain& domain, std::size_t p, double smoothness,
                                          double target_mean_count, RngSeed rng);

}  // namespace spforest
