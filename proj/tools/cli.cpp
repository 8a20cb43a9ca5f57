#include "cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>

#include "spforest/covariate_forest.hpp"
#include "spforest/io.hpp"
#include "spforest/model_io.hpp"
#include "spforest/parallel.hpp"
#include "spforest/scoring.hpp"
#include "spforest/simulate.hpp"
#include "spforest/spatial_forest.hpp"
#include "spforest/tessellation.hpp"

namespace spforest::cli {

namespace fs = std::filesystem;

namespace {

/// Bad flags or inconsistent configuration (exit code 2).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Global {
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  int resolution = kDefaultResolution;

  RngSeed rng() const {
    if (!seed) throw UsageError("--seed is required for this command");
    return RngSeed{*seed, 0};
  }
};

struct WindowArgs {
  std::vector<double> window;  // xmin,ymin,xmax,ymax
  std::string mask;

  void add(CLI::App* app) {
    app->add_option("--window", window, "Rectangle xmin,ymin,xmax,ymax")->delimiter(',')->expected(4);
    app->add_option("--mask", mask, "Mask raster (nonzero = inside)");
  }

  bool given() const { return !window.empty() || !mask.empty(); }

  Window get() const {
    if (!mask.empty()) {
      if (!window.empty()) throw UsageError("--window and --mask are mutually exclusive");
      return Window::masked(read_raster(mask));
    }
    if (window.size() != 4) throw UsageError("a window is required (--window xmin,ymin,xmax,ymax or --mask FILE)");
    return Window::rectangle(window[0], window[1], window[2], window[3]);
  }
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("cannot write " + path.string());
}

std::string real(double v) { return format_real(v); }

// ---------------------------------------------------------------------------
// Domain assembly shared by fit / tune / vip.

struct Problem {
  std::shared_ptr<const Domain> domain;
  std::optional<CovariateStack> stack;
  PointPattern pattern;
};

Problem load_problem(const Global& g, const WindowArgs& wa, const std::string& points, const std::string& covariates) {
  if (points.empty()) throw UsageError("--points is required");
  if (!covariates.empty()) {
    CovariateStack stack = read_covariate_dir(covariates);
    std::optional<Window> restrict;
    if (wa.given()) restrict = wa.get();
    auto domain = std::make_shared<const Domain>(covariate_domain(stack, restrict ? &*restrict : nullptr));
    PointPattern pattern = read_points_csv(points, domain->window());
    return {std::move(domain), std::move(stack), std::move(pattern)};
  }
  const Window w = wa.get();
  auto domain = std::make_shared<const Domain>(w, g.resolution);
  PointPattern pattern = read_points_csv(points, w);
  // Points on the window but in a pixel whose center is off-mask are rejected
  // by the pixel counter later; check up front for a clear message.
  for (const auto& p : pattern.points())
    if (!domain->locate(p.x, p.y)) throw DataError("point lies outside the rasterized window");
  return {std::move(domain), std::nullopt, std::move(pattern)};
}

// ---------------------------------------------------------------------------

struct SimulateCmd {
  WindowArgs win;
  std::string model = "constant";
  double lambda = 100.0;
  std::string intensity_grid;
  std::string covariates;
  std::string mn = "Mn", zn = "Zn", fe = "Fe";
  double target = 1000.0;
  std::size_t p = 15;
  double smoothness = 50.0;
  double parents = 10.0, offspring = 10.0, sd = 0.05;
  std::string out;
  std::string covariates_out;
  std::string truth_out;

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("simulate", "Simulate a point pattern");
    win.add(c);
    c->add_option("--model", model, "constant | grid | formula | surrogate | thomas")
        ->check(CLI::IsMember({"constant", "grid", "formula", "surrogate", "thomas"}));
    c->add_option("--lambda", lambda, "Intensity for --model constant");
    c->add_option("--intensity-grid", intensity_grid, "Intensity raster for --model grid");
    c->add_option("--covariates", covariates, "Covariate directory for --model formula");
    c->add_option("--mn", mn, "Covariate used raw inside the sine term");
    c->add_option("--zn", zn, "Covariate with weight 1.2");
    c->add_option("--fe", fe, "Covariate with weight 0.8");
    c->add_option("--target", target, "Expected number of points (formula / surrogate)");
    c->add_option("-p,--fields", p, "Number of surrogate covariate fields");
    c->add_option("--smoothness", smoothness, "Surrogate field bump width");
    c->add_option("--parents", parents, "Thomas parent intensity");
    c->add_option("--offspring", offspring, "Thomas mean offspring per parent");
    c->add_option("--sd", sd, "Thomas cluster standard deviation");
    c->add_option("-o,--out", out, "Points CSV")->required();
    c->add_option("--covariates-out", covariates_out, "Write surrogate covariate grids here");
    c->add_option("--truth-out", truth_out, "Write the true intensity raster here");
  }

  int run(const Global& g, std::ostream& os) const {
    const RngSeed rng = g.rng();
    std::optional<PointPattern> pattern;
    std::optional<double> expected;
    std::optional<RasterGrid> truth;
    if (model == "constant") {
      const Window w = win.get();
      if (lambda < 0 || !std::isfinite(lambda)) throw UsageError("--lambda must be finite and >= 0");
      pattern = simulate_homogeneous_poisson(w, lambda, rng);
      expected = lambda * window_area(w);
    } else if (model == "thomas") {
      pattern = simulate_thomas(win.get(), parents, offspring, sd, rng);
    } else if (model == "grid") {
      if (intensity_grid.empty()) throw UsageError("--model grid needs --intensity-grid");
      RasterGrid grid = read_raster(intensity_grid);
      std::vector<double> mask(grid.size());
      for (std::size_t i = 0; i < grid.size(); ++i) mask[i] = is_na(grid[i]) ? 0.0 : 1.0;
      const Domain d(Window::masked(RasterGrid(grid.geometry(), mask)));
      const auto m = IntensityModel::from_grid(grid);
      pattern = simulate_inhomogeneous_poisson(d, m, rng);
      expected = m.expected_count(d);
    } else if (model == "formula") {
      if (covariates.empty()) throw UsageError("--model formula needs --covariates");
      const CovariateStack stack = read_covariate_dir(covariates);
      const Domain d = covariate_domain(stack);
      const auto m = synthetic_intensity_model(stack, mn, zn, fe, target);
      pattern = simulate_inhomogeneous_poisson(d, m, rng);
      expected = m.expected_count(d);
      truth = m.rasterize(d);
      os << "coefficient," << real(m.coefficient()) << '\n';
    } else {
      const Domain d(win.get(), g.resolution);
      const auto sc = surrogate_soil_scenario(d, p, smoothness, target, rng.child(0));
      pattern = simulate_inhomogeneous_poisson(d, sc.model, rng.child(1));
      expected = sc.model.expected_count(d);
      truth = sc.truth;
      if (!covariates_out.empty()) write_covariate_dir(covariates_out, sc.stack);
    }
    write_points_csv(fs::path(out), *pattern);
    if (!truth_out.empty()) {
      if (!truth) throw UsageError("--truth-out needs --model formula or surrogate");
      write_raster(fs::path(truth_out), *truth);
    }
    if (expected) os << "expected_count," << real(*expected) << '\n';
    os << "points," << pattern->total_count() << '\n';
    return kExitOk;
  }
};

struct TessellateCmd {
  WindowArgs win;
  double gamma = 0.0;
  std::string out;

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("tessellate", "Write a Poisson Voronoi label grid");
    win.add(c);
    c->add_option("--gamma", gamma, "Nucleus intensity")->required();
    c->add_option("-o,--out", out, "Label raster")->required();
  }

  int run(const Global& g, std::ostream& os) const {
    if (!(gamma > 0.0)) throw UsageError("--gamma must be positive");
    const Domain d(win.get(), g.resolution);
    const auto part = poisson_voronoi_partition(d, gamma, g.rng());
    write_raster(fs::path(out), part.to_raster());
    os << "cells," << part.cell_count() << '\n';
    return kExitOk;
  }
};

struct ForestArgs {
  std::string mode = "spatial";
  std::string points;
  std::string covariates;
  std::size_t trees = 100;
  std::optional<double> gamma;
  bool bootstrap = false;
  double a_n = 1.0;
  std::size_t mtry = 0;
  std::size_t n_min = 10;
  std::size_t max_depth = 0;
  std::string median = "pixel";

  void add(CLI::App* c) {
    c->add_option("--mode", mode, "spatial | covariate")->check(CLI::IsMember({"spatial", "covariate"}));
    c->add_option("--points", points, "Points CSV (header x,y)");
    c->add_option("--covariates", covariates, "Directory of covariate rasters");
    c->add_option("-M,--trees", trees, "Number of trees");
    c->add_option("--gamma", gamma, "Tessellation intensity (default: rule of thumb)");
    c->add_flag("--bootstrap", bootstrap, "Bootstrap spatial trees");
    c->add_option("--a-n", a_n, "Normalization a_n");
    c->add_option("--mtry", mtry, "Covariates tried per split (0 = all)");
    c->add_option("--n-min", n_min, "Split cells holding more than n_min bootstrap points");
    c->add_option("--max-depth", max_depth, "Depth limit (0 = none)");
    c->add_option("--median", median, "pixel | points")->check(CLI::IsMember({"pixel", "points"}));
  }

  CovariateForestOptions covariate_options(unsigned threads) const {
    CovariateForestOptions o;
    o.trees = trees;
    o.mtry = mtry;
    o.n_min = n_min;
    o.a_n = a_n;
    o.max_depth = max_depth;
    o.median = median == "points" ? MedianRule::points : MedianRule::pixel;
    o.threads = threads;
    return o;
  }

  SpatialForestOptions spatial_options(unsigned threads) const {
    SpatialForestOptions o;
    o.trees = trees;
    o.gamma = gamma;
    o.bootstrap = bootstrap;
    o.a_n = a_n;
    o.threads = threads;
    return o;
  }

  void validate() const {
    if (trees < 1) throw UsageError("--trees must be at least 1");
    if (!(a_n > 0.0)) throw UsageError("--a-n must be positive");
    if (gamma && !(*gamma > 0.0)) throw UsageError("--gamma must be positive");
    if (mode == "covariate" && covariates.empty()) throw UsageError("covariate mode needs --covariates");
  }
};

struct FitCmd {
  WindowArgs win;
  ForestArgs forest;
  std::string model_out;
  std::string predict_grid;

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("fit", "Fit a spatial or covariate forest");
    win.add(c);
    forest.add(c);
    c->add_option("-o,--model-out", model_out, "Model file")->required();
    c->add_option("--predict-grid", predict_grid, "Also write the estimate raster");
  }

  int run(const Global& g, std::ostream& os) const {
    forest.validate();
    const RngSeed rng = g.rng();
    if (forest.mode == "spatial") {
      const Problem pr = load_problem(g, win, forest.points, "");
      const auto f = fit_spatial_forest(pr.pattern, pr.domain, forest.spatial_options(g.threads), rng);
      save_model(model_out, f);
      if (!predict_grid.empty()) write_raster(fs::path(predict_grid), f.predict_grid());
      os << "kind,spatial\ntrees," << f.size() << "\ngamma," << real(f.gamma()) << '\n';
    } else {
      const Problem pr = load_problem(g, win, forest.points, forest.covariates);
      const auto f = fit_covariate_forest(pr.pattern, *pr.stack, *pr.domain, forest.covariate_options(g.threads), rng);
      save_model(model_out, f);
      if (!predict_grid.empty()) write_raster(fs::path(predict_grid), f.predict_grid(*pr.stack, *pr.domain));
      os << "kind,covariate\ntrees," << f.size() << '\n';
    }
    return kExitOk;
  }
};

struct PredictCmd {
  std::string model;
  std::string covariates;
  std::string points;
  std::string out;

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("predict", "Evaluate a saved model");
    c->add_option("-m,--model", model, "Model file")->required();
    c->add_option("--covariates", covariates, "Covariate directory (covariate models)");
    c->add_option("--points", points, "Predict at these locations (CSV x,y) instead of a grid");
    c->add_option("-o,--out", out, "Output raster, or CSV with --points")->required();
  }

  int run(const Global&, std::ostream& os) const {
    const Model m = load_model(model);
    if (const auto* f = std::get_if<SpatialForest>(&m)) {
      if (points.empty()) {
        write_raster(fs::path(out), f->predict_grid());
      } else {
        std::ostringstream csv;
        csv << "x,y,estimate\n";
        for (const auto& p : read_point_coordinates(points)) {
          const bool inside = f->domain().locate(p.x, p.y).has_value();
          csv << real(p.x) << ',' << real(p.y) << ',' << (inside ? real(f->predict(p.x, p.y)) : "NA") << '\n';
        }
        write_text(out, csv.str());
      }
      os << "kind,spatial\n";
      return kExitOk;
    }
    const auto& f = std::get<CovariateForest>(m);
    if (covariates.empty()) throw UsageError("covariate models need --covariates");
    const CovariateStack stack = read_covariate_dir(covariates);
    if (stack.names() != f.names()) throw DataError("covariate names differ from the ones the model was fitted on");
    if (points.empty()) {
      write_raster(fs::path(out), f.predict_grid(stack, covariate_domain(stack)));
    } else {
      std::ostringstream csv;
      csv << "x,y,estimate\n";
      for (const auto& p : read_point_coordinates(points)) {
        const auto z = stack.values_at(p.x, p.y);
        const bool ok = std::none_of(z.begin(), z.end(), is_na);
        csv << real(p.x) << ',' << real(p.y) << ',' << (ok ? real(f.predict(z)) : "NA") << '\n';
      }
      write_text(out, csv.str());
    }
    os << "kind,covariate\n";
    return kExitOk;
  }
};

struct TuneCmd {
  WindowArgs win;
  ForestArgs forest;
  std::vector<std::size_t> mtry_grid;
  std::vector<std::size_t> n_min_grid;
  std::vector<std::size_t> trees_grid;
  std::vector<double> gamma_grid;
  std::string out;

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("tune", "Grid search by mean out-of-bag score");
    win.add(c);
    forest.add(c);
    c->add_option("--mtry-grid", mtry_grid, "Candidate mtry values")->delimiter(',');
    c->add_option("--n-min-grid", n_min_grid, "Candidate n_min values")->delimiter(',');
    c->add_option("--trees-grid", trees_grid, "Candidate forest sizes")->delimiter(',');
    c->add_option("--gamma-grid", gamma_grid, "Candidate gamma values (spatial mode)")->delimiter(',');
    c->add_option("-o,--out", out, "Score table CSV");
  }

  int run(const Global& g, std::ostream& os) const {
    forest.validate();
    const RngSeed rng = g.rng();
    std::ostringstream csv;
    if (forest.mode == "spatial") {
      if (gamma_grid.empty()) throw UsageError("spatial tuning needs --gamma-grid");
      const Problem pr = load_problem(g, win, forest.points, "");
      const auto t = tune_spatial(pr.pattern, pr.domain, gamma_grid, forest.trees, rng, g.threads);
      csv << "gamma,mean_oob,empty_trees\n";
      for (std::size_t i = 0; i < t.grid.size(); ++i)
        csv << real(t.grid[i]) << ',' << real(t.reports[i].mean_oob) << ',' << t.reports[i].empty_trees << '\n';
      os << "best_gamma," << real(t.grid[t.best]) << '\n';
    } else {
      const Problem pr = load_problem(g, win, forest.points, forest.covariates);
      const auto mt = mtry_grid.empty() ? std::vector<std::size_t>{forest.mtry ? forest.mtry : pr.stack->size()}
                                        : mtry_grid;
      const auto nm = n_min_grid.empty() ? std::vector<std::size_t>{forest.n_min} : n_min_grid;
      const auto ms = trees_grid.empty() ? std::vector<std::size_t>{forest.trees} : trees_grid;
      std::vector<CovariateTuple> grid;
      for (auto a : mt)
        for (auto b : nm)
          for (auto c : ms) grid.push_back({a, b, c});
      const auto t = tune_covariate(pr.pattern, *pr.stack, *pr.domain, grid, rng, forest.a_n, g.threads);
      csv << "mtry,n_min,trees,mean_oob,empty_trees\n";
      for (std::size_t i = 0; i < t.grid.size(); ++i)
        csv << t.grid[i].mtry << ',' << t.grid[i].n_min << ',' << t.grid[i].trees << ','
            << real(t.reports[i].mean_oob) << ',' << t.reports[i].empty_trees << '\n';
      const auto& b = t.grid[t.best];
      os << "best_mtry," << b.mtry << "\nbest_n_min," << b.n_min << "\nbest_trees," << b.trees << '\n';
    }
    if (out.empty())
      os << csv.str();
    else
      write_text(out, csv.str());
    return kExitOk;
  }
};

struct VipCmd {
  WindowArgs win;
  ForestArgs forest;
  std::string model;
  std::size_t reps = 0;
  std::string out;

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("vip", "Variable importance of a covariate forest");
    win.add(c);
    forest.add(c);
    c->add_option("-m,--model", model, "Saved covariate model");
    c->add_option("--reps", reps, "Refit this many times and emit every replication");
    c->add_option("-o,--out", out, "CSV output (default: stdout)");
  }

  int run(const Global& g, std::ostream& os) const {
    std::ostringstream csv;
    if (!model.empty()) {
      if (reps) throw UsageError("--reps refits from data; do not combine it with --model");
      const Model m = load_model(model);
      const auto* f = std::get_if<CovariateForest>(&m);
      if (!f) throw DataError("variable importance needs a covariate model; this is a spatial model");
      const auto vip = variable_importance(*f);
      csv << "covariate,vip\n";
      for (std::size_t k = 0; k < vip.size(); ++k) csv << f->names()[k] << ',' << real(vip[k]) << '\n';
    } else {
      if (forest.mode == "spatial" && forest.covariates.empty())
        throw DataError("variable importance needs covariates");
      ForestArgs fa = forest;
      fa.mode = "covariate";
      fa.validate();
      const Problem pr = load_problem(g, win, fa.points, fa.covariates);
      const RngSeed rng = g.rng();
      const std::size_t r_count = reps ? reps : 1;
      csv << "rep,covariate,vip\n";
      for (std::size_t r = 0; r < r_count; ++r) {
        const auto f =
            fit_covariate_forest(pr.pattern, *pr.stack, *pr.domain, fa.covariate_options(g.threads), rng.child(r));
        const auto vip = variable_importance(f);
        for (std::size_t k = 0; k < vip.size(); ++k) csv << r << ',' << f.names()[k] << ',' << real(vip[k]) << '\n';
      }
    }
    if (out.empty())
      os << csv.str();
    else
      write_text(out, csv.str());
    return kExitOk;
  }
};

struct EvaluateCmd {
  std::string truth;
  std::vector<std::string> estimates;
  // End-to-end replication.
  WindowArgs win;
  std::size_t reps = 0;
  std::size_t p = 15;
  double smoothness = 50.0;
  double target = 1000.0;
  ForestArgs forest;
  std::string out;

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("evaluate", "Integrated errors against a known intensity");
    c->add_option("--truth", truth, "True intensity raster");
    c->add_option("--estimate", estimates, "Estimate raster(s)");
    win.add(c);
    c->add_option("--reps", reps, "Run the surrogate scenario end to end this many times");
    c->add_option("-p,--fields", p, "Surrogate covariate fields");
    c->add_option("--smoothness", smoothness, "Surrogate field bump width");
    c->add_option("--target", target, "Expected number of points");
    forest.add(c);
    c->add_option("-o,--out", out, "CSV output (default: stdout)");
  }

  int run(const Global& g, std::ostream& os) const {
    std::ostringstream csv;
    if (reps == 0) {
      if (truth.empty() || estimates.empty()) throw UsageError("need --truth and --estimate, or --reps");
      const RasterGrid t = read_raster(truth);
      csv << "estimate,mise,miae\n";
      for (const auto& e : estimates) {
        const RasterGrid est = read_raster(e);
        csv << e << ',' << real(mise(est, t)) << ',' << real(miae(est, t)) << '\n';
      }
    } else {
      forest.validate();
      const RngSeed rng = g.rng();
      const auto domain = std::make_shared<const Domain>(win.get(), g.resolution);
      csv << "rep,method,mise,miae\n";
      for (std::size_t r = 0; r < reps; ++r) {
        const RngSeed rep = rng.child(r);
        const auto sc = surrogate_soil_scenario(*domain, p, smoothness, target, rep.child(0));
        const auto pattern = simulate_inhomogeneous_poisson(*domain, sc.model, rep.child(1));
        const auto cf = fit_covariate_forest(pattern, sc.stack, *domain, forest.covariate_options(g.threads),
                                             rep.child(2));
        const auto cg = cf.predict_grid(sc.stack, *domain);
        const auto sf = fit_spatial_forest(pattern, domain, forest.spatial_options(g.threads), rep.child(3));
        const auto sg = sf.predict_grid();
        csv << r << ",covariate," << real(mise(cg, sc.truth)) << ',' << real(miae(cg, sc.truth)) << '\n';
        csv << r << ",spatial," << real(mise(sg, sc.truth)) << ',' << real(miae(sg, sc.truth)) << '\n';
      }
    }
    if (out.empty())
      os << csv.str();
    else
      write_text(out, csv.str());
    return kExitOk;
  }
};

struct InfillCmd {
  WindowArgs win;
  std::string model = "bump";
  double lambda = 100.0;
  std::vector<double> a_grid{1, 4, 16, 64};
  double h0 = 0.25;
  double h_exponent = 0.25;
  std::vector<double> at;
  std::size_t reps = 200;
  std::size_t trees = 50;
  std::string out;

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("study-infill", "Monte Carlo MSE of the spatial forest as a_n grows");
    win.add(c);
    c->add_option("--model", model, "constant | bump")->check(CLI::IsMember({"constant", "bump"}));
    c->add_option("--lambda", lambda, "Base intensity level");
    c->add_option("--a-grid", a_grid, "Increasing a_n values")->delimiter(',');
    c->add_option("--h0", h0, "Bandwidth at a_n = 1");
    c->add_option("--h-exponent", h_exponent, "h = h0 * a_n^(-exponent)");
    c->add_option("--at", at, "Evaluation point x,y (default: window center)")->delimiter(',')->expected(2);
    c->add_option("--reps", reps, "Replications per level");
    c->add_option("-M,--trees", trees, "Trees per forest");
    c->add_option("-o,--out", out, "CSV output (default: stdout)");
  }

  int run(const Global& g, std::ostream& os) const {
    if (!(h0 > 0.0)) throw UsageError("--h0 must be positive");
    const Window w = win.get();
    const Domain d(w, g.resolution);
    const Point x = at.size() == 2 ? Point{at[0], at[1]}
                                   : Point{0.5 * (w.xmin() + w.xmax()), 0.5 * (w.ymin() + w.ymax())};
    IntensityModel m = IntensityModel::constant(lambda);
    if (model == "bump") {
      const double cx = x.x, cy = x.y, s = 0.25 * std::min(w.width(), w.height());
      m = IntensityModel::analytic(
          [=](double u, double v) {
            return lambda * (0.5 + std::exp(-((u - cx) * (u - cx) + (v - cy) * (v - cy)) / (2.0 * s * s)));
          },
          1.5 * lambda);
    }
    InfillOptions o;
    o.trees = trees;
    o.reps = reps;
    o.threads = g.threads;
    const double h0c = h0, e = h_exponent;
    const auto levels = infill_study(m, d, a_grid, [=](double a) { return h0c * std::pow(a, -e); }, x, o, g.rng());
    std::ostringstream csv;
    csv << "a_n,h,gamma,mse,mse_se,mean_estimate,truth\n";
    for (const auto& l : levels)
      csv << real(l.a_n) << ',' << real(l.h) << ',' << real(l.gamma) << ',' << real(l.mse) << ',' << real(l.mse_se)
          << ',' << real(l.mean_estimate) << ',' << real(l.truth) << '\n';
    if (out.empty())
      os << csv.str();
    else
      write_text(out, csv.str());
    return kExitOk;
  }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Random forest intensity estimation for spatial point patterns", "spforest"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML/INI configuration file; flags override it");
  Global g;
  std::uint64_t seed = 0;
  auto* seed_opt = app.add_option("--seed", seed, "Master random seed");
  app.add_option("--threads", g.threads, "Worker threads (0 = all cores)");
  app.add_option("--resolution", g.resolution, "Pixels on the longer window side")->check(CLI::PositiveNumber);

  SimulateCmd simulate;
  TessellateCmd tessellate;
  FitCmd fit;
  PredictCmd predict;
  TuneCmd tune;
  VipCmd vip;
  EvaluateCmd evaluate;
  InfillCmd infill;
  simulate.add(app);
  tessellate.add(app);
  fit.add(app);
  predict.add(app);
  tune.add(app);
  vip.add(app);
  evaluate.add(app);
  infill.add(app);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "ERROR: " << e.what() << '\n';
    return kExitUsage;
  }
  if (seed_opt->count() > 0) g.seed = seed;

  const std::vector<std::pair<std::string, std::function<int()>>> commands{
      {"simulate", [&] { return simulate.run(g, out); }},
      {"tessellate", [&] { return tessellate.run(g, out); }},
      {"fit", [&] { return fit.run(g, out); }},
      {"predict", [&] { return predict.run(g, out); }},
      {"tune", [&] { return tune.run(g, out); }},
      {"vip", [&] { return vip.run(g, out); }},
      {"evaluate", [&] { return evaluate.run(g, out); }},
      {"study-infill", [&] { return infill.run(g, out); }},
  };
  try {
    for (const auto& [name, fn] : commands)
      if (app.got_subcommand(name)) return fn();
  } catch (const UsageError& e) {
    err << "ERROR: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "ERROR: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "ERROR: " << e.what() << '\n';
    return kExitData;
  }
  err << "ERROR: no command given\n";
  return kExitUsage;
}

}  // namespace spforest::cli
