#include <gtest/gtest.h>

#include <cmath>

#include "spforest/scoring.hpp"

using namespace spforest;

TEST(Lcv, SingleCellOnePoint) {
  const std::vector<double> n{1}, a{1};
  EXPECT_EQ(lcv(n, a), -1.0);
}

TEST(Lcv, SingleCellThreePoints) {
  const std::vector<double> n{3}, a{1};
  EXPECT_NEAR(lcv(n, a), 3.0 * std::log(2.0) - 3.0, 1e-12);
  EXPECT_NEAR(lcv(n, a), -0.920558, 1e-6);
}

TEST(Lcv, TwoCells) {
  const std::vector<double> n{3, 2}, a{1, 2};
  EXPECT_NEAR(lcv(n, a), -4.306853, 1e-6);
  EXPECT_NEAR(lcv(n, a), (3.0 * std::log(2.0) - 3.0) + (2.0 * std::log(0.5) - 2.0), 1e-12);
}

TEST(Lcv, AdditiveAndEmptyCellsContributeZero) {
  const std::vector<double> n{0, 5, 7}, a{0.3, 1.1, 2.5};
  double sum = 0;
  for (std::size_t j = 0; j < n.size(); ++j) {
    const std::vector<double> nj{n[j]}, aj{a[j]};
    sum += lcv(nj, aj);
  }
  EXPECT_NEAR(lcv(n, a), sum, 1e-12);
  const std::vector<double> z{0}, za{4};
  EXPECT_EQ(lcv(z, za), 0.0);
}

TEST(Lcv, RejectsNonPositiveArea) {
  const std::vector<double> n{1}, a{0};
  EXPECT_THROW(lcv(n, a), std::invalid_argument);
}

namespace {

// One leaf of area 1 on a 2x1 window with two pixels.
struct TinyCase {
  Domain domain{Window::rectangle(0, 0, 2, 1), 2};
  PointPattern pattern{domain.window(), {{0.5, 0.5}, {1.5, 0.5}}};
};

SpatialTree two_cell_tree(const Domain& d, std::vector<double> counts, std::vector<std::uint32_t> mult) {
  return SpatialTree{Partition(d.grid(), {0, 1}), std::move(counts), 1.0, std::move(mult)};
}

}  // namespace

TEST(Oob, AllInBagIsFlaggedZero) {
  TinyCase c;
  const auto t = two_cell_tree(c.domain, {1, 1}, {1, 1});
  const auto s = oob_score_tree(t, c.pattern, c.domain, oob_floor(c.pattern));
  EXPECT_EQ(s.score, 0.0);
  EXPECT_TRUE(s.empty);
}

TEST(Oob, SingleOutOfBagPoint) {
  TinyCase c;
  const auto t = two_cell_tree(c.domain, {2, 0}, {2, 0});
  // Point 1 is out of bag and falls in the empty cell: floored.
  const double floor = oob_floor(c.pattern);
  EXPECT_DOUBLE_EQ(floor, 1e-6 * 2.0 / 2.0);
  const auto s = oob_score_tree(t, c.pattern, c.domain, floor);
  EXPECT_FALSE(s.empty);
  EXPECT_EQ(s.oob_points, 1u);
  EXPECT_DOUBLE_EQ(s.score, std::log(floor));
  const auto t2 = two_cell_tree(c.domain, {0, 2}, {0, 2});
  EXPECT_DOUBLE_EQ(oob_score_tree(t2, c.pattern, c.domain, floor).score, std::log(0.0 + floor));
  const auto t3 = two_cell_tree(c.domain, {0, 2}, {2, 0});
  EXPECT_DOUBLE_EQ(oob_score_tree(t3, c.pattern, c.domain, floor).score, std::log(2.0));
}

TEST(Oob, ForestAverages) {
  TinyCase c;
  auto d = std::make_shared<const Domain>(c.domain);
  // Scores log(2) and log(4) via the cell holding the out-of-bag point 0.
  std::vector<SpatialTree> trees{two_cell_tree(c.domain, {2, 0}, {0, 2}), two_cell_tree(c.domain, {4, 0}, {0, 4})};
  SpatialForest f(d, trees, 1.0, RngSeed{});
  const auto r = oob_score_forest(f, c.pattern, 1e-9);
  ASSERT_EQ(r.tree_scores.size(), 2u);
  EXPECT_DOUBLE_EQ(r.mean_oob, 0.5 * (std::log(2.0) + std::log(4.0)));
  SpatialForest one(d, {trees[0]}, 1.0, RngSeed{});
  EXPECT_DOUBLE_EQ(oob_score_forest(one, c.pattern, 1e-9).mean_oob, std::log(2.0));
}

TEST(Oob, RequiresBootstrapRecord) {
  TinyCase c;
  const auto t = two_cell_tree(c.domain, {1, 1}, {});
  EXPECT_THROW(oob_score_tree(t, c.pattern, c.domain, 1e-6), std::invalid_argument);
}

TEST(Oob, FiniteForFittedForests) {
  const auto d = std::make_shared<const Domain>(Window::rectangle(0, 0, 1, 1), 32);
  const auto pat = simulate_homogeneous_poisson(d->window(), 30, RngSeed{1, 0});
  SpatialForestOptions o;
  o.trees = 10;
  o.gamma = 400.0;  // many empty cells
  o.bootstrap = true;
  const auto f = fit_spatial_forest(pat, d, o, RngSeed{1, 1});
  const auto r = oob_score_forest(f, pat, oob_floor(pat));
  for (double s : r.tree_scores) EXPECT_TRUE(std::isfinite(s));
}

TEST(ArgmaxFirst, TiesGoFirst) {
  const std::vector<double> v{1.0, 3.0, 3.0, 2.0};
  EXPECT_EQ(argmax_first(v), 1u);
  EXPECT_THROW(argmax_first(std::vector<double>{}), std::invalid_argument);
}

namespace {

struct TuneCase {
  Domain domain{Window::rectangle(0, 0, 100, 50), 32};
  CovariateStack stack;
  PointPattern pattern{domain.window()};
  TuneCase() {
    stack = synthetic_covariates(domain, 4, 20.0, RngSeed{3, 0});
    RasterGrid shape(domain.grid(), 0.0);
    for (std::size_t p = 0; p < shape.size(); ++p) shape[p] = 0.1 * std::exp(2.0 * stack.grid(0)[p]);
    pattern = simulate_inhomogeneous_poisson(domain, IntensityModel::from_grid(shape), RngSeed{3, 1});
  }
};

}  // namespace

TEST(Tune, SingleTuple) {
  TuneCase c;
  const auto t = tune_covariate(c.pattern, c.stack, c.domain, {{2, 10, 5}}, RngSeed{1, 0});
  EXPECT_EQ(t.best, 0u);
  EXPECT_EQ(t.reports.size(), 1u);
}

TEST(Tune, DuplicateFirstWins) {
  TuneCase c;
  // Identical tuples at positions 0 and 1 get different seeds; put a copy of
  // the first at position 1 with the same seed by tuning twice.
  const std::vector<CovariateTuple> grid{{2, 10, 5}, {2, 10, 5}};
  const auto t = tune_covariate(c.pattern, c.stack, c.domain, grid, RngSeed{1, 0});
  const double m0 = t.reports[0].mean_oob, m1 = t.reports[1].mean_oob;
  EXPECT_EQ(t.best, m1 > m0 ? 1u : 0u);
  // Exact ties resolve to the first entry.
  std::vector<double> tied{m0, m0};
  EXPECT_EQ(argmax_first(tied), 0u);
}

TEST(Tune, Deterministic) {
  TuneCase c;
  const std::vector<CovariateTuple> grid{{1, 5, 4}, {4, 20, 4}};
  const auto a = tune_covariate(c.pattern, c.stack, c.domain, grid, RngSeed{2, 0});
  const auto b = tune_covariate(c.pattern, c.stack, c.domain, grid, RngSeed{2, 0}, 1.0, 1);
  EXPECT_EQ(a.best, b.best);
  for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_EQ(a.reports[i].tree_scores, b.reports[i].tree_scores);
  EXPECT_THROW(tune_covariate(c.pattern, c.stack, c.domain, {}, RngSeed{}), std::invalid_argument);
}

TEST(Tune, SpatialGrid) {
  const auto d = std::make_shared<const Domain>(Window::rectangle(0, 0, 1, 1), 32);
  const auto pat = simulate_homogeneous_poisson(d->window(), 100, RngSeed{4, 0});
  const auto t = tune_spatial(pat, d, {5.0, 20.0, 80.0}, 5, RngSeed{4, 1});
  EXPECT_EQ(t.reports.size(), 3u);
  std::vector<double> m;
  for (const auto& r : t.reports) m.push_back(r.mean_oob);
  EXPECT_EQ(t.best, argmax_first(m));
}

TEST(Mise, IdenticalIsZero) {
  RasterGrid a(GridGeometry{3, 2, 0, 0, 0.5}, std::vector<double>{1, 2, kNA, 4, 5, 6});
  EXPECT_EQ(mise(a, a), 0.0);
  EXPECT_EQ(miae(a, a), 0.0);
}

TEST(Mise, ConstantOffset) {
  GridGeometry g{4, 2, 0, 0, 0.5};  // area 2
  RasterGrid t(g, 3.0), e(g, 3.0 - 0.25);
  EXPECT_DOUBLE_EQ(mise(e, t), 0.0625 * 2.0);
  EXPECT_DOUBLE_EQ(miae(e, t), 0.25 * 2.0);
}

TEST(Mise, ZeroEstimateOnUnitSquare) {
  GridGeometry g{8, 8, 0, 0, 0.125};
  RasterGrid t(g, 7.0), e(g, 0.0);
  EXPECT_DOUBLE_EQ(mise(e, t), 49.0);
}

TEST(Mise, GeometryMismatchThrows) {
  RasterGrid a(GridGeometry{2, 2, 0, 0, 1}, 1.0), b(GridGeometry{2, 2, 0, 0, 0.5}, 1.0);
  EXPECT_THROW(mise(a, b), DataError);
  RasterGrid c(GridGeometry{2, 2, 0, 0, 1}, std::vector<double>{1, kNA, 1, 1});
  EXPECT_THROW(mise(c, a), DataError);
  EXPECT_NO_THROW(mise(a, c));
}

TEST(Spearman, KnownValues) {
  const std::vector<double> a{1, 2, 3, 4}, b{10, 20, 30, 40}, c{4, 3, 2, 1};
  EXPECT_DOUBLE_EQ(spearman(a, b), 1.0);
  EXPECT_DOUBLE_EQ(spearman(a, c), -1.0);
  const std::vector<double> t{1, 2, 2, 3}, u{1, 3, 2, 4};
  // Ranks t: 1, 2.5, 2.5, 4; u: 1, 3, 2, 4.
  EXPECT_NEAR(spearman(t, u), 4.5 / std::sqrt(4.5 * 5.0), 1e-12);
}

TEST(InfillStudy, ConstantIntensityVarianceDecreases) {
  const Domain d(Window::rectangle(0, 0, 1, 1), 32);
  InfillOptions o;
  o.trees = 5;
  o.reps = 60;
  const auto levels = infill_study(IntensityModel::constant(50.0), d, {1.0, 16.0}, [](double) { return 0.25; },
                                   {0.5, 0.5}, o, RngSeed{7, 0});
  ASSERT_EQ(levels.size(), 2u);
  EXPECT_GT(levels[0].mse, levels[1].mse);
  EXPECT_DOUBLE_EQ(levels[1].gamma, 16.0);
}

TEST(InfillStudy, DegenerateSingleCellIsSquaredBias) {
  // gamma -> 0: every tree is one cell, estimate = N / (a_n |W|); with a
  // ramp intensity the window mean is 5 and the truth at x = (0.9, 0.5) is 9.
  const Domain d(Window::rectangle(0, 0, 1, 1), 16);
  const auto model = IntensityModel::analytic([](double x, double) { return 10.0 * x; }, 10.0);
  InfillOptions o;
  o.trees = 1;
  o.reps = 200;
  const auto levels =
      infill_study(model, d, {1000.0}, [](double) { return 1e4; }, {0.90625, 0.5}, o, RngSeed{8, 0});
  EXPECT_NEAR(levels[0].mse, (9.0625 - 5.0) * (9.0625 - 5.0), 0.1);
}

TEST(InfillStudy, RejectsNonIncreasingGrid) {
  const Domain d(Window::rectangle(0, 0, 1, 1), 8);
  EXPECT_THROW(infill_study(IntensityModel::constant(1.0), d, {4.0, 1.0}, [](double) { return 1.0; }, {0.5, 0.5},
                            {}, RngSeed{}),
               std::invalid_argument);
}
