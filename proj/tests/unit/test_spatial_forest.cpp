#include <gtest/gtest.h>

#include <cmath>

#include "spforest/simulate.hpp"
#include "spforest/spatial_forest.hpp"

using namespace spforest;

namespace {

std::shared_ptr<const Domain> unit_domain(int res = 64) {
  return std::make_shared<const Domain>(Window::rectangle(0, 0, 1, 1), res);
}

double grid_integral(const RasterGrid& g) {
  double s = 0.0;
  for (double v : g.values())
    if (!is_na(v)) s += v;
  return s * g.pixel_area();
}

}  // namespace

TEST(RuleOfThumb, FormulaValue) {
  // 250 copies each of four x values {0, 250, 500, 750}: type-7 quartiles of
  // the 1000 expanded values are 187.5 and 562.5 (IQR 375). The y values are
  // the same ladder scaled to IQR 125, so the mean IQR is 250.
  const Window w = Window::rectangle(0, 0, 1000, 500);
  PointPattern p(w);
  const double xs[4] = {0, 250, 500, 750};
  const double ys[4] = {0, 125.0 / 1.5, 250.0 / 1.5, 375.0 / 1.5};
  for (int i = 0; i < 4; ++i) p.add({xs[i], ys[i]}, 250);
  ASSERT_EQ(p.total_count(), 1000u);
  EXPECT_NEAR(mean_iqr(p), 250.0, 1e-12 * 250.0);
  EXPECT_NEAR(rule_of_thumb_gamma(p), 4e-4, 1e-12 * 4e-4);
}

TEST(RuleOfThumb, WindowScaleExample) {
  // 1000^(2/3) / (4 * 250^2) = 4e-4.
  EXPECT_NEAR(std::pow(1000.0, 2.0 / 3.0) / (4.0 * 250.0 * 250.0), 4e-4, 1e-16);
}

TEST(RuleOfThumb, FallbackSinglePoint) {
  PointPattern p(Window::rectangle(0, 0, 1000, 500), {{10, 10}});
  EXPECT_DOUBLE_EQ(rule_of_thumb_gamma(p), 1.0 / 500000.0);
}

TEST(RuleOfThumb, FallbackCoincidentPoints) {
  PointPattern p(Window::rectangle(0, 0, 1000, 500));
  p.add({10, 10}, 1000);
  EXPECT_NEAR(rule_of_thumb_gamma(p), 100.0 / 500000.0, 1e-15);
}

TEST(RuleOfThumb, EmptyThrows) {
  EXPECT_THROW(rule_of_thumb_gamma(PointPattern(Window::rectangle(0, 0, 1, 1))), std::invalid_argument);
}

TEST(SpatialTree, EmptyPatternGivesZero) {
  const auto d = unit_domain();
  const auto t = fit_spatial_tree(PointPattern(d->window()), *d, 20.0, 1.0, RngSeed{1, 0}, false);
  for (std::size_t p : d->interior_pixels()) EXPECT_EQ(t.pixel_estimate(p), 0.0);
}

TEST(SpatialTree, CountOverArea) {
  GridGeometry g{4, 1, 0, 0, 1};
  Partition part(g, {0, 0, 1, 1});
  SpatialTree t{part, {5.0, 0.0}, 1.0, {}};
  // Pixel area 1, cell 0 has two pixels: 5 / 2.
  EXPECT_DOUBLE_EQ(t.cell_estimate(0), 2.5);
  GridGeometry g2{10, 1, 0, 0, 0.5};
  Partition part2(g2, {0, 0, 0, 0, 0, 0, 0, 0, 0, 0});
  SpatialTree t2{part2, {5.0}, 1.0, {}};
  EXPECT_DOUBLE_EQ(t2.cell_estimate(0), 2.0);  // 5 points on area 2.5
}

TEST(SpatialTree, CountsSumToTotal) {
  const auto d = unit_domain();
  const auto pat = simulate_homogeneous_poisson(d->window(), 200, RngSeed{4, 0});
  const auto t = fit_spatial_tree(pat, *d, 30.0, 1.0, RngSeed{4, 1}, false);
  double s = 0;
  for (double c : t.counts) s += c;
  EXPECT_EQ(s, static_cast<double>(pat.total_count()));
  const auto tb = fit_spatial_tree(pat, *d, 30.0, 1.0, RngSeed{4, 1}, true);
  s = 0;
  for (double c : tb.counts) s += c;
  EXPECT_EQ(s, static_cast<double>(pat.total_count()));
  EXPECT_EQ(tb.multiplicities.size(), pat.size());
}

TEST(SpatialForest, MassConservation) {
  const auto d = unit_domain(96);
  const auto pat = simulate_homogeneous_poisson(d->window(), 300, RngSeed{9, 0});
  SpatialForestOptions o;
  o.trees = 20;
  o.a_n = 2.0;
  const auto f = fit_spatial_forest(pat, d, o, RngSeed{9, 1});
  EXPECT_NEAR(grid_integral(f.predict_grid()), static_cast<double>(pat.total_count()) / 2.0, 1e-9);
  for (const auto& t : f.trees()) {
    double mass = 0;
    for (std::size_t j = 0; j < t.counts.size(); ++j) mass += t.cell_estimate(j) * t.a_n * t.partition.cell_areas()[j];
    EXPECT_NEAR(mass, static_cast<double>(pat.total_count()), 1e-9);
  }
}

TEST(SpatialForest, MeanOfTrees) {
  GridGeometry g{2, 1, 0, 0, 0.5};
  const auto d = std::make_shared<const Domain>(Window::rectangle(0, 0, 1, 0.5), 2);
  ASSERT_TRUE(d->grid() == g);
  Partition part(g, {0, 0});
  std::vector<SpatialTree> trees{{part, {0.5}, 1.0, {}}, {part, {1.5}, 1.0, {}}};  // cell area 0.5
  SpatialForest f(d, trees, 1.0, RngSeed{});
  EXPECT_DOUBLE_EQ(f.predict(0.2, 0.2), 2.0);  // (1 + 3) / 2
  SpatialForest same(d, {trees[0], trees[0], trees[0]}, 1.0, RngSeed{});
  EXPECT_DOUBLE_EQ(same.predict(0.7, 0.1), trees[0].cell_estimate(0));
}

TEST(SpatialForest, OutsideWindowThrows) {
  const auto d = unit_domain(16);
  const auto pat = simulate_homogeneous_poisson(d->window(), 20, RngSeed{1, 0});
  SpatialForestOptions o;
  o.trees = 2;
  const auto f = fit_spatial_forest(pat, d, o, RngSeed{1, 1});
  EXPECT_THROW(f.predict(1.5, 0.5), std::out_of_range);
}

TEST(SpatialForest, MaskedWindowNAOffMask) {
  GridGeometry g{32, 32, 0, 0, 1.0 / 32};
  RasterGrid m(g, 1.0);
  for (std::size_t r = 8; r < 24; ++r)
    for (std::size_t c = 8; c < 24; ++c) m[g.index(r, c)] = 0.0;
  const auto d = std::make_shared<const Domain>(Window::masked(m));
  const auto pat = simulate_homogeneous_poisson(d->window(), 100, RngSeed{2, 0});
  SpatialForestOptions o;
  o.trees = 10;
  const auto f = fit_spatial_forest(pat, d, o, RngSeed{2, 1});
  const auto grid = f.predict_grid();
  for (std::size_t p = 0; p < g.size(); ++p) {
    if (d->interior(p))
      EXPECT_TRUE(std::isfinite(grid[p]));
    else
      EXPECT_TRUE(is_na(grid[p]));
  }
  EXPECT_NEAR(grid_integral(grid), static_cast<double>(pat.total_count()), 1e-9);
}

TEST(SpatialForest, ThreadCountIndependent) {
  const auto d = unit_domain(48);
  const auto pat = simulate_homogeneous_poisson(d->window(), 100, RngSeed{3, 0});
  SpatialForestOptions o;
  o.trees = 8;
  o.bootstrap = true;
  o.threads = 1;
  const auto a = fit_spatial_forest(pat, d, o, RngSeed{3, 1}).predict_grid();
  o.threads = 4;
  const auto b = fit_spatial_forest(pat, d, o, RngSeed{3, 1}).predict_grid();
  for (std::size_t i = 0; i < a.size(); ++i) ASSERT_EQ(a[i], b[i]);
}

TEST(SpatialForest, PointPathMatchesFullPath) {
  const auto d = unit_domain(64);
  const auto pat = simulate_homogeneous_poisson(d->window(), 150, RngSeed{5, 0});
  SpatialForestOptions o;
  o.trees = 12;
  o.gamma = 25.0;
  const auto f = fit_spatial_forest(pat, d, o, RngSeed{5, 1});
  const PixelCounts pc(*d, pat);
  for (const Point x : {Point{0.5, 0.5}, Point{0.01, 0.99}, Point{0.73, 0.2}}) {
    EXPECT_DOUBLE_EQ(spatial_forest_estimate_at(pc, *d, 25.0, 1.0, 12, x, RngSeed{5, 1}), f.predict(x.x, x.y));
  }
}

TEST(SpatialForest, TessellationVarianceShrinksWithM) {
  // Fixed pattern: the remaining randomness is the tessellations, whose
  // variance scales as 1/M.
  const auto d = unit_domain(64);
  const auto pat = simulate_homogeneous_poisson(d->window(), 100.0, RngSeed{123, 0});
  const PixelCounts pc(*d, pat);
  const std::size_t reps = 60;
  const Point x{0.5, 0.5};
  std::vector<double> var;
  for (std::size_t m : {1u, 10u, 100u}) {
    double s = 0, s2 = 0;
    for (std::size_t r = 0; r < reps; ++r) {
      const double e = spatial_forest_estimate_at(pc, *d, 10.0, 1.0, m, x, RngSeed{124, r});
      s += e;
      s2 += e * e;
    }
    const double mean = s / reps;
    var.push_back((s2 - reps * mean * mean) / (reps - 1));
  }
  EXPECT_GT(var[0], 2.0 * var[1]);
  EXPECT_GT(var[1], 2.0 * var[2]);
}

TEST(Bootstrap, DrawsTotalCount) {
  PointPattern p(Window::rectangle(0, 0, 1, 1));
  p.add({0.1, 0.1}, 3);
  p.add({0.5, 0.5}, 1);
  auto eng = RngSeed{1, 1}.engine();
  const auto m = bootstrap_multiplicities(p, eng);
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m[0] + m[1], 4u);
}
