#include <gtest/gtest.h>

#include <cmath>
#include <queue>
#include <random>
#include <set>

#include "spforest/tessellation.hpp"

using namespace spforest;

namespace {

// Brute-force nearest nucleus, lowest index on ties.
std::size_t brute_nearest(std::span<const Point> nuclei, double x, double y) {
  std::size_t best = 0;
  double bd = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < nuclei.size(); ++i) {
    const double d = (nuclei[i].x - x) * (nuclei[i].x - x) + (nuclei[i].y - y) * (nuclei[i].y - y);
    if (d < bd) {
      bd = d;
      best = i;
    }
  }
  return best;
}

// Validity: every interior pixel labeled, ids contiguous, areas sum to |W|.
void expect_valid(const Partition& part, const Domain& d) {
  std::set<std::int32_t> ids;
  for (std::size_t p = 0; p < d.grid().size(); ++p) {
    if (d.interior(p)) {
      ASSERT_GE(part.label(p), 0);
      ids.insert(part.label(p));
    } else {
      ASSERT_EQ(part.label(p), Partition::kOutside);
    }
  }
  ASSERT_EQ(ids.size(), part.cell_count());
  EXPECT_EQ(*ids.rbegin(), static_cast<std::int32_t>(part.cell_count()) - 1);
  for (double a : part.cell_areas()) EXPECT_GT(a, 0.0);
  EXPECT_EQ(part.total_area(), d.area());
}

// Each cell is a single 4-connected component (flood-fill oracle).
void expect_connected(const Partition& part) {
  const auto& g = part.grid();
  std::vector<int> seen(g.size(), 0);
  std::vector<int> components(part.cell_count(), 0);
  for (std::size_t s = 0; s < g.size(); ++s) {
    if (part.label(s) < 0 || seen[s]) continue;
    ++components[static_cast<std::size_t>(part.label(s))];
    std::queue<std::size_t> q;
    q.push(s);
    seen[s] = 1;
    while (!q.empty()) {
      const auto p = q.front();
      q.pop();
      const auto r = g.row_of(p), c = g.col_of(p);
      const std::size_t nb[4] = {r > 0 ? p - g.ncols : p, r + 1 < g.nrows ? p + g.ncols : p, c > 0 ? p - 1 : p,
                                 c + 1 < g.ncols ? p + 1 : p};
      for (auto n : nb)
        if (!seen[n] && part.label(n) == part.label(s)) {
          seen[n] = 1;
          q.push(n);
        }
    }
  }
  for (int c : components) EXPECT_EQ(c, 1);
}

RasterGrid ring_mask() {
  // 40x40 lattice with a vertical wall splitting most of the square.
  GridGeometry g{40, 40, 0, 0, 0.25};
  RasterGrid m(g, 1.0);
  for (std::size_t r = 0; r < 36; ++r) m[g.index(r, 20)] = 0.0;
  return m;
}

}  // namespace

TEST(Partition, RejectsNonContiguousIds) {
  GridGeometry g{2, 1, 0, 0, 1};
  EXPECT_THROW(Partition(g, {0, 2}), std::invalid_argument);
  EXPECT_THROW(Partition(g, {0}), std::invalid_argument);
}

TEST(Partition, RasterRoundTrip) {
  GridGeometry g{3, 1, 0, 0, 1};
  Partition p(g, {1, Partition::kOutside, 0});
  const auto back = Partition::from_raster(p.to_raster());
  EXPECT_EQ(back.label(0), 1);
  EXPECT_EQ(back.label(1), Partition::kOutside);
  EXPECT_EQ(back.cell_count(), 2u);
  EXPECT_DOUBLE_EQ(back.cell_areas()[0], 1.0);
}

TEST(NucleusIndex, MatchesBruteForce) {
  std::mt19937_64 eng(5);
  std::uniform_real_distribution<double> u(-1.0, 11.0);
  std::vector<Point> nuclei(300);
  for (auto& n : nuclei) n = {u(eng), u(eng)};
  const NucleusIndex idx(nuclei, -1, -1, 11, 11);
  for (int q = 0; q < 5000; ++q) {
    const double x = u(eng), y = u(eng);
    ASSERT_EQ(idx.nearest(x, y), brute_nearest(nuclei, x, y));
  }
}

TEST(NucleusIndex, TieGoesToLowestIndex) {
  const NucleusIndex idx({{2, 0}, {0, 0}, {1, 1}}, -1, -1, 3, 3);
  EXPECT_EQ(idx.nearest(1.0, 0.0), 0u);  // equidistant from nuclei 0 and 1
}

TEST(Voronoi, ValidAndConnected) {
  const Domain d(Window::rectangle(0, 0, 2, 1), 128);
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto part = poisson_voronoi_partition(d, 40.0, RngSeed{3, s});
    expect_valid(part, d);
    expect_connected(part);
  }
}

TEST(Voronoi, LabelsMatchNearestNucleus) {
  const Domain d(Window::rectangle(0, 0, 1, 1), 64);
  const RngSeed rng{12, 4};
  const auto part = poisson_voronoi_partition(d, 30.0, rng);
  const auto nuclei = draw_voronoi_nuclei(d, 30.0, rng, {});
  // Pixels in one cell share a nearest nucleus; that nucleus never owns
  // pixels of another cell unless the cell was split into components.
  std::vector<std::size_t> owner(part.cell_count(), SIZE_MAX);
  for (std::size_t p : d.interior_pixels()) {
    const Point c = d.grid().center(p);
    const std::size_t n = brute_nearest(nuclei.nuclei(), c.x, c.y);
    auto& o = owner[static_cast<std::size_t>(part.label(p))];
    if (o == SIZE_MAX) o = n;
    ASSERT_EQ(o, n);
  }
}

TEST(Voronoi, DisconnectedPiecesBecomeCells) {
  const Domain d(Window::masked(ring_mask()));
  std::size_t split_seen = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const RngSeed rng{77, s};
    const auto part = poisson_voronoi_partition(d, 1.0, rng);
    expect_valid(part, d);
    expect_connected(part);
    const auto nuclei = draw_voronoi_nuclei(d, 1.0, rng, {});
    std::set<std::size_t> owners;
    for (std::size_t p : d.interior_pixels()) {
      const Point c = d.grid().center(p);
      owners.insert(nuclei.nearest(c.x, c.y));
    }
    if (part.cell_count() > owners.size()) ++split_seen;
  }
  EXPECT_GT(split_seen, 0u);
}

TEST(Voronoi, TinyGammaGivesOneCell) {
  const Domain d(Window::rectangle(0, 0, 1, 1), 32);
  std::size_t single = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto part = poisson_voronoi_partition(d, 1e-6, RngSeed{1, s});
    single += part.cell_count() == 1;
    if (part.cell_count() == 1) EXPECT_EQ(part.cell_areas()[0], window_area(d.window()));
  }
  EXPECT_EQ(single, 20u);
}

TEST(Voronoi, FallbackNucleusFlagged) {
  const Domain d(Window::rectangle(0, 0, 1, 1), 16);
  bool any_fallback = false;
  // Without the margin the nucleus window is W itself: P(no nucleus) = e^{-0.5}.
  VoronoiOptions tight;
  tight.margin_factor = 0.0;
  for (std::uint64_t s = 0; s < 50 && !any_fallback; ++s) {
    bool fb = false;
    const auto nuclei = draw_voronoi_nuclei(d, 0.5, RngSeed{2, s}, tight, &fb);
    if (fb) {
      EXPECT_EQ(nuclei.nuclei().size(), 1u);
      any_fallback = true;
    }
  }
  EXPECT_TRUE(any_fallback);
}

TEST(Voronoi, Deterministic) {
  const Domain d(Window::rectangle(0, 0, 1, 1), 64);
  const auto a = poisson_voronoi_partition(d, 50.0, RngSeed{8, 8});
  const auto b = poisson_voronoi_partition(d, 50.0, RngSeed{8, 8});
  ASSERT_EQ(a.labels().size(), b.labels().size());
  EXPECT_TRUE(std::equal(a.labels().begin(), a.labels().end(), b.labels().begin()));
}

TEST(Voronoi, MeanCellCount) {
  // Nuclei with pixels in W cover gamma * |W| on average, plus boundary cells
  // whose nucleus lies outside; at gamma = 100 on the unit square the mean
  // cell count sits between gamma|W| and gamma|W| + perimeter term.
  const Domain d(Window::rectangle(0, 0, 1, 1), 128);
  const std::size_t reps = 200;
  double sum = 0.0, inside = 0.0;
  for (std::size_t r = 0; r < reps; ++r) {
    const RngSeed rng{99, r};
    sum += static_cast<double>(poisson_voronoi_partition(d, 100.0, rng).cell_count());
    const auto nuclei = draw_voronoi_nuclei(d, 100.0, rng, {});
    for (const auto& n : nuclei.nuclei()) inside += n.x >= 0 && n.x <= 1 && n.y >= 0 && n.y <= 1;
  }
  EXPECT_NEAR(inside / reps, 100.0, 4.0 * std::sqrt(100.0 / reps));
  EXPECT_GT(sum / reps, 100.0);
  EXPECT_LT(sum / reps, 140.0);
}

TEST(Voronoi, CellOf) {
  const Domain d(Window::rectangle(0, 0, 1, 1), 64);
  const auto part = poisson_voronoi_partition(d, 20.0, RngSeed{4, 2});
  EXPECT_FALSE(part.cell_of(1.5, 0.5).has_value());
  for (std::size_t p : d.interior_pixels()) {
    const Point c = d.grid().center(p);
    ASSERT_EQ(*part.cell_of(c.x, c.y), static_cast<std::size_t>(part.label(p)));
  }
}

TEST(ZeroCell, MatchesFullPartition) {
  const Domain d(Window::masked(ring_mask()));
  for (std::uint64_t s = 0; s < 10; ++s) {
    const RngSeed rng{21, s};
    const auto part = poisson_voronoi_partition(d, 3.0, rng);
    const auto nuclei = draw_voronoi_nuclei(d, 3.0, rng, {});
    for (std::size_t k = 0; k < d.interior_count(); k += 97) {
      const std::size_t seed = d.interior_pixels()[k];
      const auto cell = zero_cell_pixels(d, nuclei, seed);
      std::vector<std::size_t> expected;
      for (std::size_t p = 0; p < d.grid().size(); ++p)
        if (part.label(p) == part.label(seed)) expected.push_back(p);
      ASSERT_EQ(cell, expected);
    }
  }
}

TEST(Diameter, SimpleSets) {
  GridGeometry g{10, 10, 0, 0, 1};
  const std::vector<std::size_t> one{g.index(3, 3)};
  EXPECT_EQ(pixel_set_diameter(g, one), 0.0);
  const std::vector<std::size_t> corners{g.index(0, 0), g.index(9, 9), g.index(4, 5)};
  EXPECT_DOUBLE_EQ(pixel_set_diameter(g, corners), std::sqrt(2.0) * 9.0);
}

TEST(Diameter, MatchesBruteForce) {
  GridGeometry g{30, 20, 0, 0, 0.5};
  std::mt19937_64 eng(3);
  std::uniform_int_distribution<std::size_t> pick(0, g.size() - 1);
  for (int t = 0; t < 50; ++t) {
    std::set<std::size_t> s;
    const int n = 1 + t * 3;
    while (static_cast<int>(s.size()) < n) s.insert(pick(eng));
    std::vector<std::size_t> v(s.begin(), s.end());
    double best = 0.0;
    for (auto a : v)
      for (auto b : v) {
        const Point pa = g.center(a), pb = g.center(b);
        best = std::max(best, std::hypot(pa.x - pb.x, pa.y - pb.y));
      }
    ASSERT_NEAR(pixel_set_diameter(g, v), best, 1e-12);
  }
}

TEST(ZeroCellStatistics, SingleCellWindow) {
  const Domain d(Window::rectangle(0, 0, 2, 1), 32);
  const auto st = zero_cell_statistics(d, 1e-7, {1.0, 0.5}, 10, RngSeed{1, 0});
  EXPECT_DOUBLE_EQ(st.mean_inverse_area, 1.0 / 2.0);
  EXPECT_EQ(st.reps, 10u);
}

TEST(ZeroCellStatistics, OutsideThrows) {
  const Domain d(Window::rectangle(0, 0, 1, 1), 8);
  EXPECT_THROW(zero_cell_statistics(d, 1.0, {2.0, 0.5}, 2, RngSeed{}), std::invalid_argument);
}
