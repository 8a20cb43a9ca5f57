#include <benchmark/benchmark.h>

#include "spforest/covariate_forest.hpp"
#include "spforest/simulate.hpp"
#include "spforest/spatial_forest.hpp"
#include "spforest/tessellation.hpp"

using namespace spforest;

namespace {

struct SoilFixture {
  Domain domain{Window::rectangle(0, 0, 1000, 500), 256};
  SurrogateScenario scenario = surrogate_soil_scenario(domain, 15, 50.0, 1000.0, RngSeed{1, 0});
  PointPattern pattern = simulate_inhomogeneous_poisson(domain, scenario.model, RngSeed{1, 1});
};

const SoilFixture& soil() {
  static const SoilFixture f;
  return f;
}

}  // namespace

static void BM_CovariateTree(benchmark::State& state) {
  const auto& f = soil();
  const auto mtry = static_cast<std::size_t>(state.range(0));
  std::uint64_t i = 0;
  for (auto _ : state) {
    auto t = fit_covariate_tree(f.pattern, f.scenario.stack, f.domain, mtry, 10, 1.0, RngSeed{2, i++});
    benchmark::DoNotOptimize(t);
  }
  state.counters["points"] = static_cast<double>(f.pattern.total_count());
}
BENCHMARK(BM_CovariateTree)->Arg(4)->Arg(15)->Unit(benchmark::kMillisecond);

static void BM_SpatialTree(benchmark::State& state) {
  const auto& f = soil();
  const double gamma = rule_of_thumb_gamma(f.pattern);
  std::uint64_t i = 0;
  for (auto _ : state) {
    auto t = fit_spatial_tree(f.pattern, f.domain, gamma, 1.0, RngSeed{3, i++}, false);
    benchmark::DoNotOptimize(t);
  }
}
BENCHMARK(BM_SpatialTree)->Unit(benchmark::kMillisecond);

static void BM_VoronoiPartition(benchmark::State& state) {
  const Domain d(Window::rectangle(0, 0, 1, 1), static_cast<int>(state.range(0)));
  std::uint64_t i = 0;
  for (auto _ : state) {
    auto p = poisson_voronoi_partition(d, 100.0, RngSeed{4, i++});
    benchmark::DoNotOptimize(p);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(d.interior_count()));
}
BENCHMARK(BM_VoronoiPartition)->Arg(128)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

static void BM_ZeroCell(benchmark::State& state) {
  const Domain d(Window::rectangle(0, 0, 20, 20), 512);
  const auto px = *d.locate(10.0, 10.0);
  std::uint64_t i = 0;
  for (auto _ : state) {
    const auto nuclei = draw_voronoi_nuclei(d, 1.0, RngSeed{5, i++}, {});
    auto cell = zero_cell_pixels(d, nuclei, px);
    benchmark::DoNotOptimize(cell);
  }
}
BENCHMARK(BM_ZeroCell)->Unit(benchmark::kMicrosecond);

static void BM_CovariatePredictGrid(benchmark::State& state) {
  const auto& f = soil();
  CovariateForestOptions o;
  o.trees = 20;
  o.mtry = 5;
  const auto forest = fit_covariate_forest(f.pattern, f.scenario.stack, f.domain, o, RngSeed{6, 0});
  for (auto _ : state) {
    auto g = forest.predict_grid(f.scenario.stack, f.domain);
    benchmark::DoNotOptimize(g);
  }
}
BENCHMARK(BM_CovariatePredictGrid)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
