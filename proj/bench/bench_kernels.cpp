#include <benchmark/benchmark.h>

#include "ecdf_bands/bands_multi.hpp"
#include "ecdf_bands/bands_single.hpp"
#include "ecdf_bands/reference.hpp"

using namespace ecdfb;

namespace {

void BM_CoverageSingleReference(benchmark::State& state) {
  const long n = state.range(0);
  const auto grid = default_grid(n);
  for (auto _ : state) benchmark::DoNotOptimize(reference::coverage_single(n, grid, 0.005));
}

void BM_CoverageSingle(benchmark::State& state) {
  const long n = state.range(0);
  const auto grid = default_grid(n);
  const Exec exec = state.range(1) ? Exec::parallel : Exec::serial;
  for (auto _ : state) benchmark::DoNotOptimize(coverage_probability(n, grid, 0.005, exec));
}

void BM_CoverageMultiReference(benchmark::State& state) {
  const long n = state.range(0), chains = state.range(1);
  const auto grid = default_grid(n * chains);
  for (auto _ : state) benchmark::DoNotOptimize(reference::coverage_multi(n, chains, grid, 0.005));
}

void BM_CoverageMulti(benchmark::State& state) {
  const long n = state.range(0), chains = state.range(1);
  const auto grid = default_grid(n * chains);
  const Exec exec = state.range(2) ? Exec::parallel : Exec::serial;
  for (auto _ : state) benchmark::DoNotOptimize(coverage_probability_multi(n, chains, grid, 0.005, exec));
}

void BM_GammaSimulate(benchmark::State& state) {
  const long n = state.range(0);
  const auto grid = default_grid(n);
  const Exec exec = state.range(1) ? Exec::parallel : Exec::serial;
  for (auto _ : state) benchmark::DoNotOptimize(gamma_simulate(n, grid, 0.05, 2000, 1, exec));
}

void BM_GammaOptimize(benchmark::State& state) {
  const long n = state.range(0);
  const auto grid = default_grid(n);
  for (auto _ : state) benchmark::DoNotOptimize(gamma_optimize(n, grid, 0.05));
}

}  // namespace

BENCHMARK(BM_CoverageSingleReference)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CoverageSingle)->ArgsProduct({{100, 1000}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CoverageMultiReference)->Args({50, 2})->Args({20, 3})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CoverageMulti)->ArgsProduct({{50}, {2}, {0, 1}})->Args({20, 3, 0})->Args({20, 3, 1})->Args({100, 3, 1})
    ->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GammaSimulate)->ArgsProduct({{250}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GammaOptimize)->Arg(250)->Arg(1000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
