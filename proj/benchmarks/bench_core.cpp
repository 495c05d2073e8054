#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "nctails/matrix.hpp"
#include "nctails/sampling.hpp"
#include "nctails/sequences.hpp"
#include "nctails/series.hpp"

using namespace nctails;

static void BM_K12Exact(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<double> a(n);
  for (std::size_t i = 0; i < n; ++i) a[i] = 1.0 / std::sqrt(static_cast<double>(i + 1));
  for (auto _ : state) benchmark::DoNotOptimize(k12_exact(a, 3.0));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_K12Exact)->RangeMultiplier(8)->Range(8, 1 << 15)->Complexity();

static void BM_SingularValues(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  RngSubstream s(1, {d});
  const Matrix g = gaussian_matrix(d, s);
  for (auto _ : state) benchmark::DoNotOptimize(singular_values(g));
}
BENCHMARK(BM_SingularValues)->RangeMultiplier(2)->Range(2, 64);

static void BM_HaarOrthogonal(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  RngSubstream s(2, {d});
  for (auto _ : state) benchmark::DoNotOptimize(haar_orthogonal(d, s));
}
BENCHMARK(BM_HaarOrthogonal)->RangeMultiplier(2)->Range(1, 64);

// Per-trial cost of the epsilon series on a single block of dimension d.
static void BM_MonteCarloEpsilon(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const SeriesModel model({BlockSpec::from_singular_values(d, std::vector<double>(d, 1.0))});
  const std::size_t trials = 1000;
  for (auto _ : state) benchmark::DoNotOptimize(monte_carlo(model, SeriesKind::epsilon(), trials, 3, 1));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * trials));
}
BENCHMARK(BM_MonteCarloEpsilon)->Arg(1)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond);

static void BM_MonteCarloGaussTrunc(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const SeriesModel model({BlockSpec::from_singular_values(d, std::vector<double>(d, 1.0))});
  const std::size_t trials = 1000;
  for (auto _ : state) benchmark::DoNotOptimize(monte_carlo(model, SeriesKind::gauss_trunc(4.0), trials, 3, 1));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * trials));
}
BENCHMARK(BM_MonteCarloGaussTrunc)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
