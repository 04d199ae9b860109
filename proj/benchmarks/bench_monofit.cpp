#include <benchmark/benchmark.h>

#include "monofit/harness.hpp"
#include "monofit/monotone.hpp"
#include "monofit/unity.hpp"

using namespace monofit;

static void BM_BuildTau(benchmark::State& state) {
  const ChebPartition part(static_cast<int>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(build_tau(part, part.n() / 2, 4.0, 9.0, Profile::practical));
}
BENCHMARK(BM_BuildTau)->Arg(16)->Arg(64)->Arg(256)->Unit(benchmark::kMicrosecond);

static void BM_EvaluateTau(benchmark::State& state) {
  const ChebPartition part(static_cast<int>(state.range(0)));
  const IndicatorPtr tau = build_tau(part, part.n() / 2, 4.0, 9.0, Profile::practical);
  double x = -1.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(tau->value(x));
    x = x > 0.999 ? -1.0 : x + 1e-3;
  }
}
BENCHMARK(BM_EvaluateTau)->Arg(16)->Arg(64)->Arg(256);

static void BM_SimultaneousApproximant(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto basis = std::make_shared<UnityBasis>(n, 4 * n, 4.0, 9.0, Profile::practical);
  const Spline s = random_monotone_spline(ChebPartition(n), 3, 7);
  for (auto _ : state) {
    const auto d = simultaneous_approximant(s, basis);
    benchmark::DoNotOptimize(d->value(0.3));
  }
}
BENCHMARK(BM_SimultaneousApproximant)->Arg(8)->Arg(24)->Unit(benchmark::kMicrosecond);

static void BM_BkMax(benchmark::State& state) {
  const Spline s = random_monotone_spline(ChebPartition(static_cast<int>(state.range(0))), 3, 7);
  const Majorant phi = Majorant::power(3, 1.0, 3);
  for (auto _ : state) benchmark::DoNotOptimize(b_k_max(s, phi));
}
BENCHMARK(BM_BkMax)->Arg(24)->Arg(96)->Unit(benchmark::kMicrosecond);

static void BM_ApproximateCubic(benchmark::State& state) {
  const SmoothFunction f = corpus_function("x3", 1);
  for (auto _ : state)
    benchmark::DoNotOptimize(approximate(f, 1, static_cast<int>(state.range(0))).report.sup_error);
}
BENCHMARK(BM_ApproximateCubic)->Arg(24)->Unit(benchmark::kMillisecond)->Iterations(3);

BENCHMARK_MAIN();
