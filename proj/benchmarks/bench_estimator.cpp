#include <benchmark/benchmark.h>

#include "dhsic/resampling.hpp"

using namespace dhsic;

namespace {

Dataset normals(int n, int d, std::uint64_t seed) {
  Stream rng(seed);
  Eigen::MatrixXd v(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) v(i, j) = rng.normal();
  return make_univariate_dataset(v);
}

void BM_GramStack(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int d = static_cast<int>(state.range(1));
  const Dataset ds = normals(n, d, 42);
  const auto specs = resolve_specs(ds, default_specs(ds));
  for (auto _ : state) {
    benchmark::DoNotOptimize(gram_stack(ds, specs));
  }
  state.SetComplexityN(static_cast<std::int64_t>(n) * n * d);
}

void BM_DhsicStatistic(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int d = static_cast<int>(state.range(1));
  const Dataset ds = normals(n, d, 42);
  const GramStack gs = gram_stack(ds, resolve_specs(ds, default_specs(ds)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(dhsic_statistic(gs));
  }
  state.SetComplexityN(static_cast<std::int64_t>(n) * n * d);
}

void BM_PermutationTest(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int B = static_cast<int>(state.range(1));
  const Dataset ds = normals(n, 3, 42);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        mc_pvalue(ds, default_specs(ds), ResampleKind::Permutation, B, 7));
  }
}

}  // namespace

BENCHMARK(BM_GramStack)
    ->ArgsProduct({{64, 128, 256, 512}, {2, 4}})
    ->Complexity(benchmark::oN);
BENCHMARK(BM_DhsicStatistic)
    ->ArgsProduct({{64, 128, 256, 512, 1024}, {2, 4, 8}})
    ->Complexity(benchmark::oN);
BENCHMARK(BM_PermutationTest)->Args({100, 100})->Args({200, 100});

int main(int argc, char** argv) {
  ::benchmark::Initialize(&argc, argv);
  if (::benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  ::benchmark::RunSpecifiedBenchmarks();
  return 0;
}
