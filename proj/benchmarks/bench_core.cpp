#include <benchmark/benchmark.h>

#include "stableop/normalization.hpp"
#include "stableop/spectral_measure.hpp"

namespace {

void BM_NormalizationConstant(benchmark::State& state) {
  double s = 0.3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(stableop::normalization_constant(s));
    s = (s > 0.9) ? 0.3 : s + 0.07;
  }
}
BENCHMARK(BM_NormalizationConstant);

void BM_SymbolAtomic(benchmark::State& state) {
  auto op = stableop::StableOperator::axis_sum(2, 0.75);
  stableop::Vec3 xi{0.3, 0.0, 0.0};
  for (auto _ : state) {
    xi[1] += 1e-6;
    benchmark::DoNotOptimize(op.symbol(xi));
  }
}
BENCHMARK(BM_SymbolAtomic);

void BM_SymbolUniformClosedForm(benchmark::State& state) {
  auto op = stableop::StableOperator::fractional_laplacian(2, 0.6);
  stableop::Vec3 xi{0.3, 0.0, 0.0};
  for (auto _ : state) {
    xi[1] += 1e-6;
    benchmark::DoNotOptimize(op.symbol(xi));
  }
}
BENCHMARK(BM_SymbolUniformClosedForm);

void BM_EllipticityScan(benchmark::State& state) {
  auto m = stableop::SpectralMeasure::atomic(
      2, {{{1.0, 0.0, 0.0}, 1.0}, {{0.6, 0.8, 0.0}, 0.5}, {{0.0, 1.0, 0.0}, 0.25}});
  for (auto _ : state)
    benchmark::DoNotOptimize(stableop::ellipticity_lambda(m, 0.6, state.range(0)));
}
BENCHMARK(BM_EllipticityScan)->Arg(180)->Arg(720);

}  // namespace

BENCHMARK_MAIN();
