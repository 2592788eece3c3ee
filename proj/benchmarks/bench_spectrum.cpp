#include <benchmark/benchmark.h>

#include "ltvstab/builtins.hpp"
#include "ltvstab/spectrum.hpp"

namespace {

void BM_LyapunovSpectrumPeriodic(benchmark::State& state) {
  const auto sys = ltvstab::builtin_system("example2");
  const ltvstab::Index horizon = state.range(0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ltvstab::lyapunov_spectrum(sys, horizon));
  }
  state.SetItemsProcessed(state.iterations() * horizon);
}
BENCHMARK(BM_LyapunovSpectrumPeriodic)->Arg(3000)->Arg(30000)->Arg(300000);

void BM_LyapunovSpectrumGenerator(benchmark::State& state) {
  const auto sys = ltvstab::builtin_system("example1");
  const ltvstab::Index horizon = state.range(0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ltvstab::lyapunov_spectrum(sys, horizon));
  }
  state.SetItemsProcessed(state.iterations() * horizon);
}
BENCHMARK(BM_LyapunovSpectrumGenerator)->Arg(10000);

void BM_MonodromySpectrum(benchmark::State& state) {
  const auto sys = ltvstab::builtin_system("example2");
  for (auto _ : state) {
    benchmark::DoNotOptimize(ltvstab::monodromy_spectrum(sys));
  }
}
BENCHMARK(BM_MonodromySpectrum);

}  // namespace
