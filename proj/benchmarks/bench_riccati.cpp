#include <benchmark/benchmark.h>

#include "ltvstab/builtins.hpp"
#include "ltvstab/riccati.hpp"

namespace {

void BM_RiccatiBackward(benchmark::State& state) {
  const auto sys = ltvstab::builtin_system("example2");
  const ltvstab::Index horizon = state.range(0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ltvstab::riccati_backward(sys, horizon));
  }
  state.SetItemsProcessed(state.iterations() * horizon);
}
BENCHMARK(BM_RiccatiBackward)->Arg(200)->Arg(2000);

void BM_GainSynthesis(benchmark::State& state) {
  const auto sys = ltvstab::builtin_system("example2");
  const auto schedule = ltvstab::ms_riccati_backward(sys, state.range(0), 0.9, 0.09);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ltvstab::optimal_gain(sys, schedule, 0.9, 0.09));
  }
}
BENCHMARK(BM_GainSynthesis)->Arg(2000);

}  // namespace
