#include <benchmark/benchmark.h>

#include "ltvstab/builtins.hpp"
#include "ltvstab/channel.hpp"
#include "ltvstab/mcsim.hpp"
#include "ltvstab/riccati.hpp"

namespace {

void BM_SimulateEnsemble(benchmark::State& state) {
  const auto sys = ltvstab::builtin_system("example1");
  const auto channel = ltvstab::ChannelModel::bernoulli(0.2);
  const ltvstab::Index horizon = 400;
  const auto schedule = ltvstab::ms_riccati_backward(sys, horizon, 0.2, 0.16);
  const auto gains = ltvstab::optimal_gain(sys, schedule, 0.2, 0.16);
  const ltvstab::Vector x0 = ltvstab::Vector::Ones(2);
  ltvstab::SimulateOptions opts;
  opts.noise_variance = 1.0;
  opts.workers = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        ltvstab::simulate_ensemble(sys, gains, channel, x0, horizon, 1000, 42, opts));
  }
  state.SetItemsProcessed(state.iterations() * 1000 * horizon);
}
BENCHMARK(BM_SimulateEnsemble)->Arg(1)->Arg(4);

void BM_AnalyticMoments(benchmark::State& state) {
  const auto sys = ltvstab::builtin_system("example2");
  const ltvstab::Index horizon = 400;
  const auto schedule = ltvstab::ms_riccati_backward(sys, horizon, 0.93, 0.0651);
  const auto gains = ltvstab::optimal_gain(sys, schedule, 0.93, 0.0651);
  const ltvstab::Vector x0 = ltvstab::Vector::Ones(3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ltvstab::analytic_ms_recursion(sys, gains, 0.93, 0.0651, x0, horizon));
  }
}
BENCHMARK(BM_AnalyticMoments);

}  // namespace
