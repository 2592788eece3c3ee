#include <benchmark/benchmark.h>

#include "ltvstab/channel.hpp"

namespace {

void BM_BernoulliStream(benchmark::State& state) {
  const auto channel = ltvstab::ChannelModel::bernoulli(0.11);
  const auto stream = ltvstab::sample_stream(channel, 42, 0);
  std::uint64_t t = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(stream.at(t++));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_BernoulliStream);

void BM_GaussianStream(benchmark::State& state) {
  const auto channel = ltvstab::ChannelModel::gaussian(1.0, 0.25);
  const auto stream = ltvstab::sample_stream(channel, 42, 0);
  std::uint64_t t = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(stream.at(t++));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_GaussianStream);

}  // namespace
