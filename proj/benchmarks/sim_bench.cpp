#include <benchmark/benchmark.h>

#include "fixtures.hpp"
#include "insens/sim.hpp"

namespace {

using namespace insens;

void run_events(benchmark::State& state, const NetworkSpec& spec) {
  SimConfig config;
  config.max_events = static_cast<std::uint64_t>(state.range(0));
  config.snapshot_interval = 0;
  config.epoch_interval = 0;
  for (auto _ : state) {
    config.seed++;
    benchmark::DoNotOptimize(run(spec, config));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_ErlangLossDeterministic(benchmark::State& state) {
  run_events(state, testing::erlang_loss_spec(testing::det1()));
}
BENCHMARK(BM_ErlangLossDeterministic)->Arg(100'000)->Unit(benchmark::kMillisecond);

void BM_TandemHyperExponential(benchmark::State& state) {
  run_events(state, testing::tandem_spec(1.0, BalanceFunction::product({0.5, 0.5}), testing::h2(),
                                         testing::h2()));
}
BENCHMARK(BM_TandemHyperExponential)->Arg(100'000)->Unit(benchmark::kMillisecond);

void BM_FifoHeavyTraffic(benchmark::State& state) {
  run_events(state, testing::mm1_spec(0.9, Discipline::Fifo, testing::det1()));
}
BENCHMARK(BM_FifoHeavyTraffic)->Arg(100'000)->Unit(benchmark::kMillisecond);

void BM_ProcessorSharingHeavyTraffic(benchmark::State& state) {
  run_events(state, testing::mm1_spec(0.9, Discipline::ProcessorSharing, testing::det1()));
}
BENCHMARK(BM_ProcessorSharingHeavyTraffic)->Arg(100'000)->Unit(benchmark::kMillisecond);

void BM_ResidualSnapshots(benchmark::State& state) {
  SimConfig config;
  config.max_events = 100'000;
  config.snapshot_interval = static_cast<std::uint64_t>(state.range(0));
  const auto spec = testing::erlang_loss_spec(testing::erlang2());
  for (auto _ : state) benchmark::DoNotOptimize(run(spec, config));
}
BENCHMARK(BM_ResidualSnapshots)->Arg(5)->Arg(50)->Unit(benchmark::kMillisecond);

}  // namespace
