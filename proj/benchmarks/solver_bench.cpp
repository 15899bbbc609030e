#include <benchmark/benchmark.h>

#include "fixtures.hpp"
#include "insens/balance.hpp"

namespace {

using namespace insens;

void BM_SolveWhittle(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  const auto spec = testing::tandem_spec(1.0, BalanceFunction::product({0.5, 0.5}));
  for (auto _ : state) benchmark::DoNotOptimize(solve_analytic(spec, {k, k}));
}
BENCHMARK(BM_SolveWhittle)->Arg(30)->Arg(99);

void BM_VerifyPartialBalance(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  const auto spec = testing::tandem_spec(1.0, BalanceFunction::product({0.5, 0.5}));
  const auto pi = solve_analytic(spec, {k, k});
  for (auto _ : state) benchmark::DoNotOptimize(verify_partial_balance(spec, pi));
}
BENCHMARK(BM_VerifyPartialBalance)->Arg(30)->Arg(99);

void BM_CtmcOracle(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  const auto spec = testing::tandem_spec(1.0, BalanceFunction::product({0.5, 0.5}));
  for (auto _ : state) benchmark::DoNotOptimize(ctmc_oracle(spec, LatticeBox({k, k})));
}
BENCHMARK(BM_CtmcOracle)->Arg(20)->Arg(60)->Unit(benchmark::kMillisecond);

void BM_SolveLoss(benchmark::State& state) {
  const auto spec = testing::loss_spec();
  for (auto _ : state) benchmark::DoNotOptimize(solve_analytic(spec, {}));
}
BENCHMARK(BM_SolveLoss);

}  // namespace
