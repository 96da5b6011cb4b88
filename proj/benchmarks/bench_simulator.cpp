#include <benchmark/benchmark.h>

#include "netlqr/simulator.hpp"
#include "netlqr/thermal.hpp"

using namespace netlqr;

namespace {

void BM_rollout(benchmark::State& state) {
  ThermalConfig tc;
  tc.seed = 7;
  tc.sigma_w = 0.2;
  const LinearSystem sys = build_thermal_system(tc).system;
  const PolicyMatrix K0 = PolicyMatrix::diagonal(sys.graph, -3.0);
  RolloutConfig rc;
  rc.T = state.range(0);
  rc.sigma_eta = 10.0;
  rc.seed = 1;
  rc.burn_in = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(rollout(sys, K0, rc));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_rollout)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_collect_datasets(benchmark::State& state) {
  ThermalConfig tc;
  tc.seed = 7;
  tc.sigma_w = 0.2;
  const LinearSystem sys = build_thermal_system(tc).system;
  const PolicyMatrix K0 = PolicyMatrix::diagonal(sys.graph, -3.0);
  RolloutConfig rc;
  rc.T = 20000;
  rc.sigma_eta = 10.0;
  rc.seed = 1;
  const Trajectory traj = rollout(sys, K0, rc);
  for (auto _ : state) {
    benchmark::DoNotOptimize(collect_local_datasets(traj, sys.graph, 3));
  }
}
BENCHMARK(BM_collect_datasets)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
