#include <benchmark/benchmark.h>

#include "netlqr/critic.hpp"
#include "netlqr/simulator.hpp"
#include "netlqr/thermal.hpp"

using namespace netlqr;

namespace {

struct Fixture {
  LinearSystem sys;
  PolicyMatrix K0;
  std::vector<LocalDataset> datasets;
  int kappa;
  long T_c;

  Fixture(int rows, int cols, int kappa_, long T_c_)
      : sys([&] {
          ThermalConfig tc;
          tc.rows = rows;
          tc.cols = cols;
          tc.seed = 7;
          tc.sigma_w = 0.2;
          return build_thermal_system(tc).system;
        }()),
        K0(PolicyMatrix::truncated(PolicyMatrix::diagonal(sys.graph, -3.0).K, kappa_)),
        kappa(kappa_),
        T_c(T_c_) {
    RolloutConfig rc;
    rc.T = T_c + 1;
    rc.sigma_eta = 10.0;
    rc.seed = 2;
    rc.stream_domain = stream::critic_data;
    datasets = collect_local_datasets(rollout(sys, K0, rc), sys.graph, kappa);
  }
};

void BM_workspace_build(benchmark::State& state) {
  static const Fixture fx(5, 5, 2, 20000);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        CriticEstimator(fx.datasets, fx.T_c, fx.kappa, fx.sys.sigma_w, fx.sys.graph, 2));
  }
}
BENCHMARK(BM_workspace_build)->Unit(benchmark::kMillisecond);

void BM_estimate_per_policy(benchmark::State& state) {
  static const Fixture fx(5, 5, 2, 20000);
  static const CriticEstimator critic(fx.datasets, fx.T_c, fx.kappa, fx.sys.sigma_w,
                                      fx.sys.graph, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(critic.estimate(fx.K0, 2));
  }
}
BENCHMARK(BM_estimate_per_policy)->Unit(benchmark::kMillisecond);

void BM_exact_truncated_q(benchmark::State& state) {
  static const Fixture fx(5, 5, 3, 10);
  for (auto _ : state) {
    benchmark::DoNotOptimize(exact_truncated_q(fx.sys, fx.K0, 3, 2));
  }
}
BENCHMARK(BM_exact_truncated_q)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
