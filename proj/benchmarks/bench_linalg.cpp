#include <benchmark/benchmark.h>

#include <random>

#include "netlqr/linalg.hpp"
#include "netlqr/system.hpp"

using namespace netlqr;

namespace {

Eigen::MatrixXd stable_matrix(int n, double radius, uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::MatrixXd A(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) A(r, c) = dist(gen);
  return A * (radius / spectral_radius(A));
}

void BM_solve_lyapunov(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Eigen::MatrixXd L = stable_matrix(n, 0.9, 1);
  const Eigen::MatrixXd M = Eigen::MatrixXd::Identity(n, n);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_lyapunov(L, M));
  }
}
BENCHMARK(BM_solve_lyapunov)->Arg(10)->Arg(25)->Arg(50);

void BM_solve_dare(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::MatrixXd B(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) B(r, c) = 0.2 * dist(gen);
  NetworkGraph g(1, {}, {n}, {n});
  const LinearSystem sys{g, stable_matrix(n, 0.9, 3), B,
                         Eigen::MatrixXd::Identity(n, n),
                         Eigen::MatrixXd::Identity(n, n), 1.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_dare(sys));
  }
}
BENCHMARK(BM_solve_dare)->Arg(10)->Arg(25);

void BM_svec_roundtrip(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const Eigen::MatrixXd L = stable_matrix(d, 0.9, 4);
  const Eigen::MatrixXd M = L + L.transpose();
  for (auto _ : state) {
    benchmark::DoNotOptimize(smat(svec(M)));
  }
}
BENCHMARK(BM_svec_roundtrip)->Arg(26)->Arg(50);

void BM_psd_project(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const Eigen::MatrixXd M = stable_matrix(d, 2.0, 5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(psd_project(M));
  }
}
BENCHMARK(BM_psd_project)->Arg(28)->Arg(351);

void BM_stability_params(benchmark::State& state) {
  const Eigen::MatrixXd X = stable_matrix(25, 0.95, 6);
  for (auto _ : state) {
    benchmark::DoNotOptimize(stability_params(X));
  }
}
BENCHMARK(BM_stability_params);

}  // namespace

BENCHMARK_MAIN();
