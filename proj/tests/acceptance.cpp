// Acceptance suite: one pass/fail line per criterion, each with its wall
// clock budget asserted. Run via `ctest -R acceptance` or directly.

#include <doctest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "netlqr/actor.hpp"
#include "netlqr/critic.hpp"
#include "netlqr/errors.hpp"
#include "netlqr/learner.hpp"
#include "netlqr/linalg.hpp"
#include "netlqr/parallel.hpp"
#include "netlqr/sed.hpp"
#include "netlqr/simulator.hpp"
#include "netlqr/thermal.hpp"
#include "test_util.hpp"

using namespace netlqr;
using namespace netlqr::testutil;
namespace fs = std::filesystem;

namespace {

// The benchmark experiment pins sigma_w = 0.2. The model source never states
// the plant noise level; at sigma_w = 1.0 the slow closed loop (spectral
// radius ~0.9964, mixing time ~270 steps) buries the H12/H22 regression
// signal and the very first sampled-gradient step destabilizes the grid,
// which is inconsistent with the reported near-optimal behavior. At 0.2 the
// published parameter set (T_c = 1e5, sigma_eta = 10, T_a = 1e4,
// alpha = 0.005) reproduces it.
constexpr double kBenchmarkSigmaW = 0.2;
constexpr uint64_t kBenchmarkSeed = 7;

struct Criterion {
  const char* name;
  double budget_s;
  bool ok = true;
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      std::printf("       violated: %s\n", what.c_str());
    }
    CHECK_MESSAGE(cond, what);
  }
  ~Criterion() {
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_budget = elapsed < budget_s;
    const std::string budget_msg = std::string(name) + " exceeded its runtime budget";
    CHECK_MESSAGE(in_budget, budget_msg);
    std::printf("[%s] %s (%.1f s / budget %.0f s)\n", (ok && in_budget) ? "PASS" : "FAIL",
                name, elapsed, budget_s);
    std::fflush(stdout);
  }
};

LinearSystem benchmark_system(int rows, int cols) {
  ThermalConfig tc;
  tc.rows = rows;
  tc.cols = cols;
  tc.seed = kBenchmarkSeed;
  tc.sigma_w = kBenchmarkSigmaW;
  LinearSystem sys = build_thermal_system(tc).system;
  sys.sigma_w = kBenchmarkSigmaW;
  return sys;
}

LearnerConfig benchmark_learner(const LinearSystem& sys, int kappa, QMode mode) {
  LearnerConfig cfg;
  cfg.kappa = kappa;
  cfg.K0 = PolicyMatrix::diagonal(sys.graph, -3.0).K;
  cfg.T_c = 100000;
  cfg.sigma_eta = 10.0;
  cfg.T_a = 10000;
  cfg.alpha = 0.005;
  cfg.sigma_w = kBenchmarkSigmaW;
  cfg.mode = mode;
  cfg.jobs = default_jobs();
  return cfg;
}

double optimal_cost(const LinearSystem& sys) {
  return sys.sigma_w * sys.sigma_w * solve_dare(sys).P.trace();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("criterion 1: oracle algebra") {
  Criterion c{"criterion 1: Lyapunov/DARE oracles", 10.0};
  auto gen = make_gen(101);

  // Scalar closed form first.
  {
    const DareSolution sol = solve_dare(scalar_system(1.0, 1.0, 1.0, 1.0));
    c.expect(std::abs(sol.P(0, 0) - (1.0 + std::sqrt(5.0)) / 2.0) <= 1e-10,
             "scalar DARE root");
  }

  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + static_cast<int>(gen() % 11);  // up to 12
    const int m = 1 + static_cast<int>(gen() % 4);
    const Eigen::MatrixXd L = random_stable(gen, n, 0.88);
    const Eigen::MatrixXd M =
        random_psd(gen, n) + 0.1 * Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd P = solve_lyapunov(L, M);
    const Eigen::MatrixXd series = lyapunov_series(L, M, 200);
    c.expect((P - series).norm() <= 1e-8 * (1.0 + series.norm()),
             "Lyapunov vs 200-term series, trial " + std::to_string(trial));

    LinearSystem sys = monolithic_system(
        L, random_matrix(gen, n, m), M,
        random_psd(gen, m) + Eigen::MatrixXd::Identity(m, m));
    const DareSolution sol = solve_dare(sys);
    const Eigen::MatrixXd BtP = sys.B.transpose() * sol.P;
    const Eigen::MatrixXd residual =
        sys.S + sys.A.transpose() * sol.P * sys.A -
        (BtP * sys.A).transpose() * (sys.R + BtP * sys.B).ldlt().solve(BtP * sys.A) -
        sol.P;
    c.expect(residual.norm() <= 1e-9 * (1.0 + sol.P.norm()),
             "DARE residual, trial " + std::to_string(trial));
  }
}

TEST_CASE("criterion 2: structural theorems hold numerically") {
  Criterion c{"criterion 2: SED theorems on the 5x5 grid", 60.0};
  const LinearSystem sys = benchmark_system(5, 5);
  const NetworkGraph& g = sys.graph;
  const int N = g.num_agents();
  const PolicyMatrix K = PolicyMatrix::diagonal(g, -3.0);

  // Shared certificates: stability of A + BK and the SED constants of A, B, K
  // at the shared rate.
  const StabilityCert stab = stability_params(closed_loop(sys, K));
  const SystemSedSummary ssed = measure_system_sed(sys);
  const DecayReport k_rep = measure_sed(K.K, g, Dim::Input, Dim::State);
  const double gamma_used = std::min(ssed.gamma_sys, k_rep.fitted_gamma);
  const double c_A =
      std::max(1.0, minimal_sed_constant(sys.A, g, Dim::State, Dim::State, gamma_used));
  const double c_B =
      std::max(1.0, minimal_sed_constant(sys.B, g, Dim::State, Dim::Input, gamma_used));
  const double c_K = minimal_sed_constant(K.K, g, Dim::Input, Dim::State, gamma_used);

  const PolicyEvaluation ev = evaluate_policy(sys, K, default_jobs());
  for (int i = 0; i < N; ++i) {
    const Theorem1Constants thm = theorem1_constants(sys, K, i, stab.tau, stab.rho, c_A,
                                                     c_B, c_K, gamma_used, N);
    c.expect(envelope_holds(ev.P_i[i], g, Dim::State, Dim::State, thm.c_Pi, thm.gamma_Pi, i),
             "Theorem 1 envelope, agent " + std::to_string(i));

    const double norm_Si = spectral_norm(g.block(sys.S, i, i, Dim::State, Dim::State));
    const double norm_Ri = spectral_norm(g.block(sys.R, i, i, Dim::Input, Dim::Input));
    const double c_Hi = corollary1_constant(norm_Si, norm_Ri, c_A, c_B, thm.c_Pi, N);
    c.expect(envelope_holds(ev.H_i[i].H11, g, Dim::State, Dim::State, c_Hi, thm.gamma_Pi, i),
             "Corollary 1 on H11, agent " + std::to_string(i));
    c.expect(envelope_holds(ev.H_i[i].H12, g, Dim::State, Dim::Input, c_Hi, thm.gamma_Pi, i),
             "Corollary 1 on H12, agent " + std::to_string(i));
    c.expect(envelope_holds(ev.H_i[i].H22, g, Dim::Input, Dim::Input, c_Hi, thm.gamma_Pi, i),
             "Corollary 1 on H22, agent " + std::to_string(i));

    for (int kappa = 1; kappa <= 5; ++kappa) {
      const double bound = corollary2_bound(c_Hi, thm.gamma_Pi, kappa, N);
      const TruncationErrors errs = truncation_errors(ev.H_i[i], i, kappa, g);
      c.expect(errs.max() <= bound, "Corollary 2 bound, agent " + std::to_string(i) +
                                        ", kappa " + std::to_string(kappa));
    }
  }
}

TEST_CASE("criterion 3: gradient correctness") {
  Criterion c{"criterion 3: policy gradient oracles", 30.0};
  auto gen = make_gen(103);

  // Exact gradient vs central finite differences of the average cost.
  int done = 0;
  while (done < 20) {
    const int n = 2 + static_cast<int>(gen() % 5);  // up to 6
    const int m = 1 + static_cast<int>(gen() % 2);
    LinearSystem sys = monolithic_system(
        random_stable(gen, n, 0.8), random_matrix(gen, n, m),
        random_psd(gen, n) + 0.2 * Eigen::MatrixXd::Identity(n, n),
        random_psd(gen, m) + Eigen::MatrixXd::Identity(m, m));
    const DareSolution opt = solve_dare(sys);
    const Eigen::MatrixXd Kmat = opt.K + 0.3 * random_matrix(gen, m, n);
    if (spectral_radius(sys.A + sys.B * Kmat) >= 0.98) continue;
    ++done;
    const PolicyMatrix K = PolicyMatrix::unrestricted(Kmat);
    const Eigen::MatrixXd grad = exact_policy_gradient(sys, K);
    auto J_of = [&](const Eigen::MatrixXd& Kp) {
      return sys.sigma_w * sys.sigma_w *
             value_matrix_global(sys, PolicyMatrix::unrestricted(Kp)).trace();
    };
    const double eps = 1e-5;
    Eigen::MatrixXd fd(m, n);
    for (int r = 0; r < m; ++r) {
      for (int cidx = 0; cidx < n; ++cidx) {
        Eigen::MatrixXd Kp = Kmat, Km = Kmat;
        Kp(r, cidx) += eps;
        Km(r, cidx) -= eps;
        fd(r, cidx) = (J_of(Kp) - J_of(Km)) / (2.0 * eps);
      }
    }
    c.expect((grad - fd).norm() <= 1e-6 * fd.norm(),
             "finite differences, trial " + std::to_string(done));
  }

  // Assembled truncated gradient with exact H at full radius equals the
  // oracle when the sample average is replaced by the stationary covariance.
  done = 0;
  while (done < 20) {
    const NetworkGraph g = path3();
    const LinearSystem sys = random_network_system(gen, g, 0.7);
    const int kappa = g.diameter() + 1;
    const PolicyMatrix K = truncate_policy(0.15 * random_matrix(gen, 3, 3), kappa, g);
    if (spectral_radius(closed_loop(sys, K)) >= 1.0) continue;
    ++done;
    const QEstimate H = exact_truncated_q(sys, K, kappa);
    const Eigen::MatrixXd assembled =
        gradient_from_moment(H, K, stationary_covariance(sys, K), g);
    const Eigen::MatrixXd oracle = exact_policy_gradient(sys, K);
    c.expect((assembled - oracle).norm() <= 1e-8 * (1.0 + oracle.norm()),
             "assembled gradient, trial " + std::to_string(done));
  }
}

TEST_CASE("criterion 4: critic consistency") {
  Criterion c{"criterion 4: LSTDQ consistency", 120.0};

  // Scalar system: relative Frobenius error <= 0.05, averaged over 5 seeds.
  {
    LinearSystem sys = scalar_system(0.9, 1.0, 1.0, 1.0);
    const PolicyMatrix K0 =
        PolicyMatrix::truncated(Eigen::MatrixXd::Constant(1, 1, -0.5), 1);
    const Eigen::MatrixXd H_true = qfun_matrix_global(sys, K0).assembled();
    double total = 0.0;
    for (int s = 0; s < 5; ++s) {
      RolloutConfig rc;
      rc.T = 50001;
      rc.sigma_eta = 1.0;
      rc.seed = 100 + s;
      rc.stream_domain = stream::critic_data;
      const auto D = collect_local_datasets(rollout(sys, K0, rc), sys.graph, 1);
      const auto actions = on_policy_actions(D, K0, sys.graph, 1);
      const LstdqResult res = lstdq_estimate(D[0], actions[0], K0, 1.0, sys.graph);
      total += (smat(res.h) - H_true).norm() / H_true.norm();
    }
    c.expect(total / 5.0 <= 0.05, "scalar LSTDQ error " + std::to_string(total / 5.0));
  }

  // 3x3 grid at kappa = diameter: error against the exact truncated assembly
  // decreases monotonically across T_c = 1e3, 1e4, 1e5.
  {
    const LinearSystem sys = [&] {
      ThermalConfig tc;
      tc.rows = 3;
      tc.cols = 3;
      tc.seed = 3;
      tc.sigma_w = kBenchmarkSigmaW;
      return build_thermal_system(tc).system;
    }();
    const int kappa = sys.graph.diameter();
    const PolicyMatrix K0 = PolicyMatrix::truncated(
        PolicyMatrix::diagonal(sys.graph, -3.0).K, kappa);
    RolloutConfig rc;
    rc.T = 100001;
    rc.sigma_eta = 10.0;
    rc.seed = 2;
    rc.stream_domain = stream::critic_data;
    const auto D = collect_local_datasets(rollout(sys, K0, rc), sys.graph, kappa);
    const QEstimate exact = exact_truncated_q(sys, K0, kappa, default_jobs());
    const double scale = exact.H11.norm() + exact.H12.norm() + exact.H22.norm();
    double prev = std::numeric_limits<double>::infinity();
    for (long T_c : {1000L, 10000L, 100000L}) {
      const QEstimate est =
          estimate_q(D, K0, T_c, kappa, sys.sigma_w, sys.graph, default_jobs());
      const double err = ((est.H11 - exact.H11).norm() + (est.H12 - exact.H12).norm() +
                          (est.H22 - exact.H22).norm()) /
                         scale;
      c.expect(err < prev, "error non-decreasing at T_c " + std::to_string(T_c) +
                               " (err " + std::to_string(err) + ")");
      prev = err;
    }
  }
}

TEST_CASE("criterion 5: exact-Q learning end to end") {
  Criterion c{"criterion 5: exact-Q baseline", 300.0};
  const LinearSystem sys = benchmark_system(5, 5);
  const double J_opt = optimal_cost(sys);

  double prev = std::numeric_limits<double>::infinity();
  for (int kappa : {1, 2, 3, 5}) {
    LearnerConfig cfg = benchmark_learner(sys, kappa, QMode::ExactQ);
    cfg.k_max = 300;
    cfg.seed = 11;
    const LearningRun run = learn(sys, cfg);
    c.expect(!run.aborted, "exact-Q run aborted at kappa " + std::to_string(kappa));
    const double rel = run.records.back().J / J_opt - 1.0;
    if (kappa == 3) {
      c.expect(rel <= 0.05, "kappa 3 relative cost " + std::to_string(rel));
    }
    c.expect(rel <= prev + 1e-12, "relative cost increased from the previous kappa at " +
                                      std::to_string(kappa));
    prev = rel;
  }

  LearnerConfig cfg = benchmark_learner(sys, sys.graph.diameter() + 1, QMode::ExactQ);
  cfg.k_max = 300;
  cfg.seed = 11;
  const LearningRun run = learn(sys, cfg);
  c.expect(!run.aborted, "full-information run aborted");
  const double rel = run.records.back().J / J_opt - 1.0;
  c.expect(rel <= 1e-3, "full-information relative cost " + std::to_string(rel));
}

TEST_CASE("criterion 6: estimated-Q learning end to end") {
  Criterion c{"criterion 6: estimated-Q benchmark", 1800.0};
  const LinearSystem sys = benchmark_system(5, 5);
  const double J_opt = optimal_cost(sys);

  double total = 0.0;
  for (uint64_t seed : {11ULL, 12ULL, 13ULL}) {
    LearnerConfig cfg = benchmark_learner(sys, 3, QMode::EstimatedQ);
    cfg.k_max = 150;
    cfg.seed = seed;
    const LearningRun run = learn(sys, cfg);
    c.expect(!run.aborted, "run aborted for seed " + std::to_string(seed));
    c.expect(spectral_radius(closed_loop(sys, run.final_policy)) < 1.0,
             "final policy does not stabilize, seed " + std::to_string(seed));
    const double rel = run.records.back().J / J_opt - 1.0;
    std::printf("       seed %llu: relative cost %.4f\n",
                static_cast<unsigned long long>(seed), rel);
    total += rel;
  }
  c.expect(total / 3.0 <= 0.15,
           "seed-averaged relative cost " + std::to_string(total / 3.0));
}

TEST_CASE("criterion 7: locality and sparsity") {
  Criterion c{"criterion 7: locality cones and sparsity law", 10.0};
  auto gen = make_gen(107);
  const NetworkGraph g = NetworkGraph::grid(3, 3);
  const LinearSystem sys = random_network_system(gen, g, 0.7);
  const int kappa = 2;
  const PolicyMatrix K0 = PolicyMatrix::diagonal(g, -0.2);

  RolloutConfig rc;
  rc.T = 400;
  rc.sigma_eta = 1.0;
  rc.seed = 23;
  rc.stream_domain = stream::critic_data;
  const Trajectory traj = rollout(sys, K0, rc);

  // Datasets: out-of-kappa coordinates are never materialized.
  {
    const auto D = collect_local_datasets(traj, g, kappa);
    Trajectory tampered = traj;
    tampered.states.row(8).setConstant(9.0);
    tampered.inputs.row(8).setConstant(-9.0);
    const auto D2 = collect_local_datasets(tampered, g, kappa);
    c.expect(D[0].x_loc == D2[0].x_loc && D[0].u_loc == D2[0].u_loc,
             "agent 0 dataset depends on out-of-neighborhood coordinates");
    int dim = 0;
    for (int j : g.neighborhood(0, kappa)) dim += g.state_dim(j);
    c.expect(D[0].state_dim() == dim, "dataset dimension exceeds the neighborhood");
  }

  // Critic: estimates depend on states only through the (2kappa-1)-cone and
  // on gain rows only inside the kappa-neighborhood.
  {
    const auto D = collect_local_datasets(traj, g, kappa);
    const QEstimate base = estimate_q(D, K0, 399, kappa, sys.sigma_w, g);

    Trajectory tampered = traj;  // dist(0, 8) = 4 >= 2 kappa - 1 = 3
    tampered.states.row(8).setConstant(9.0);
    tampered.inputs.row(8).setConstant(-9.0);
    tampered.agent_costs.row(8).setConstant(1.0);
    const auto D2 = collect_local_datasets(tampered, g, kappa);
    const QEstimate t1 = estimate_q(D2, K0, 399, kappa, sys.sigma_w, g);
    c.expect(base.h_hat[0] == t1.h_hat[0], "critic reads states beyond 2kappa-1");

    PolicyMatrix Kp = truncate_policy(K0.K, kappa, g);  // perturb a far gain row
    Kp.K(8, 8) += 0.5;
    const QEstimate t2 = estimate_q(D, Kp, 399, kappa, sys.sigma_w, g);
    c.expect(base.h_hat[0] == t2.h_hat[0], "critic reads gain rows beyond kappa");

    // Share cone: assembled row-blocks of agent 0 sum only the estimates
    // shared within N_0^kappa, all of which sit at distance >= 2kappa-1 from
    // the tampered agent, so they are bitwise unchanged.
    bool share_ok = true;
    for (int j : g.neighborhood(0, 2 * kappa - 1)) {
      share_ok = share_ok && base.H11(0, j) == t1.H11(0, j) &&
                 base.H12(0, j) == t1.H12(0, j) && base.H22(0, j) == t1.H22(0, j);
    }
    c.expect(share_ok, "assembly reads estimate shares beyond kappa");

    // Assembled sparsity law: exact zeros outside N_l^{2kappa-1}.
    bool sparse = true;
    for (int l = 0; l < 9; ++l) {
      for (int j = 0; j < 9; ++j) {
        if (g.distance(l, j) < 2 * kappa - 1) continue;
        sparse = sparse && base.H11(l, j) == 0.0 && base.H12(l, j) == 0.0 &&
                 base.H22(l, j) == 0.0;
      }
    }
    c.expect(sparse, "assembled blocks leak outside N^{2kappa-1}");
  }

  // Actor: gradient blocks read gain rows within 2kappa-1 and states within
  // 3kappa-2 only.
  {
    const QEstimate H = exact_truncated_q(sys, truncate_policy(K0.K, kappa, g), kappa);
    const Eigen::MatrixXd m2 = random_psd(gen, 9);
    const PolicyMatrix K = truncate_policy(K0.K, kappa, g);

    PolicyMatrix Kp = K;
    Kp.K(8, 8) += 0.25;  // dist(0,8) = 4 >= 2 kappa - 1
    c.expect(gradient_from_moment(H, K, m2, g).row(0) ==
                 gradient_from_moment(H, Kp, m2, g).row(0),
             "actor reads gain rows beyond 2kappa-1");

    Eigen::MatrixXd far = m2;  // dist(0,8) = 4 >= 3 kappa - 2
    far.row(8).setConstant(3.0);
    far.col(8).setConstant(3.0);
    c.expect(gradient_from_moment(H, K, m2, g).row(0) ==
                 gradient_from_moment(H, K, far, g).row(0),
             "actor reads states beyond 3kappa-2");
  }
}

TEST_CASE("criterion 8: determinism") {
  Criterion c{"criterion 8: bit-identical reproduction", 120.0};
  const LinearSystem sys = [&] {
    ThermalConfig tc;
    tc.rows = 3;
    tc.cols = 3;
    tc.seed = 3;
    tc.sigma_w = kBenchmarkSigmaW;
    return build_thermal_system(tc).system;
  }();

  // Trajectories.
  {
    RolloutConfig rc;
    rc.T = 5000;
    rc.sigma_eta = 10.0;
    rc.seed = 31;
    rc.stream_domain = stream::critic_data;
    const PolicyMatrix K0 = PolicyMatrix::diagonal(sys.graph, -3.0);
    const Trajectory a = rollout(sys, K0, rc);
    const Trajectory b = rollout(sys, K0, rc);
    c.expect(a.states == b.states && a.inputs == b.inputs && a.agent_costs == b.agent_costs,
             "trajectories differ across invocations");
  }

  // Estimates across worker counts.
  {
    const int kappa = 2;
    const PolicyMatrix K0 =
        PolicyMatrix::truncated(PolicyMatrix::diagonal(sys.graph, -3.0).K, kappa);
    RolloutConfig rc;
    rc.T = 3001;
    rc.sigma_eta = 10.0;
    rc.seed = 31;
    rc.stream_domain = stream::critic_data;
    const auto D = collect_local_datasets(rollout(sys, K0, rc), sys.graph, kappa);
    const QEstimate e1 = estimate_q(D, K0, 3000, kappa, sys.sigma_w, sys.graph, 1);
    const QEstimate e4 = estimate_q(D, K0, 3000, kappa, sys.sigma_w, sys.graph, 4);
    bool same = e1.H11 == e4.H11 && e1.H12 == e4.H12 && e1.H22 == e4.H22;
    for (size_t i = 0; i < e1.h_hat.size(); ++i) same = same && e1.h_hat[i] == e4.h_hat[i];
    c.expect(same, "estimates differ across worker counts");
  }

  // Learning runs across invocations and worker counts.
  {
    LearnerConfig cfg;
    cfg.kappa = 2;
    cfg.K0 = PolicyMatrix::diagonal(sys.graph, -3.0).K;
    cfg.k_max = 3;
    cfg.T_c = 3000;
    cfg.sigma_eta = 10.0;
    cfg.T_a = 500;
    cfg.alpha = 0.005;
    cfg.sigma_w = kBenchmarkSigmaW;
    cfg.seed = 77;
    cfg.jobs = 1;
    const LearningRun r1 = learn(sys, cfg);
    const LearningRun r2 = learn(sys, cfg);
    cfg.jobs = 4;
    const LearningRun r4 = learn(sys, cfg);
    bool same = r1.records.size() == r2.records.size() &&
                r1.records.size() == r4.records.size();
    for (size_t k = 0; same && k < r1.records.size(); ++k) {
      same = r1.records[k].K == r2.records[k].K && r1.records[k].K == r4.records[k].K &&
             r1.records[k].J == r2.records[k].J && r1.records[k].J == r4.records[k].J &&
             r1.records[k].grad_norm == r2.records[k].grad_norm &&
             r1.records[k].grad_norm == r4.records[k].grad_norm;
    }
    c.expect(same, "learning runs differ across invocations or worker counts");
  }

#ifdef NETLQR_CLI_PATH
  // Whole-tool reproduction: same seed, different --jobs, byte-equal outputs.
  {
    const fs::path tmp = fs::temp_directory_path() /
                         ("netlqr_acc8_" + std::to_string(::getpid()));
    fs::remove_all(tmp);
    fs::create_directories(tmp);
    auto shell = [&](const std::string& args) {
      const std::string cmd =
          std::string(NETLQR_CLI_PATH) + " " + args + " >/dev/null 2>&1";
      return WEXITSTATUS(std::system(cmd.c_str()));
    };
    c.expect(shell("generate --rows 2 --cols 2 --seed 5 --output-dir " + tmp.string()) == 0,
             "generate failed");
    const std::string learn_cmd =
        "learn --system " + (tmp / "system.json").string() +
        " --kappa 2 --kmax 2 --Tc 300 --Ta 100 --sigma-w 0.2 --seed 12";
    c.expect(shell(learn_cmd + " --jobs 1 --output-dir " + (tmp / "a").string()) == 0,
             "learn --jobs 1 failed");
    c.expect(shell(learn_cmd + " --jobs 4 --output-dir " + (tmp / "b").string()) == 0,
             "learn --jobs 4 failed");
    c.expect(slurp(tmp / "a" / "metrics.csv") == slurp(tmp / "b" / "metrics.csv"),
             "metrics differ across --jobs");
    c.expect(slurp(tmp / "a" / "policy_final_K.nlqm") ==
                 slurp(tmp / "b" / "policy_final_K.nlqm"),
             "final policies differ across --jobs");
    fs::remove_all(tmp);
  }
#endif
}
