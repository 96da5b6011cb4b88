#include <doctest.h>

#include <cmath>

#include "netlqr/critic.hpp"
#include "netlqr/errors.hpp"
#include "netlqr/linalg.hpp"
#include "netlqr/sed.hpp"
#include "netlqr/simulator.hpp"
#include "test_util.hpp"

using namespace netlqr;
using namespace netlqr::testutil;

namespace {

std::vector<LocalDataset> make_datasets(const LinearSystem& sys, const PolicyMatrix& K0,
                                        long T_c, double sigma_eta, uint64_t seed,
                                        int kappa) {
  RolloutConfig rc;
  rc.T = T_c + 1;
  rc.sigma_eta = sigma_eta;
  rc.seed = seed;
  rc.stream_domain = stream::critic_data;
  return collect_local_datasets(rollout(sys, K0, rc), sys.graph, kappa);
}

}  // namespace

TEST_CASE("local features") {
  SUBCASE("worked scalar example") {
    const Eigen::VectorXd phi = local_features(Eigen::VectorXd::Constant(1, 1.0),
                                               Eigen::VectorXd::Constant(1, 2.0));
    REQUIRE(phi.size() == 3);
    CHECK(phi[0] == 1.0);
    CHECK(phi[1] == 2.0 * std::sqrt(2.0));
    CHECK(phi[2] == 4.0);
  }
  SUBCASE("zero input gives the zero vector") {
    CHECK(local_features(Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(2)).isZero(0.0));
  }
  SUBCASE("norm identity on rank-one features") {
    auto gen = make_gen(41);
    for (int trial = 0; trial < 10; ++trial) {
      const Eigen::VectorXd x = random_matrix(gen, 4, 1);
      const Eigen::VectorXd u = random_matrix(gen, 2, 1);
      const double z2 = x.squaredNorm() + u.squaredNorm();
      CHECK(local_features(x, u).norm() == doctest::Approx(z2).epsilon(1e-12));
    }
  }
}

TEST_CASE("on-policy action shares") {
  auto gen = make_gen(42);
  const NetworkGraph g = NetworkGraph::grid(3, 3);
  const LinearSystem sys = random_network_system(gen, g, 0.7);
  const int kappa = 2;
  const PolicyMatrix K0 = PolicyMatrix::diagonal(g, -0.2);
  const auto datasets = make_datasets(sys, K0, 30, 1.0, 7, kappa);

  SUBCASE("zero gain gives zero actions") {
    const PolicyMatrix K = PolicyMatrix::truncated(Eigen::MatrixXd::Zero(9, 9), kappa);
    for (const auto& U : on_policy_actions(datasets, K, g, kappa)) CHECK(U.isZero(0.0));
  }
  SUBCASE("diagonal gain with kappa = 1") {
    const auto d1 = make_datasets(sys, K0, 30, 1.0, 7, 1);
    const PolicyMatrix K = PolicyMatrix::diagonal(g, -1.5);
    const auto actions = on_policy_actions(d1, K, g, 1);
    for (int i = 0; i < 9; ++i) {
      CHECK(actions[i] == -1.5 * d1[i].x_loc);
    }
  }
  SUBCASE("assembled actions equal the projected global product") {
    const PolicyMatrix K = truncate_policy(0.3 * random_matrix(gen, 9, 9), kappa, g);
    const auto actions = on_policy_actions(datasets, K, g, kappa);
    // Oracle: compute K x(t) globally and project onto each neighborhood.
    RolloutConfig rc;
    rc.T = 31;
    rc.sigma_eta = 1.0;
    rc.seed = 7;
    rc.stream_domain = stream::critic_data;
    const Trajectory traj = rollout(sys, K0, rc);
    const Eigen::MatrixXd global = K.K * traj.states.leftCols(traj.length());
    for (int i = 0; i < 9; ++i) {
      long row = 0;
      for (int j : datasets[i].members) {
        CHECK(actions[i].row(row).isApprox(global.row(j), 1e-12));
        ++row;
      }
    }
  }
  SUBCASE("non-sparse gains are rejected") {
    const PolicyMatrix K = PolicyMatrix::unrestricted(random_matrix(gen, 9, 9));
    CHECK_THROWS_AS(on_policy_actions(datasets, K, g, kappa), ArgumentError);
  }
}

TEST_CASE("noise correction vector") {
  const NetworkGraph g1(1, {}, {1}, {1});
  SUBCASE("no noise, no correction") {
    const PolicyMatrix K = PolicyMatrix::unrestricted(Eigen::MatrixXd::Constant(1, 1, 0.7));
    CHECK(noise_correction(K, 0, 1, 0.0, g1).isZero(0.0));
  }
  SUBCASE("scalar agent formula") {
    const double k = -0.4, sw = 1.7;
    const PolicyMatrix K = PolicyMatrix::unrestricted(Eigen::MatrixXd::Constant(1, 1, k));
    const Eigen::VectorXd f = noise_correction(K, 0, 1, sw, g1);
    REQUIRE(f.size() == 3);
    CHECK(f[0] == doctest::Approx(sw * sw).epsilon(1e-14));
    CHECK(f[1] == doctest::Approx(std::sqrt(2.0) * sw * sw * k).epsilon(1e-14));
    CHECK(f[2] == doctest::Approx(sw * sw * k * k).epsilon(1e-14));
  }
  SUBCASE("full neighborhood matches the centralized correction") {
    auto gen = make_gen(43);
    const NetworkGraph g = testutil::path3();
    const Eigen::MatrixXd Kmat = random_matrix(gen, 3, 3);
    const PolicyMatrix K = PolicyMatrix::unrestricted(Kmat);
    const double sw = 0.9;
    const Eigen::VectorXd f = noise_correction(K, 1, g.diameter() + 1, sw, g);
    Eigen::MatrixXd stacked(6, 3);
    stacked.topRows(3).setIdentity();
    stacked.bottomRows(3) = Kmat;
    CHECK(f.isApprox(svec(sw * sw * stacked * stacked.transpose()), 1e-12));
  }
}

TEST_CASE("scalar LSTDQ recovers the analytic H") {
  // A single-agent system; with kappa = 1 the truncation is exact.
  LinearSystem sys = scalar_system(0.9, 1.0, 1.0, 1.0);
  const PolicyMatrix K0 = PolicyMatrix::truncated(Eigen::MatrixXd::Constant(1, 1, -0.5), 1);
  const QMatrixBlocks H = qfun_matrix_global(sys, K0);
  const Eigen::MatrixXd H_true = H.assembled();

  double total_rel = 0.0;
  const int seeds = 5;
  for (int s = 0; s < seeds; ++s) {
    const auto datasets = make_datasets(sys, K0, 50000, 1.0, 100 + s, 1);
    const auto actions = on_policy_actions(datasets, K0, sys.graph, 1);
    const LstdqResult res = lstdq_estimate(datasets[0], actions[0], K0, 1.0, sys.graph);
    total_rel += (smat(res.h) - H_true).norm() / H_true.norm();
    CHECK_FALSE(res.ill_conditioned);
  }
  CHECK(total_rel / seeds <= 0.05);
}

TEST_CASE("degenerate data yields the minimum-norm solution and a warning") {
  const NetworkGraph g1(1, {}, {1}, {1});
  LocalDataset D;
  D.agent = 0;
  D.kappa = 1;
  D.members = {0};
  D.state_dims = {1};
  D.input_dims = {1};
  D.x_loc = Eigen::MatrixXd::Constant(1, 20, 1.0);  // all samples identical
  D.u_loc = Eigen::MatrixXd::Constant(1, 20, 0.5);
  D.cost = Eigen::VectorXd::Constant(20, 1.25);
  const PolicyMatrix K = PolicyMatrix::truncated(Eigen::MatrixXd::Constant(1, 1, 0.5), 1);
  const Eigen::MatrixXd actions = Eigen::MatrixXd::Constant(1, 20, 0.5);
  const LstdqResult res = lstdq_estimate(D, actions, K, 0.0, g1);
  CHECK(res.ill_conditioned);
  CHECK(res.h.allFinite());
  // Minimum-norm solution of a rank-one system: h lies along M's row space.
  const Eigen::VectorXd phi = local_features(Eigen::VectorXd::Constant(1, 1.0),
                                             Eigen::VectorXd::Constant(1, 0.5));
  const double scale = res.h.dot(phi) / phi.dot(phi);
  CHECK(res.h.isApprox(scale * phi, 1e-9));
}

TEST_CASE("estimator consistency improves with more samples") {
  // 3-agent path at full information; error against the analytic truncated
  // assembly must decrease across T_c = 1e3, 1e4 (unit-scale version of the
  // acceptance sweep).
  auto gen = make_gen(44);
  const NetworkGraph g = testutil::path3();
  const LinearSystem sys = random_network_system(gen, g, 0.6);
  const int kappa = g.diameter() + 1;
  const PolicyMatrix K0 = PolicyMatrix::truncated(-0.1 * Eigen::MatrixXd::Identity(3, 3), kappa);
  const QEstimate exact = exact_truncated_q(sys, K0, kappa);

  const auto datasets = make_datasets(sys, K0, 10000, 1.0, 5, kappa);
  double prev = std::numeric_limits<double>::infinity();
  for (long T_c : {1000L, 10000L}) {
    const QEstimate est = estimate_q(datasets, K0, T_c, kappa, sys.sigma_w, g);
    const double err = (est.H11 - exact.H11).norm() + (est.H12 - exact.H12).norm() +
                       (est.H22 - exact.H22).norm();
    CHECK(err < prev);
    prev = err;
  }
}

TEST_CASE("single agent estimate is its own assembly") {
  LinearSystem sys = scalar_system(0.9, 1.0, 1.0, 1.0);
  const PolicyMatrix K0 = PolicyMatrix::truncated(Eigen::MatrixXd::Constant(1, 1, -0.5), 1);
  const auto datasets = make_datasets(sys, K0, 4000, 1.0, 11, 1);
  const QEstimate est = estimate_q(datasets, K0, 4000, 1, 1.0, sys.graph);
  const Eigen::MatrixXd H_loc = est.H_local[0];
  CHECK(est.H11(0, 0) == H_loc(0, 0));
  CHECK(est.H12(0, 0) == H_loc(0, 1));
  CHECK(est.H22(0, 0) == H_loc(1, 1));
}

TEST_CASE("assembled blocks vanish outside the 2kappa-1 neighborhood") {
  auto gen = make_gen(45);
  const NetworkGraph g = NetworkGraph::grid(3, 3);
  const LinearSystem sys = random_network_system(gen, g, 0.7);
  const int kappa = 2;
  const PolicyMatrix K0 = PolicyMatrix::diagonal(g, -0.2);
  const auto datasets = make_datasets(sys, K0, 800, 1.0, 13, kappa);
  const QEstimate est = estimate_q(datasets, K0, 800, kappa, sys.sigma_w, g);
  for (int l = 0; l < 9; ++l) {
    for (int j = 0; j < 9; ++j) {
      if (g.distance(l, j) < 2 * kappa - 1) continue;
      CHECK(est.H11(l, j) == 0.0);
      CHECK(est.H12(l, j) == 0.0);
      CHECK(est.H22(l, j) == 0.0);
    }
  }
  // PSD projection delivered PSD local estimates.
  for (const auto& Hi : est.H_local) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Hi);
    CHECK(es.eigenvalues().minCoeff() >= -1e-10);
  }
}

TEST_CASE("exact-feature assembly matches the truncation oracle") {
  auto gen = make_gen(46);
  const NetworkGraph g = NetworkGraph::grid(3, 3);
  const LinearSystem sys = random_network_system(gen, g, 0.6);
  const PolicyMatrix K = truncate_policy(-0.1 * Eigen::MatrixXd::Identity(9, 9), 2, g);

  SUBCASE("equals the summed Definition-4 truncations") {
    const QEstimate est = exact_truncated_q(sys, K, 2);
    Eigen::MatrixXd H11 = Eigen::MatrixXd::Zero(9, 9);
    Eigen::MatrixXd H12 = Eigen::MatrixXd::Zero(9, 9);
    Eigen::MatrixXd H22 = Eigen::MatrixXd::Zero(9, 9);
    for (int i = 0; i < 9; ++i) {
      const QMatrixBlocks Hi = qfun_matrix_Hi(sys, K, i);
      H11 += truncate_away_from(Hi.H11, i, 2, g, Dim::State, Dim::State);
      H12 += truncate_away_from(Hi.H12, i, 2, g, Dim::State, Dim::Input);
      H22 += truncate_away_from(Hi.H22, i, 2, g, Dim::Input, Dim::Input);
    }
    CHECK(est.H11.isApprox(H11, 1e-12));
    CHECK(est.H12.isApprox(H12, 1e-12));
    CHECK(est.H22.isApprox(H22, 1e-12));
  }
  SUBCASE("recovers the full H beyond the diameter") {
    const int kappa = g.diameter() + 1;
    const PolicyMatrix Kfull = truncate_policy(K.K, kappa, g);
    const QEstimate est = exact_truncated_q(sys, Kfull, kappa);
    const QMatrixBlocks H = qfun_matrix_global(sys, Kfull);
    CHECK(est.H11.isApprox(H.H11, 1e-9));
    CHECK(est.H12.isApprox(H.H12, 1e-9));
    CHECK(est.H22.isApprox(H.H22, 1e-9));
  }
}

TEST_CASE("svec conjugation matches direct congruence") {
  auto gen = make_gen(47);
  for (int trial = 0; trial < 10; ++trial) {
    const long D = 2 + static_cast<long>(gen() % 4);
    const long q = 2 + static_cast<long>(gen() % 4);
    const Eigen::MatrixXd W = random_matrix(gen, D, q);
    const Eigen::MatrixXd G = svec_conjugation(W);
    const Eigen::VectorXd y = random_matrix(gen, q, 1);
    const Eigen::MatrixXd Y = y * y.transpose();
    CHECK((G * svec(Y)).isApprox(svec(W * Y * W.transpose()), 1e-12));
  }
}

TEST_CASE("cached estimator equals the reference LSTDQ path") {
  auto gen = make_gen(48);
  const NetworkGraph g = testutil::path3();
  const LinearSystem sys = random_network_system(gen, g, 0.6);
  const int kappa = 2;
  const PolicyMatrix K0 = PolicyMatrix::diagonal(g, -0.15);
  const auto datasets = make_datasets(sys, K0, 2000, 0.8, 19, kappa);
  const PolicyMatrix K = truncate_policy(0.2 * random_matrix(gen, 3, 3), kappa, g);

  const QEstimate cached = estimate_q(datasets, K, 2000, kappa, sys.sigma_w, g);
  const auto actions = on_policy_actions(datasets, K, g, kappa);
  for (int i = 0; i < 3; ++i) {
    const LstdqResult ref = lstdq_estimate(datasets[i], actions[i], K, sys.sigma_w, g);
    CHECK(cached.h_hat[i].isApprox(ref.h, 1e-8));
    CHECK(cached.cond[i] == doctest::Approx(ref.cond).epsilon(1e-6));
  }
}

TEST_CASE("critic estimates depend only on the 2kappa-1 state cone") {
  auto gen = make_gen(49);
  const NetworkGraph g = NetworkGraph::grid(3, 3);
  const LinearSystem sys = random_network_system(gen, g, 0.7);
  const int kappa = 1;  // cone N_i^{2k-1} = N_i^1 = {i}
  const PolicyMatrix K0 = PolicyMatrix::diagonal(g, -0.2);
  RolloutConfig rc;
  rc.T = 501;
  rc.sigma_eta = 1.0;
  rc.seed = 23;
  rc.stream_domain = stream::critic_data;
  const Trajectory traj = rollout(sys, K0, rc);

  Trajectory tampered = traj;
  tampered.states.row(8).setConstant(3.0);  // far from agent 0
  tampered.inputs.row(8).setConstant(-3.0);
  tampered.agent_costs.row(8).setConstant(1.0);

  const auto d1 = collect_local_datasets(traj, g, kappa);
  const auto d2 = collect_local_datasets(tampered, g, kappa);
  const QEstimate e1 = estimate_q(d1, K0, 500, kappa, sys.sigma_w, g);
  const QEstimate e2 = estimate_q(d2, K0, 500, kappa, sys.sigma_w, g);
  CHECK(e1.h_hat[0] == e2.h_hat[0]);  // bitwise: the data never reaches agent 0

  // Sanity: the tampering does change the tampered agent's own estimate.
  CHECK(e1.h_hat[8] != e2.h_hat[8]);
}

TEST_CASE("determinism across worker counts") {
  auto gen = make_gen(50);
  const NetworkGraph g = NetworkGraph::grid(3, 3);
  const LinearSystem sys = random_network_system(gen, g, 0.7);
  const int kappa = 2;
  const PolicyMatrix K0 = PolicyMatrix::diagonal(g, -0.2);
  const auto datasets = make_datasets(sys, K0, 600, 1.0, 29, kappa);
  const QEstimate a = estimate_q(datasets, K0, 600, kappa, sys.sigma_w, g, 1);
  const QEstimate b = estimate_q(datasets, K0, 600, kappa, sys.sigma_w, g, 4);
  CHECK(a.H11 == b.H11);
  CHECK(a.H12 == b.H12);
  CHECK(a.H22 == b.H22);
  for (int i = 0; i < 9; ++i) CHECK(a.h_hat[i] == b.h_hat[i]);
}
