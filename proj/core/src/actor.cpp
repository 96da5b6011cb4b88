#include "netlqr/actor.hpp"

#include <cmath>

#include "netlqr/errors.hpp"
#include "netlqr/linalg.hpp"
#include "netlqr/parallel.hpp"
#include "netlqr/simulator.hpp"

namespace netlqr {

namespace {

/// [H22 K]_il assembled from H22 columns and gain rows inside N_i^{2kappa-1}.
Eigen::MatrixXd h22k_block(const QEstimate& H, const PolicyMatrix& K, int i, int l,
                           const NetworkGraph& g) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(g.input_dim(i), g.state_dim(l));
  for (int r : g.neighborhood(i, 2 * H.kappa - 1)) {
    if (g.distance(r, l) >= H.kappa) continue;  // [K]_rl = 0 outside N_r^kappa
    out.noalias() += g.block(H.H22, i, r, Dim::Input, Dim::Input) *
                     g.block(K.K, r, l, Dim::Input, Dim::State);
  }
  return out;
}

/// Shared core of the per-sample and averaged gradients: block (i, j) of the
/// truncated-Q gradient against an arbitrary symmetric moment matrix.
Eigen::MatrixXd gradient_block(const QEstimate& H, const PolicyMatrix& K,
                               const Eigen::MatrixXd& moment, int i, int j,
                               const NetworkGraph& g) {
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(g.input_dim(i), g.state_dim(j));
  for (int l : g.neighborhood(i, 2 * H.kappa - 1)) {
    // [H12']_il = ([H12]_li)'
    G.noalias() += 2.0 * g.block(H.H12, l, i, Dim::State, Dim::Input).transpose() *
                   g.block(moment, l, j, Dim::State, Dim::State);
  }
  for (int l : g.neighborhood(i, 3 * H.kappa - 2)) {
    G.noalias() +=
        2.0 * h22k_block(H, K, i, l, g) * g.block(moment, l, j, Dim::State, Dim::State);
  }
  return G;
}

}  // namespace

Eigen::MatrixXd partial_gradient(const QEstimate& H, const PolicyMatrix& K,
                                 const Eigen::VectorXd& x, int i, int j,
                                 const NetworkGraph& g) {
  if (g.distance(i, j) >= H.kappa) {
    throw ArgumentError("partial_gradient: block (" + std::to_string(i) + ", " +
                        std::to_string(j) + ") is outside the policy class");
  }
  if (x.size() != g.state_dim()) throw ArgumentError("partial_gradient: bad state size");
  // Only the blocks [xx']_lj with l in the actor's state cone are formed.
  Eigen::MatrixXd moment = Eigen::MatrixXd::Zero(g.state_dim(), g.state_dim());
  for (int l : g.neighborhood(i, 3 * H.kappa - 2)) {
    g.block(moment, l, j, Dim::State, Dim::State) =
        g.segment(x, l, Dim::State) * g.segment(x, j, Dim::State).transpose();
  }
  return gradient_block(H, K, moment, i, j, g);
}

Eigen::MatrixXd gradient_from_moment(const QEstimate& H, const PolicyMatrix& K,
                                     const Eigen::MatrixXd& second_moment,
                                     const NetworkGraph& g) {
  if (second_moment.rows() != g.state_dim() || second_moment.cols() != g.state_dim()) {
    throw ArgumentError("gradient_from_moment: moment matrix has wrong size");
  }
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(g.input_dim(), g.state_dim());
  for (int i = 0; i < g.num_agents(); ++i) {
    for (int j : g.neighborhood(i, H.kappa)) {
      g.block(G, i, j, Dim::Input, Dim::State) =
          gradient_block(H, K, second_moment, i, j, g);
    }
  }
  return G;
}

Eigen::MatrixXd stationary_covariance(const LinearSystem& sys, const PolicyMatrix& K) {
  const Eigen::MatrixXd L = closed_loop(sys, K);
  const double var = sys.sigma_w * sys.sigma_w;
  // Sigma = L Sigma L' + var I is the transposed Lyapunov equation.
  return solve_lyapunov(L.transpose(),
                        var * Eigen::MatrixXd::Identity(L.rows(), L.cols()));
}

Eigen::MatrixXd exact_policy_gradient(const LinearSystem& sys, const PolicyMatrix& K) {
  const Eigen::MatrixXd P = value_matrix_global(sys, K);
  const Eigen::MatrixXd Sigma = stationary_covariance(sys, K);
  const Eigen::MatrixXd BtP = sys.B.transpose() * P;
  return 2.0 * ((sys.R + BtP * sys.B) * K.K + BtP * sys.A) * Sigma;
}

ActorResult update_policy(const PolicyMatrix& K, const QEstimate& H,
                          const LinearSystem& sys, long T_a, double alpha, uint64_t seed,
                          uint32_t stream_domain, long burn_in, int jobs) {
  if (alpha < 0) throw ArgumentError("update_policy: alpha must be >= 0");
  if (T_a < 1) throw ArgumentError("update_policy: T_a must be >= 1");
  const NetworkGraph& g = sys.graph;
  if (!in_policy_class(K.K, H.kappa, g)) {
    throw ArgumentError("update_policy: gain is not kappa-sparse for the Q-estimate");
  }

  RolloutConfig rc;
  rc.T = T_a;
  rc.sigma_eta = 0.0;  // on-policy
  rc.seed = seed;
  rc.stream_domain = stream_domain;
  rc.burn_in = burn_in;
  const Trajectory traj = rollout(sys, K, rc);

  // Time-ordered accumulation keeps the average deterministic.
  Eigen::MatrixXd moment = Eigen::MatrixXd::Zero(g.state_dim(), g.state_dim());
  for (long t = 0; t < T_a; ++t) {
    moment.noalias() += traj.states.col(t) * traj.states.col(t).transpose();
  }
  moment /= static_cast<double>(T_a);

  ActorResult out;
  out.T_a = T_a;
  out.gradient = Eigen::MatrixXd::Zero(g.input_dim(), g.state_dim());
  const int N = g.num_agents();
  parallel_for(N, jobs, [&](int i) {
    for (int j : g.neighborhood(i, H.kappa)) {
      g.block(out.gradient, i, j, Dim::Input, Dim::State) =
          gradient_block(H, K, moment, i, j, g);
    }
  });
  out.grad_norm = out.gradient.norm();
  Eigen::MatrixXd next = K.K - alpha * out.gradient;
  out.next = PolicyMatrix::truncated(std::move(next), H.kappa);
  return out;
}

}  // namespace netlqr
