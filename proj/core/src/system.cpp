#include "netlqr/system.hpp"

#include <Eigen/Eigenvalues>

#include "netlqr/errors.hpp"

namespace netlqr {

Eigen::MatrixXd LinearSystem::S_i(int agent) const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(S.rows(), S.cols());
  graph.block(out, agent, agent, Dim::State, Dim::State) =
      graph.block(S, agent, agent, Dim::State, Dim::State);
  return out;
}

Eigen::MatrixXd LinearSystem::R_i(int agent) const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(R.rows(), R.cols());
  graph.block(out, agent, agent, Dim::Input, Dim::Input) =
      graph.block(R, agent, agent, Dim::Input, Dim::Input);
  return out;
}

void LinearSystem::validate() const {
  const int n = graph.state_dim();
  const int m = graph.input_dim();
  if (A.rows() != n || A.cols() != n) throw ArgumentError("LinearSystem: A must be n x n");
  if (B.rows() != n || B.cols() != m) throw ArgumentError("LinearSystem: B must be n x m");
  if (S.rows() != n || S.cols() != n) throw ArgumentError("LinearSystem: S must be n x n");
  if (R.rows() != m || R.cols() != m) throw ArgumentError("LinearSystem: R must be m x m");
  if (sigma_w < 0) throw ArgumentError("LinearSystem: sigma_w must be >= 0");

  const double s_scale = 1.0 + S.norm();
  const double r_scale = 1.0 + R.norm();
  if ((S - S.transpose()).norm() > 1e-10 * s_scale) {
    throw ArgumentError("LinearSystem: S must be symmetric");
  }
  if ((R - R.transpose()).norm() > 1e-10 * r_scale) {
    throw ArgumentError("LinearSystem: R must be symmetric");
  }
  for (int i = 0; i < graph.num_agents(); ++i) {
    for (int j = 0; j < graph.num_agents(); ++j) {
      if (i == j) continue;
      if (graph.block(S, i, j, Dim::State, Dim::State).norm() > 0 ||
          graph.block(R, i, j, Dim::Input, Dim::Input).norm() > 0) {
        throw ArgumentError("LinearSystem: S and R must be block diagonal");
      }
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_s(S);
  if (es_s.eigenvalues().minCoeff() < -1e-10 * s_scale) {
    throw ArgumentError("LinearSystem: S must be positive semidefinite");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_r(R);
  if (es_r.eigenvalues().minCoeff() <= 0) {
    throw ArgumentError("LinearSystem: R must be positive definite");
  }
}

PolicyMatrix PolicyMatrix::unrestricted(Eigen::MatrixXd K) {
  return PolicyMatrix{std::move(K), std::nullopt};
}

PolicyMatrix PolicyMatrix::truncated(Eigen::MatrixXd K, int kappa) {
  return PolicyMatrix{std::move(K), kappa};
}

PolicyMatrix PolicyMatrix::diagonal(const NetworkGraph& g, double gain) {
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(g.input_dim(), g.state_dim());
  for (int i = 0; i < g.num_agents(); ++i) {
    if (g.input_dim(i) != g.state_dim(i)) {
      throw ArgumentError("PolicyMatrix::diagonal needs m_i == n_i for every agent");
    }
    K.block(g.input_offset(i), g.state_offset(i), g.input_dim(i), g.state_dim(i)) =
        gain * Eigen::MatrixXd::Identity(g.input_dim(i), g.state_dim(i));
  }
  return PolicyMatrix{std::move(K), 1};
}

bool in_policy_class(const Eigen::MatrixXd& K, int kappa, const NetworkGraph& g) {
  if (kappa <= 0) throw ArgumentError("in_policy_class: kappa must be >= 1");
  if (K.rows() != g.input_dim() || K.cols() != g.state_dim()) {
    throw ArgumentError("in_policy_class: gain does not match the partition");
  }
  for (int i = 0; i < g.num_agents(); ++i) {
    for (int j = 0; j < g.num_agents(); ++j) {
      if (g.distance(i, j) < kappa) continue;
      if (!g.block(K, i, j, Dim::Input, Dim::State).isZero(0.0)) return false;
    }
  }
  return true;
}

void validate_policy(const PolicyMatrix& K, const NetworkGraph& g) {
  if (K.K.rows() != g.input_dim() || K.K.cols() != g.state_dim()) {
    throw ArgumentError("PolicyMatrix: gain does not match the partition");
  }
  if (K.kappa && !in_policy_class(K.K, *K.kappa, g)) {
    throw ArgumentError("PolicyMatrix: gain is not kappa-sparse for its declared kappa");
  }
}

Eigen::MatrixXd closed_loop(const LinearSystem& sys, const PolicyMatrix& K) {
  return sys.A + sys.B * K.K;
}

Eigen::MatrixXd stage_cost_matrix(const LinearSystem& sys, const PolicyMatrix& K) {
  return sys.S + K.K.transpose() * sys.R * K.K;
}

}  // namespace netlqr
