#pragma once

#include <Eigen/Core>
#include <optional>

#include "netlqr/graph.hpp"

namespace netlqr {

/// The networked plant x(t+1) = A x(t) + B u(t) + w(t), w ~ N(0, sigma_w^2 I),
/// with per-agent decoupled stage costs x_i' [S]_ii x_i + u_i' [R]_ii u_i.
struct LinearSystem {
  NetworkGraph graph;
  Eigen::MatrixXd A;  // n x n
  Eigen::MatrixXd B;  // n x m
  Eigen::MatrixXd S;  // n x n, block diagonal, PSD
  Eigen::MatrixXd R;  // m x m, block diagonal, PD
  double sigma_w = 1.0;

  int state_dim() const { return graph.state_dim(); }
  int input_dim() const { return graph.input_dim(); }

  /// Zero-padded S_i (only the (i,i) block survives).
  Eigen::MatrixXd S_i(int agent) const;
  /// Zero-padded R_i.
  Eigen::MatrixXd R_i(int agent) const;

  /// Checks dimensions, symmetry, block-diagonality of S and R, S >= 0 and
  /// R > 0 (eigenvalue tests). Throws ArgumentError on violation.
  void validate() const;
};

/// Static gain u = K x with optional membership in the truncated class K^kappa.
struct PolicyMatrix {
  Eigen::MatrixXd K;               // m x n
  std::optional<int> kappa;        // nullopt = unrestricted

  static PolicyMatrix unrestricted(Eigen::MatrixXd K);
  static PolicyMatrix truncated(Eigen::MatrixXd K, int kappa);
  /// -c * I scaled gain (requires m_i == n_i per agent); lies in K^1.
  static PolicyMatrix diagonal(const NetworkGraph& g, double gain);
};

/// True iff every block [K]_{ij} with j outside N_i^kappa is exactly zero.
bool in_policy_class(const Eigen::MatrixXd& K, int kappa, const NetworkGraph& g);

/// Throws ArgumentError when the policy's declared kappa does not hold.
void validate_policy(const PolicyMatrix& K, const NetworkGraph& g);

/// A + B K.
Eigen::MatrixXd closed_loop(const LinearSystem& sys, const PolicyMatrix& K);

/// S + K' R K, the stage-cost matrix of the closed loop.
Eigen::MatrixXd stage_cost_matrix(const LinearSystem& sys, const PolicyMatrix& K);

}  // namespace netlqr
