#pragma once

#include <Eigen/Core>

#include "netlqr/critic.hpp"
#include "netlqr/system.hpp"

namespace netlqr {

/// One sample of the truncated Q-gradient block for gain block (i, j),
/// j in N_i^kappa:
///   dQ/d[K]_ij = 2 sum_{l in N_i^{2k-1}} [H12']_il [xx']_lj
///              + 2 sum_{l in N_i^{3k-2}} [H22 K]_il [xx']_lj,
/// where [H22 K]_il is formed from gain rows within N_i^{2kappa-1} only.
/// Throws ArgumentError when j is outside N_i^kappa.
Eigen::MatrixXd partial_gradient(const QEstimate& H, const PolicyMatrix& K,
                                 const Eigen::VectorXd& x, int i, int j,
                                 const NetworkGraph& g);

/// Same sums evaluated against a fixed state second-moment matrix instead of
/// a single sample; returns the full m x n gradient on the K^kappa pattern
/// (exact zeros elsewhere). This is what averaging the per-sample blocks over
/// a trajectory computes, since the expression is linear in xx'.
Eigen::MatrixXd gradient_from_moment(const QEstimate& H, const PolicyMatrix& K,
                                     const Eigen::MatrixXd& second_moment,
                                     const NetworkGraph& g);

/// Model-based oracle: grad J = 2((R + B'PB)K + B'PA) Sigma_K with Sigma_K
/// the stationary state covariance. Test/exact-mode only.
Eigen::MatrixXd exact_policy_gradient(const LinearSystem& sys, const PolicyMatrix& K);

/// Stationary state covariance Sigma = sigma_w^2 I + (A+BK) Sigma (A+BK)'.
Eigen::MatrixXd stationary_covariance(const LinearSystem& sys, const PolicyMatrix& K);

struct ActorResult {
  PolicyMatrix next;          // K - alpha * G, still in K^kappa
  Eigen::MatrixXd gradient;   // the averaged estimate G
  double grad_norm = 0.0;     // Frobenius
  long T_a = 0;
};

/// One policy-gradient step: rolls out T_a on-policy samples (sigma_eta = 0)
/// after burn-in, accumulates the state second moment in time order, and
/// descends every block (i, j in N_i^kappa) with step alpha. Instability
/// during the rollout propagates as InstabilityError.
ActorResult update_policy(const PolicyMatrix& K, const QEstimate& H,
                          const LinearSystem& sys, long T_a, double alpha, uint64_t seed,
                          uint32_t stream_domain, long burn_in = 500, int jobs = 1);

}  // namespace netlqr
