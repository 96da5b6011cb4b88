#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "netlqr/critic.hpp"
#include "netlqr/system.hpp"

namespace netlqr {

enum class QMode { EstimatedQ, ExactQ };

struct LearnerConfig {
  int kappa = 1;
  Eigen::MatrixXd K0;        // initial stabilizing gain, must lie in K^kappa
  int k_max = 0;             // policy iterations
  long T_c = 1;              // critic trajectory length (samples used in the sums)
  double sigma_eta = 0.0;    // exploration noise std for the critic data
  long T_a = 1;              // actor trajectory length
  double alpha = 0.0;        // actor step size
  double sigma_w = 1.0;      // plant noise std (copied onto the system)
  uint64_t seed = 0;
  QMode mode = QMode::EstimatedQ;
  long burn_in = 500;
  int jobs = 1;

  void validate() const;     // throws ConfigError on bad fields
};

struct IterationRecord {
  int iter = 0;
  Eigen::MatrixXd K;       // policy at this iteration
  double J = 0.0;          // analytic average cost of K
  double grad_norm = 0.0;  // gradient used to leave this iterate (0 on the last)
  double max_cond = 0.0;   // worst critic condition number this iteration
};

struct PhaseTimes {
  double collect_s = 0.0;
  double critic_s = 0.0;
  double actor_s = 0.0;
  double eval_s = 0.0;
};

struct LearningRun {
  std::vector<IterationRecord> records;  // k_max + 1 on success
  PolicyMatrix final_policy;
  bool aborted = false;
  int abort_iteration = -1;
  std::string abort_reason;
  int critic_rollouts = 0;  // data collections performed (always 1 per run)
  QEstimate last_estimate;  // Q-estimate of the last completed iteration
  bool has_estimate = false;
  PhaseTimes times;
};

/// Runs the actor-critic loop: collects one off-policy dataset under K0 with
/// exploration noise, then alternates Q-estimation (sampled or analytic
/// truncated, per cfg.mode) and the gradient step, k_max times.
///
/// An unstable K0 throws ConfigError before any work happens. If an
/// intermediate policy destabilizes the plant the run returns with
/// aborted = true, the offending iteration index, and every record up to the
/// last stable policy.
LearningRun learn(const LinearSystem& sys, const LearnerConfig& cfg);

/// J(K) / J(K*) - 1 with K* from the Riccati oracle.
double relative_cost(const LinearSystem& sys, const PolicyMatrix& K);

/// Same with a precomputed optimal cost (saves repeated Riccati solves).
double relative_cost(const LinearSystem& sys, const PolicyMatrix& K, double J_opt);

}  // namespace netlqr
