#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "netlqr/rng.hpp"
#include "netlqr/system.hpp"

namespace netlqr {

/// One stochastic rollout of the plant. Columns are time steps; states hold
/// one more column than inputs (the state after the last recorded input).
struct Trajectory {
  Eigen::MatrixXd states;       // n x (T+1)
  Eigen::MatrixXd inputs;       // m x T
  Eigen::MatrixXd agent_costs;  // N x T, c_i(t) = x_i'[S]_ii x_i + u_i'[R]_ii u_i
  uint64_t seed = 0;
  uint32_t stream_domain = 0;
  std::string policy_id;

  long length() const { return inputs.cols(); }
  /// Sum of per-agent stage costs at step t.
  double total_cost(long t) const { return agent_costs.col(t).sum(); }
};

struct RolloutConfig {
  long T = 1;                 // recorded transitions
  double sigma_eta = 0.0;     // exploration noise std (u = Kx + eta)
  uint64_t seed = 0;
  uint32_t stream_domain = stream::generic;
  long burn_in = 500;         // discarded steps before recording starts
  Eigen::VectorXd x0;         // empty = zero state
  std::string policy_id;
};

/// Simulates x(t+1) = A x(t) + B(K x(t) + eta(t)) + w(t) with
/// w ~ N(0, sigma_w^2 I) and eta ~ N(0, sigma_eta^2 I), discarding the first
/// burn_in steps. Noise is drawn from per-(agent, time) counter streams, so
/// equal seeds give bit-identical trajectories. States larger than 1e9 in any
/// coordinate raise InstabilityError naming the offending step.
Trajectory rollout(const LinearSystem& sys, const PolicyMatrix& K, const RolloutConfig& cfg);

/// The kappa-local view agent i is allowed to keep: neighborhood states and
/// inputs in sorted agent order, plus the agent's own stage costs. Data of
/// agents outside N_i^kappa is never materialized here.
struct LocalDataset {
  int agent = 0;
  int kappa = 1;
  std::vector<int> members;     // N_i^kappa, ascending
  std::vector<int> state_dims;  // per member
  std::vector<int> input_dims;
  Eigen::MatrixXd x_loc;        // (sum n_j) x (T_c + 1)
  Eigen::MatrixXd u_loc;        // (sum m_j) x (T_c + 1)
  Eigen::VectorXd cost;         // T_c + 1 entries of c_i(t)

  long samples() const { return x_loc.cols(); }  // T_c + 1
  int state_dim() const { return static_cast<int>(x_loc.rows()); }
  int input_dim() const { return static_cast<int>(u_loc.rows()); }
  /// Row offset of member j's state inside x_loc; j must be a member.
  int member_state_offset(int agent_id) const;
  int member_input_offset(int agent_id) const;
};

/// Projects a global trajectory onto every agent's kappa-neighborhood.
/// Requires at least T_c + 1 = traj.length() columns; the datasets keep the
/// first traj.length() (x, u) pairs, i.e. T_c = traj.length() - 1.
std::vector<LocalDataset> collect_local_datasets(const Trajectory& traj,
                                                 const NetworkGraph& g, int kappa);

}  // namespace netlqr
