#pragma once

#include <Eigen/Core>
#include <vector>

#include "netlqr/simulator.hpp"
#include "netlqr/system.hpp"

namespace netlqr {

/// phi(x, u) = svec((x; u)(x; u)'), the quadratic feature of a stacked local
/// state-action pair.
Eigen::VectorXd local_features(const Eigen::VectorXd& x_loc, const Eigen::VectorXd& u_loc);

/// Agent j's own on-policy action sequence u_j^K(t) = sum_{l in N_j^kappa}
/// [K]_jl x_l(t), computed from nothing but j's local dataset and j's own
/// gain row. Returns an m_j x samples matrix.
Eigen::MatrixXd own_policy_actions(const LocalDataset& D_j, const PolicyMatrix& K,
                                   const NetworkGraph& g);

/// The share-then-assemble protocol: every agent computes its own action
/// sequence, then agent i stacks the sequences shared by j in N_i^kappa.
/// Returns one (m_loc_i x samples) matrix per agent. Throws ArgumentError if
/// K is not kappa-sparse (it would need states nobody can see).
std::vector<Eigen::MatrixXd> on_policy_actions(const std::vector<LocalDataset>& datasets,
                                               const PolicyMatrix& K,
                                               const NetworkGraph& g, int kappa);

/// f_i = svec(sigma_w^2 (I; K_loc)(I; K_loc)') with K_loc the neighborhood-
/// local gain block [K]_{N_i^kappa, N_i^kappa}.
Eigen::VectorXd noise_correction(const PolicyMatrix& K, int agent, int kappa,
                                 double sigma_w, const NetworkGraph& g);

struct LstdqResult {
  Eigen::VectorXd h;         // svec-parameter estimate
  double cond = 0.0;         // singular value ratio of the summed matrix
  bool ill_conditioned = false;
};

/// Reference LSTDQ solve for one agent:
///   h = (sum_t phi(t) (phi(t) - psi(t+1) + f_i)')^+  sum_t phi(t) c_i(t)
/// with psi built from next-step states and the assembled on-policy actions.
/// u_pol_loc must be on_policy_actions(...)[agent]. Sums run over the first
/// samples-1 transitions of the dataset.
LstdqResult lstdq_estimate(const LocalDataset& D_i, const Eigen::MatrixXd& u_pol_loc,
                           const PolicyMatrix& K, double sigma_w, const NetworkGraph& g);

/// Per-agent estimates plus the assembled global truncated Q-matrix.
struct QEstimate {
  int kappa = 1;
  std::vector<Eigen::VectorXd> h_hat;       // per-agent svec estimates (local coords)
  std::vector<Eigen::MatrixXd> H_local;     // PSD-projected smat(h_hat[i])
  Eigen::MatrixXd H11, H12, H22;            // assembled; zero outside N_l^{2kappa-1}
  Eigen::VectorXd cond;                     // per-agent condition numbers
  std::vector<uint8_t> ill_conditioned;
  double max_cond() const;
};

/// Precomputed per-agent sample moments. Building the workspaces costs one
/// pass over the data; estimating the Q-function for a new policy afterwards
/// costs only a per-agent linear solve, which is what makes policy iteration
/// with a fixed off-policy dataset cheap.
class CriticEstimator {
 public:
  /// Uses the first T_c transitions of each dataset (T_c + 1 pairs needed).
  CriticEstimator(const std::vector<LocalDataset>& datasets, long T_c, int kappa,
                  double sigma_w, const NetworkGraph& g, int jobs = 1);

  /// Algorithm: per-agent LSTDQ, PSD projection, neighborhood assembly.
  QEstimate estimate(const PolicyMatrix& K, int jobs = 1) const;

  long T_c() const { return T_c_; }

 private:
  struct Workspace {
    int agent = 0;
    std::vector<int> members;      // N_i^kappa
    std::vector<int> ext_members;  // N_i^{2kappa-1}: the critic's state cone
    int n_loc = 0, m_loc = 0, n_ext = 0;
    Eigen::MatrixXd gram_phi;  // sum phi phi'
    Eigen::MatrixXd cross;     // sum phi(t) svec(y(t+1) y(t+1)')'
    Eigen::VectorXd phi_sum;   // sum phi(t)
    Eigen::VectorXd rhs;       // sum phi(t) c_i(t)
  };

  const NetworkGraph& graph_;
  int kappa_;
  double sigma_w_;
  long T_c_;
  std::vector<Workspace> workspaces_;
};

/// One-shot convenience: build workspaces, estimate once.
QEstimate estimate_q(const std::vector<LocalDataset>& datasets, const PolicyMatrix& K,
                     long T_c, int kappa, double sigma_w, const NetworkGraph& g,
                     int jobs = 1);

/// Exact-feature variant: per-agent analytic H_i, truncated away from i at
/// kappa, assembled the same way the sampled estimates are. Used by exact-Q
/// learning and as the critic's consistency oracle.
QEstimate exact_truncated_q(const LinearSystem& sys, const PolicyMatrix& K, int kappa,
                            int jobs = 1);

/// The matrix G with svec(W Y W') = G svec(Y) for symmetric Y; W maps the
/// extended state to the stacked local state-action pair.
Eigen::MatrixXd svec_conjugation(const Eigen::MatrixXd& W);

}  // namespace netlqr
