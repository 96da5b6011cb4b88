#include "netlqr/simulator.hpp"

#include <algorithm>
#include <cmath>

#include "netlqr/errors.hpp"

namespace netlqr {

namespace {
constexpr double kDivergenceThreshold = 1e9;
}

Trajectory rollout(const LinearSystem& sys, const PolicyMatrix& K,
                   const RolloutConfig& cfg) {
  if (cfg.T < 1) throw ArgumentError("rollout: T must be >= 1");
  if (cfg.burn_in < 0) throw ArgumentError("rollout: burn_in must be >= 0");
  if (cfg.sigma_eta < 0) throw ArgumentError("rollout: sigma_eta must be >= 0");
  const NetworkGraph& g = sys.graph;
  const int n = g.state_dim();
  const int m = g.input_dim();
  if (K.K.rows() != m || K.K.cols() != n) {
    throw ArgumentError("rollout: gain does not match the system");
  }

  Eigen::VectorXd x = cfg.x0.size() == 0 ? Eigen::VectorXd::Zero(n) : cfg.x0;
  if (x.size() != n) throw ArgumentError("rollout: x0 has wrong dimension");

  const CounterRng rng(cfg.seed, cfg.stream_domain);
  const int N = g.num_agents();

  Trajectory traj;
  traj.states.resize(n, cfg.T + 1);
  traj.inputs.resize(m, cfg.T);
  traj.agent_costs.resize(N, cfg.T);
  traj.seed = cfg.seed;
  traj.stream_domain = cfg.stream_domain;
  traj.policy_id = cfg.policy_id;

  Eigen::VectorXd w(n), eta(m), u(m);
  const long total_steps = cfg.burn_in + cfg.T;
  for (long step = 0; step < total_steps; ++step) {
    const long rec = step - cfg.burn_in;  // >= 0 once recording starts
    if (rec >= 0) traj.states.col(rec) = x;

    // Per-(agent, time) streams keep draws independent of N's layout.
    const auto t32 = static_cast<uint32_t>(step);
    for (int i = 0; i < N; ++i) {
      const int no = g.state_offset(i), nd = g.state_dim(i);
      for (int c = 0; c < nd; ++c) {
        w[no + c] = sys.sigma_w * rng.normal(NoiseKind::Process, i, t32, c);
      }
      const int mo = g.input_offset(i), md = g.input_dim(i);
      for (int c = 0; c < md; ++c) {
        eta[mo + c] =
            cfg.sigma_eta == 0.0
                ? 0.0
                : cfg.sigma_eta * rng.normal(NoiseKind::Exploration, i, t32, c);
      }
    }

    u = K.K * x + eta;
    if (rec >= 0) {
      traj.inputs.col(rec) = u;
      for (int i = 0; i < N; ++i) {
        const auto xi = g.segment(x, i, Dim::State);
        const Eigen::VectorXd ui = u.segment(g.input_offset(i), g.input_dim(i));
        const auto Sii = g.block(sys.S, i, i, Dim::State, Dim::State);
        const auto Rii = g.block(sys.R, i, i, Dim::Input, Dim::Input);
        traj.agent_costs(i, rec) = xi.dot(Sii * xi) + ui.dot(Rii * ui);
      }
    }

    x = sys.A * x + sys.B * u + w;
    if (!x.allFinite() || x.cwiseAbs().maxCoeff() > kDivergenceThreshold) {
      throw InstabilityError(
          "rollout: state diverged at step " + std::to_string(step) +
              (rec >= 0 ? " (recorded step " + std::to_string(rec) + ")" : " (burn-in)"),
          -1.0, step);
    }
  }
  traj.states.col(cfg.T) = x;
  return traj;
}

int LocalDataset::member_state_offset(int agent_id) const {
  int offset = 0;
  for (size_t k = 0; k < members.size(); ++k) {
    if (members[k] == agent_id) return offset;
    offset += state_dims[k];
  }
  throw ArgumentError("LocalDataset: agent " + std::to_string(agent_id) +
                      " is not a member of this neighborhood");
}

int LocalDataset::member_input_offset(int agent_id) const {
  int offset = 0;
  for (size_t k = 0; k < members.size(); ++k) {
    if (members[k] == agent_id) return offset;
    offset += input_dims[k];
  }
  throw ArgumentError("LocalDataset: agent " + std::to_string(agent_id) +
                      " is not a member of this neighborhood");
}

std::vector<LocalDataset> collect_local_datasets(const Trajectory& traj,
                                                 const NetworkGraph& g, int kappa) {
  if (kappa <= 0) throw ArgumentError("collect_local_datasets: kappa must be >= 1");
  if (traj.length() < 1) throw ArgumentError("collect_local_datasets: empty trajectory");
  if (traj.states.rows() != g.state_dim() || traj.inputs.rows() != g.input_dim()) {
    throw ArgumentError("collect_local_datasets: trajectory does not match the graph");
  }
  const long samples = traj.length();  // (x, u) pairs t = 0..T_c, T_c = samples - 1
  const int N = g.num_agents();
  std::vector<LocalDataset> out(N);
  for (int i = 0; i < N; ++i) {
    LocalDataset& D = out[i];
    D.agent = i;
    D.kappa = kappa;
    D.members = g.neighborhood(i, kappa);
    int n_loc = 0, m_loc = 0;
    for (int j : D.members) {
      D.state_dims.push_back(g.state_dim(j));
      D.input_dims.push_back(g.input_dim(j));
      n_loc += g.state_dim(j);
      m_loc += g.input_dim(j);
    }
    D.x_loc.resize(n_loc, samples);
    D.u_loc.resize(m_loc, samples);
    int row = 0;
    for (int j : D.members) {
      D.x_loc.middleRows(row, g.state_dim(j)) =
          traj.states.block(g.state_offset(j), 0, g.state_dim(j), samples);
      row += g.state_dim(j);
    }
    row = 0;
    for (int j : D.members) {
      D.u_loc.middleRows(row, g.input_dim(j)) =
          traj.inputs.block(g.input_offset(j), 0, g.input_dim(j), samples);
      row += g.input_dim(j);
    }
    D.cost = traj.agent_costs.row(i).head(samples);
  }
  return out;
}

}  // namespace netlqr
