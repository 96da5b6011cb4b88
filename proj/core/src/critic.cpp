#include "netlqr/critic.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>

#include "netlqr/errors.hpp"
#include "netlqr/linalg.hpp"
#include "netlqr/parallel.hpp"
#include "netlqr/sed.hpp"

namespace netlqr {

namespace {

const double kSqrt2 = std::sqrt(2.0);
constexpr long kChunk = 4096;
constexpr double kPinvCutoff = 1e-10;
constexpr double kCondWarning = 1e12;

/// svec of z z' written straight into `out` (no outer product materialized).
void rank_one_svec(const Eigen::VectorXd& z, Eigen::Ref<Eigen::VectorXd> out) {
  const long d = z.size();
  long k = 0;
  for (long p = 0; p < d; ++p) {
    out[k++] = z[p] * z[p];
    for (long q = p + 1; q < d; ++q) out[k++] = kSqrt2 * z[p] * z[q];
  }
}

/// Local gain rows of agent j mapped onto an index set: columns of the result
/// follow `columns` (state blocks), rows are agent j's inputs. Entries of K
/// outside [K]_{j, N_j^kappa} are never read.
Eigen::MatrixXd gain_row_on_columns(const PolicyMatrix& K, int j,
                                    const std::vector<int>& own_members,
                                    const std::vector<int>& columns,
                                    const NetworkGraph& g) {
  int width = 0;
  for (int c : columns) width += g.state_dim(c);
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(g.input_dim(j), width);
  int offset = 0;
  for (int c : columns) {
    if (std::binary_search(own_members.begin(), own_members.end(), c)) {
      W.middleCols(offset, g.state_dim(c)) = g.block(K.K, j, c, Dim::Input, Dim::State);
    }
    offset += g.state_dim(c);
  }
  return W;
}

}  // namespace

Eigen::VectorXd local_features(const Eigen::VectorXd& x_loc, const Eigen::VectorXd& u_loc) {
  Eigen::VectorXd z(x_loc.size() + u_loc.size());
  z << x_loc, u_loc;
  Eigen::VectorXd out(svec_length(z.size()));
  rank_one_svec(z, out);
  return out;
}

Eigen::MatrixXd own_policy_actions(const LocalDataset& D_j, const PolicyMatrix& K,
                                   const NetworkGraph& g) {
  const Eigen::MatrixXd Kj = gain_row_on_columns(K, D_j.agent, D_j.members, D_j.members, g);
  return Kj * D_j.x_loc;
}

std::vector<Eigen::MatrixXd> on_policy_actions(const std::vector<LocalDataset>& datasets,
                                               const PolicyMatrix& K,
                                               const NetworkGraph& g, int kappa) {
  if (!in_policy_class(K.K, kappa, g)) {
    throw ArgumentError(
        "on_policy_actions: gain is not kappa-sparse; its actions would need states "
        "outside the kappa-neighborhood");
  }
  const int N = g.num_agents();
  if (static_cast<int>(datasets.size()) != N) {
    throw ArgumentError("on_policy_actions: need one dataset per agent");
  }
  // Every agent computes its own action sequence ...
  std::vector<Eigen::MatrixXd> own(N);
  for (int j = 0; j < N; ++j) own[j] = own_policy_actions(datasets[j], K, g);
  // ... then each agent assembles the sequences its neighbors shared.
  std::vector<Eigen::MatrixXd> assembled(N);
  for (int i = 0; i < N; ++i) {
    const auto& members = datasets[i].members;
    long m_loc = 0;
    for (int j : members) m_loc += g.input_dim(j);
    assembled[i].resize(m_loc, datasets[i].samples());
    long row = 0;
    for (int j : members) {
      assembled[i].middleRows(row, g.input_dim(j)) = own[j];
      row += g.input_dim(j);
    }
  }
  return assembled;
}

Eigen::VectorXd noise_correction(const PolicyMatrix& K, int agent, int kappa,
                                 double sigma_w, const NetworkGraph& g) {
  if (kappa <= 0) throw ArgumentError("noise_correction: kappa must be >= 1");
  const std::vector<int> members = g.neighborhood(agent, kappa);
  int n_loc = 0, m_loc = 0;
  for (int j : members) {
    n_loc += g.state_dim(j);
    m_loc += g.input_dim(j);
  }
  Eigen::MatrixXd stacked(n_loc + m_loc, n_loc);
  stacked.topRows(n_loc) = Eigen::MatrixXd::Identity(n_loc, n_loc);
  long row = n_loc;
  for (int j : members) {
    stacked.middleRows(row, g.input_dim(j)) = gain_row_on_columns(
        K, j, g.neighborhood(j, kappa), members, g);
    row += g.input_dim(j);
  }
  const Eigen::MatrixXd outer = sigma_w * sigma_w * stacked * stacked.transpose();
  return svec(outer);
}

namespace {

struct PinvSolve {
  Eigen::VectorXd h;
  double cond;
  bool ill;
};

PinvSolve pinv_solve(const Eigen::MatrixXd& M, const Eigen::VectorXd& b) {
  if (!M.allFinite() || !b.allFinite()) {
    throw NumericalError("lstdq: non-finite data in the normal equations");
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double smax = sv.size() ? sv(0) : 0.0;
  const double cutoff = kPinvCutoff * smax;
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(sv.size());
  for (long k = 0; k < sv.size(); ++k) inv[k] = sv[k] > cutoff ? 1.0 / sv[k] : 0.0;
  PinvSolve out;
  out.h = svd.matrixV() * inv.asDiagonal() * (svd.matrixU().transpose() * b);
  const double smin = sv.size() ? sv(sv.size() - 1) : 0.0;
  out.cond = smin > 0 ? smax / smin : std::numeric_limits<double>::infinity();
  out.ill = !(out.cond < kCondWarning);
  return out;
}

}  // namespace

LstdqResult lstdq_estimate(const LocalDataset& D_i, const Eigen::MatrixXd& u_pol_loc,
                           const PolicyMatrix& K, double sigma_w, const NetworkGraph& g) {
  const long samples = D_i.samples();
  if (samples < 2) throw ArgumentError("lstdq_estimate: need at least two samples");
  if (u_pol_loc.rows() != D_i.input_dim() || u_pol_loc.cols() != samples) {
    throw ArgumentError("lstdq_estimate: on-policy actions do not match the dataset");
  }
  const long T_c = samples - 1;
  const long D = D_i.state_dim() + D_i.input_dim();
  const long d = svec_length(D);
  const Eigen::VectorXd f = noise_correction(K, D_i.agent, D_i.kappa, sigma_w, g);

  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(d, d);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd phi(d), psi_next(d), z(D);
  for (long t = 0; t < T_c; ++t) {
    z << D_i.x_loc.col(t), D_i.u_loc.col(t);
    rank_one_svec(z, phi);
    z << D_i.x_loc.col(t + 1), u_pol_loc.col(t + 1);
    rank_one_svec(z, psi_next);
    M.noalias() += phi * (phi - psi_next + f).transpose();
    b.noalias() += phi * D_i.cost[t];
  }
  const PinvSolve sol = pinv_solve(M, b);
  return LstdqResult{sol.h, sol.cond, sol.ill};
}

double QEstimate::max_cond() const {
  double out = 0.0;
  for (long i = 0; i < cond.size(); ++i) out = std::max(out, cond[i]);
  return out;
}

Eigen::MatrixXd svec_conjugation(const Eigen::MatrixXd& W) {
  const long D = W.rows();
  const long q = W.cols();
  Eigen::MatrixXd G(svec_length(D), svec_length(q));
  long k = 0;
  for (long a = 0; a < D; ++a) {
    for (long b = a; b < D; ++b) {
      const double scale_out = (a == b) ? 1.0 : kSqrt2;
      long l = 0;
      for (long r = 0; r < q; ++r) {
        // r == s term
        G(k, l++) = scale_out * W(a, r) * W(b, r);
        for (long s = r + 1; s < q; ++s) {
          G(k, l++) = scale_out * (W(a, r) * W(b, s) + W(a, s) * W(b, r)) / kSqrt2;
        }
      }
      ++k;
    }
  }
  return G;
}

CriticEstimator::CriticEstimator(const std::vector<LocalDataset>& datasets, long T_c,
                                 int kappa, double sigma_w, const NetworkGraph& g,
                                 int jobs)
    : graph_(g), kappa_(kappa), sigma_w_(sigma_w), T_c_(T_c) {
  const int N = g.num_agents();
  if (static_cast<int>(datasets.size()) != N) {
    throw ArgumentError("CriticEstimator: need one dataset per agent");
  }
  if (kappa <= 0) throw ArgumentError("CriticEstimator: kappa must be >= 1");
  for (const auto& D : datasets) {
    if (D.kappa != kappa) throw ArgumentError("CriticEstimator: dataset kappa mismatch");
    if (D.samples() < T_c + 1) {
      throw ArgumentError("CriticEstimator: datasets hold fewer than T_c + 1 samples");
    }
  }
  workspaces_.resize(N);
  parallel_for(N, jobs, [&](int i) {
    Workspace& ws = workspaces_[i];
    const LocalDataset& D_i = datasets[i];
    ws.agent = i;
    ws.members = D_i.members;
    ws.ext_members = g.neighborhood(i, 2 * kappa - 1);
    ws.n_loc = D_i.state_dim();
    ws.m_loc = D_i.input_dim();
    ws.n_ext = 0;
    for (int e : ws.ext_members) ws.n_ext += g.state_dim(e);

    // Extended state view: x_{N_i^{2kappa-1}}, assembled from the datasets of
    // agents in N_i^kappa (every extended member is in some neighbor's view).
    Eigen::MatrixXd x_ext(ws.n_ext, T_c + 1);
    {
      long row = 0;
      for (int e : ws.ext_members) {
        int holder = -1;
        for (int j : ws.members) {
          if (g.distance(j, e) < kappa) {
            holder = j;
            break;
          }
        }
        if (holder < 0) {
          throw std::logic_error("CriticEstimator: extended member not covered");
        }
        const LocalDataset& D_h = datasets[holder];
        x_ext.middleRows(row, g.state_dim(e)) = D_h.x_loc.block(
            D_h.member_state_offset(e), 0, g.state_dim(e), T_c + 1);
        row += g.state_dim(e);
      }
    }

    const long D = ws.n_loc + ws.m_loc;
    const long d = svec_length(D);
    const long qdim = svec_length(ws.n_ext);
    ws.gram_phi = Eigen::MatrixXd::Zero(d, d);
    ws.cross = Eigen::MatrixXd::Zero(d, qdim);
    ws.phi_sum = Eigen::VectorXd::Zero(d);
    ws.rhs = Eigen::VectorXd::Zero(d);

    Eigen::VectorXd z(D);
    Eigen::MatrixXd phi_chunk(d, kChunk), ups_chunk(qdim, kChunk);
    for (long t0 = 0; t0 < T_c; t0 += kChunk) {
      const long len = std::min(kChunk, T_c - t0);
      for (long c = 0; c < len; ++c) {
        const long t = t0 + c;
        z << D_i.x_loc.col(t), D_i.u_loc.col(t);
        rank_one_svec(z, phi_chunk.col(c));
        rank_one_svec(x_ext.col(t + 1), ups_chunk.col(c));
      }
      const auto phi = phi_chunk.leftCols(len);
      ws.gram_phi.noalias() += phi * phi.transpose();
      ws.cross.noalias() += phi * ups_chunk.leftCols(len).transpose();
      ws.phi_sum.noalias() += phi * Eigen::VectorXd::Ones(len);
      ws.rhs.noalias() += phi * D_i.cost.segment(t0, len);
    }
  });
}

QEstimate CriticEstimator::estimate(const PolicyMatrix& K, int jobs) const {
  const NetworkGraph& g = graph_;
  if (!in_policy_class(K.K, kappa_, g)) {
    throw ArgumentError("CriticEstimator: gain is not kappa-sparse");
  }
  const int N = g.num_agents();
  QEstimate est;
  est.kappa = kappa_;
  est.h_hat.resize(N);
  est.H_local.resize(N);
  est.cond.resize(N);
  est.ill_conditioned.assign(N, 0);

  std::vector<std::string> agent_errors(N);
  parallel_for(N, jobs, [&](int i) {
    try {
      const Workspace& ws = workspaces_[i];
      // W maps the extended state y to the stacked pair (x_loc; u^K_loc):
      // the top block selects x_{N_i^kappa}, the bottom rows are the gain
      // rows [K]_{j, N_j^kappa} of each member j in extended coordinates.
      Eigen::MatrixXd W = Eigen::MatrixXd::Zero(ws.n_loc + ws.m_loc, ws.n_ext);
      {
        long ext_offset = 0;
        for (int e : ws.ext_members) {
          const auto pos = std::lower_bound(ws.members.begin(), ws.members.end(), e);
          if (pos != ws.members.end() && *pos == e) {
            long loc_offset = 0;
            for (int j : ws.members) {
              if (j == e) break;
              loc_offset += g.state_dim(j);
            }
            W.block(loc_offset, ext_offset, g.state_dim(e), g.state_dim(e))
                .setIdentity();
          }
          ext_offset += g.state_dim(e);
        }
        long row = ws.n_loc;
        for (int j : ws.members) {
          W.middleRows(row, g.input_dim(j)) = gain_row_on_columns(
              K, j, g.neighborhood(j, kappa_), ws.ext_members, g);
          row += g.input_dim(j);
        }
      }
      const Eigen::MatrixXd conj = svec_conjugation(W);
      const Eigen::VectorXd f = noise_correction(K, i, kappa_, sigma_w_, g);
      Eigen::MatrixXd M = ws.gram_phi;
      M.noalias() -= ws.cross * conj.transpose();
      M.noalias() += ws.phi_sum * f.transpose();
      const PinvSolve sol = pinv_solve(M, ws.rhs);
      est.h_hat[i] = sol.h;
      est.cond[i] = sol.cond;
      est.ill_conditioned[i] = sol.ill ? 1 : 0;
      est.H_local[i] = psd_project(smat(sol.h));
    } catch (const std::exception& e) {
      agent_errors[i] = e.what();
    }
  });
  for (int i = 0; i < N; ++i) {
    if (!agent_errors[i].empty()) {
      throw NumericalError("critic failed for agent " + std::to_string(i) + ": " +
                           agent_errors[i]);
    }
  }

  // Global assembly over shared blocks, fixed agent order. Blocks outside
  // N_l^{2kappa-1} are never touched and stay exactly zero.
  const int n = g.state_dim();
  const int m = g.input_dim();
  est.H11 = Eigen::MatrixXd::Zero(n, n);
  est.H12 = Eigen::MatrixXd::Zero(n, m);
  est.H22 = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < N; ++i) {
    const Workspace& ws = workspaces_[i];
    const Eigen::MatrixXd& Hi = est.H_local[i];
    long lro = 0;  // local row offset of member l within x_loc
    for (size_t a = 0; a < ws.members.size(); ++a) {
      const int l = ws.members[a];
      long lco = 0;
      for (size_t b = 0; b < ws.members.size(); ++b) {
        const int j = ws.members[b];
        g.block(est.H11, l, j, Dim::State, Dim::State) +=
            Hi.block(lro, lco, g.state_dim(l), g.state_dim(j));
        lco += g.state_dim(j);
      }
      lro += g.state_dim(l);
    }
    lro = 0;
    for (size_t a = 0; a < ws.members.size(); ++a) {
      const int l = ws.members[a];
      long uco = ws.n_loc;
      for (size_t b = 0; b < ws.members.size(); ++b) {
        const int j = ws.members[b];
        g.block(est.H12, l, j, Dim::State, Dim::Input) +=
            Hi.block(lro, uco, g.state_dim(l), g.input_dim(j));
        uco += g.input_dim(j);
      }
      lro += g.state_dim(l);
    }
    long uro = ws.n_loc;
    for (size_t a = 0; a < ws.members.size(); ++a) {
      const int l = ws.members[a];
      long uco = ws.n_loc;
      for (size_t b = 0; b < ws.members.size(); ++b) {
        const int j = ws.members[b];
        g.block(est.H22, l, j, Dim::Input, Dim::Input) += Hi.block(
            uro, uco, g.input_dim(l), g.input_dim(j));
        uco += g.input_dim(j);
      }
      uro += g.input_dim(l);
    }
  }
  return est;
}

QEstimate estimate_q(const std::vector<LocalDataset>& datasets, const PolicyMatrix& K,
                     long T_c, int kappa, double sigma_w, const NetworkGraph& g,
                     int jobs) {
  return CriticEstimator(datasets, T_c, kappa, sigma_w, g, jobs).estimate(K, jobs);
}

QEstimate exact_truncated_q(const LinearSystem& sys, const PolicyMatrix& K, int kappa,
                            int jobs) {
  if (kappa <= 0) throw ArgumentError("exact_truncated_q: kappa must be >= 1");
  const NetworkGraph& g = sys.graph;
  const int N = g.num_agents();
  const int n = g.state_dim();
  const int m = g.input_dim();
  QEstimate est;
  est.kappa = kappa;
  est.h_hat.resize(N);
  est.H_local.resize(N);
  est.cond = Eigen::VectorXd::Zero(N);
  est.ill_conditioned.assign(N, 0);
  est.H11 = Eigen::MatrixXd::Zero(n, n);
  est.H12 = Eigen::MatrixXd::Zero(n, m);
  est.H22 = Eigen::MatrixXd::Zero(m, m);

  std::vector<QMatrixBlocks> truncated(N);
  parallel_for(N, jobs, [&](int i) {
    const QMatrixBlocks Hi = qfun_matrix_Hi(sys, K, i);
    QMatrixBlocks& Ti = truncated[i];
    Ti.H11 = truncate_away_from(Hi.H11, i, kappa, g, Dim::State, Dim::State);
    Ti.H12 = truncate_away_from(Hi.H12, i, kappa, g, Dim::State, Dim::Input);
    Ti.H22 = truncate_away_from(Hi.H22, i, kappa, g, Dim::Input, Dim::Input);
  });
  for (int i = 0; i < N; ++i) {
    est.H11 += truncated[i].H11;
    est.H12 += truncated[i].H12;
    est.H22 += truncated[i].H22;

    // Local restriction (members x members) mirrors the sampled layout.
    const std::vector<int> members = g.neighborhood(i, kappa);
    int n_loc = 0, m_loc = 0;
    for (int j : members) {
      n_loc += g.state_dim(j);
      m_loc += g.input_dim(j);
    }
    Eigen::MatrixXd local = Eigen::MatrixXd::Zero(n_loc + m_loc, n_loc + m_loc);
    long ro = 0;
    for (int l : members) {
      long co = 0;
      for (int j : members) {
        local.block(ro, co, g.state_dim(l), g.state_dim(j)) =
            g.block(truncated[i].H11, l, j, Dim::State, Dim::State);
        co += g.state_dim(j);
      }
      co = n_loc;
      for (int j : members) {
        local.block(ro, co, g.state_dim(l), g.input_dim(j)) =
            g.block(truncated[i].H12, l, j, Dim::State, Dim::Input);
        co += g.input_dim(j);
      }
      ro += g.state_dim(l);
    }
    ro = n_loc;
    for (int l : members) {
      long co = 0;
      for (int j : members) {
        local.block(ro, co, g.input_dim(l), g.state_dim(j)) =
            g.block(truncated[i].H12, j, l, Dim::State, Dim::Input).transpose();
        co += g.state_dim(j);
      }
      co = n_loc;
      for (int j : members) {
        local.block(ro, co, g.input_dim(l), g.input_dim(j)) =
            g.block(truncated[i].H22, l, j, Dim::Input, Dim::Input);
        co += g.input_dim(j);
      }
      ro += g.input_dim(l);
    }
    est.H_local[i] = local;
    est.h_hat[i] = svec(local);
  }
  return est;
}

}  // namespace netlqr
