#include "netlqr/sed.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "netlqr/errors.hpp"

namespace netlqr {

namespace {

constexpr double kGammaGridStep = 0.05;
constexpr double kGammaGridMax = 5.0;

int pair_distance(const NetworkGraph& g, DecayMode mode, std::optional<int> anchor, int l,
                  int j) {
  if (mode == DecayMode::Sed) return g.distance(l, j);
  return std::max(g.distance(*anchor, l), g.distance(*anchor, j));
}

}  // namespace

DecayReport measure_sed(const Eigen::MatrixXd& X, const NetworkGraph& g, Dim row_kind,
                        Dim col_kind, DecayMode mode, std::optional<int> anchor) {
  if (X.rows() != g.total(row_kind) || X.cols() != g.total(col_kind)) {
    throw ArgumentError("measure_sed: matrix does not match the agent partition");
  }
  if (mode == DecayMode::SedAwayFrom && !anchor) {
    throw ArgumentError("measure_sed: anchor required in SED-away-from mode");
  }
  if (anchor && (*anchor < 0 || *anchor >= g.num_agents())) {
    throw ArgumentError("measure_sed: anchor out of range");
  }

  const int N = g.num_agents();
  const int max_dist =
      mode == DecayMode::Sed ? g.diameter() : g.eccentricity(*anchor);
  DecayReport report;
  report.mode = mode;
  report.anchor = anchor;
  report.envelope.assign(max_dist + 1, 0.0);
  for (int l = 0; l < N; ++l) {
    for (int j = 0; j < N; ++j) {
      const int d = pair_distance(g, mode, anchor, l, j);
      const double nrm = spectral_norm(g.block(X, l, j, row_kind, col_kind));
      report.envelope[d] = std::max(report.envelope[d], nrm);
    }
  }

  // Deterministic fit: gamma on a fixed grid, minimal valid c per gamma,
  // report the pair with the smallest envelope value at the median observed
  // distance (ties resolved toward faster decay).
  std::vector<int> nonzero_dists;
  for (int d = 0; d <= max_dist; ++d) {
    if (report.envelope[d] > 0.0) nonzero_dists.push_back(d);
  }
  if (nonzero_dists.empty()) {
    report.fitted_c = 0.0;
    report.fitted_gamma = kGammaGridMax;
    report.certified = true;
    return report;
  }
  const double median_dist =
      0.5 * (nonzero_dists[(nonzero_dists.size() - 1) / 2] +
             nonzero_dists[nonzero_dists.size() / 2]);
  double best_obj = std::numeric_limits<double>::infinity();
  for (int step = 1; step * kGammaGridStep <= kGammaGridMax + 1e-12; ++step) {
    const double gamma = step * kGammaGridStep;
    double c = 0.0;
    for (int d : nonzero_dists) c = std::max(c, report.envelope[d] * std::exp(gamma * d));
    const double obj = c * std::exp(-gamma * median_dist);
    if (obj <= best_obj) {
      best_obj = obj;
      report.fitted_c = c;
      report.fitted_gamma = gamma;
    }
  }
  report.certified = envelope_holds(X, g, row_kind, col_kind, report.fitted_c,
                                    report.fitted_gamma, anchor);
  return report;
}

double minimal_sed_constant(const Eigen::MatrixXd& X, const NetworkGraph& g, Dim row_kind,
                            Dim col_kind, double gamma) {
  if (X.rows() != g.total(row_kind) || X.cols() != g.total(col_kind)) {
    throw ArgumentError("minimal_sed_constant: matrix does not match the partition");
  }
  double c = 0.0;
  for (int l = 0; l < g.num_agents(); ++l) {
    for (int j = 0; j < g.num_agents(); ++j) {
      const double nrm = spectral_norm(g.block(X, l, j, row_kind, col_kind));
      if (nrm > 0.0) c = std::max(c, nrm * std::exp(gamma * g.distance(l, j)));
    }
  }
  return c;
}

bool envelope_holds(const Eigen::MatrixXd& X, const NetworkGraph& g, Dim row_kind,
                    Dim col_kind, double c, double gamma, std::optional<int> anchor) {
  const DecayMode mode = anchor ? DecayMode::SedAwayFrom : DecayMode::Sed;
  for (int l = 0; l < g.num_agents(); ++l) {
    for (int j = 0; j < g.num_agents(); ++j) {
      const int d = pair_distance(g, mode, anchor, l, j);
      const double nrm = spectral_norm(g.block(X, l, j, row_kind, col_kind));
      if (nrm > c * std::exp(-gamma * d) * (1.0 + 1e-9) + 1e-300) return false;
    }
  }
  return true;
}

Eigen::MatrixXd truncate_away_from(const Eigen::MatrixXd& X, int anchor, int kappa,
                                   const NetworkGraph& g, Dim row_kind, Dim col_kind) {
  if (kappa <= 0) throw ArgumentError("truncate_away_from: kappa must be >= 1");
  if (X.rows() != g.total(row_kind) || X.cols() != g.total(col_kind)) {
    throw ArgumentError("truncate_away_from: matrix does not match the partition");
  }
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(X.rows(), X.cols());
  for (int l = 0; l < g.num_agents(); ++l) {
    for (int j = 0; j < g.num_agents(); ++j) {
      if (std::max(g.distance(anchor, l), g.distance(anchor, j)) < kappa) {
        g.block(out, l, j, row_kind, col_kind) = g.block(X, l, j, row_kind, col_kind);
      }
    }
  }
  return out;
}

PolicyMatrix truncate_policy(const Eigen::MatrixXd& K, int kappa, const NetworkGraph& g) {
  if (kappa <= 0) throw ArgumentError("truncate_policy: kappa must be >= 1");
  if (K.rows() != g.input_dim() || K.cols() != g.state_dim()) {
    throw ArgumentError("truncate_policy: gain does not match the partition");
  }
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(K.rows(), K.cols());
  for (int i = 0; i < g.num_agents(); ++i) {
    for (int j : g.neighborhood(i, kappa)) {
      g.block(out, i, j, Dim::Input, Dim::State) = g.block(K, i, j, Dim::Input, Dim::State);
    }
  }
  return PolicyMatrix::truncated(std::move(out), kappa);
}

Lemma1Constants lemma1_constants(double norm_M, double c_M, double c_L, double tau,
                                 double rho, double gamma, int N) {
  if (rho <= 0) throw ArgumentError("lemma1_constants: rho must be positive");
  if (tau < 1) throw ArgumentError("lemma1_constants: tau must be >= 1");
  if (c_L < 1) throw ArgumentError("lemma1_constants: c_L must be >= 1");
  if (N < 1) throw ArgumentError("lemma1_constants: N must be >= 1");
  Lemma1Constants out;
  out.c_P = norm_M * tau * tau / (1.0 - std::exp(-2.0 * rho)) + 2.0 * c_M;
  out.gamma_P = rho * gamma / (rho + std::log(N * c_L));
  return out;
}

Theorem1Constants theorem1_constants(const LinearSystem& sys, const PolicyMatrix& K,
                                     int agent, double tau, double rho, double c_A,
                                     double c_B, double c_K, double gamma_sys, int N) {
  if (rho <= 0) throw ArgumentError("theorem1_constants: rho must be positive");
  if (tau < 1) throw ArgumentError("theorem1_constants: tau must be >= 1");
  const Eigen::MatrixXd Ki = K.K.middleRows(sys.graph.input_offset(agent),
                                            sys.graph.input_dim(agent));
  const Eigen::MatrixXd Rii =
      sys.graph.block(sys.R, agent, agent, Dim::Input, Dim::Input);
  const Eigen::MatrixXd M = sys.S_i(agent) + Ki.transpose() * Rii * Ki;
  const double norm_Sii =
      spectral_norm(sys.graph.block(sys.S, agent, agent, Dim::State, Dim::State));
  const double norm_Rii = spectral_norm(Rii);
  Theorem1Constants out;
  out.c_Pi = spectral_norm(M) * tau * tau / (1.0 - std::exp(-2.0 * rho)) +
             2.0 * (norm_Sii + norm_Rii * c_K * c_K);
  out.gamma_Pi =
      rho * gamma_sys / (rho + std::log(N * c_A + double(N) * double(N) * c_B * c_K));
  return out;
}

double corollary1_constant(double norm_Si, double norm_Ri, double c_A, double c_B,
                           double c_Pi, int N) {
  if (norm_Si < 0 || norm_Ri < 0 || c_A < 0 || c_B < 0 || c_Pi < 0 || N < 1) {
    throw ArgumentError("corollary1_constant: inputs must be nonnegative, N >= 1");
  }
  const double n2 = double(N) * double(N);
  return std::max({norm_Si + n2 * c_A * c_A * c_Pi, n2 * c_A * c_B * c_Pi,
                   norm_Ri + n2 * c_B * c_B * c_Pi});
}

double corollary2_bound(double c_Hi, double gamma_Pi, int kappa, int N) {
  if (kappa < 1) throw ArgumentError("corollary2_bound: kappa must be >= 1");
  return std::sqrt(double(N)) * c_Hi * std::exp(-gamma_Pi * kappa);
}

double TruncationErrors::max() const { return std::max({e11, e12, e22}); }

TruncationErrors truncation_errors(const QMatrixBlocks& Hi, int anchor, int kappa,
                                   const NetworkGraph& g) {
  TruncationErrors out;
  out.e11 = spectral_norm(
      Hi.H11 - truncate_away_from(Hi.H11, anchor, kappa, g, Dim::State, Dim::State));
  out.e12 = spectral_norm(
      Hi.H12 - truncate_away_from(Hi.H12, anchor, kappa, g, Dim::State, Dim::Input));
  out.e22 = spectral_norm(
      Hi.H22 - truncate_away_from(Hi.H22, anchor, kappa, g, Dim::Input, Dim::Input));
  return out;
}

SystemSedSummary measure_system_sed(const LinearSystem& sys) {
  SystemSedSummary out;
  out.report_A = measure_sed(sys.A, sys.graph, Dim::State, Dim::State);
  out.report_B = measure_sed(sys.B, sys.graph, Dim::State, Dim::Input);
  out.gamma_sys = std::min(out.report_A.fitted_gamma, out.report_B.fitted_gamma);
  // The bounds assume c_A, c_B >= 1; the minimal constants at the shared rate
  // are clamped accordingly.
  out.c_A = std::max(
      1.0, minimal_sed_constant(sys.A, sys.graph, Dim::State, Dim::State, out.gamma_sys));
  out.c_B = std::max(
      1.0, minimal_sed_constant(sys.B, sys.graph, Dim::State, Dim::Input, out.gamma_sys));
  return out;
}

TheoremCertificate certify_agent(const LinearSystem& sys, const PolicyMatrix& K,
                                 int agent) {
  TheoremCertificate cert;
  cert.agent = agent;
  cert.stability = stability_params(closed_loop(sys, K));
  cert.system_sed = measure_system_sed(sys);
  const DecayReport k_report =
      measure_sed(K.K, sys.graph, Dim::Input, Dim::State, DecayMode::Sed);
  // The theorem assumes K decays at the system rate. When the measured rate
  // of K is slower, the shared rate drops to the minimum of the two.
  cert.gamma_used = std::min(cert.system_sed.gamma_sys, k_report.fitted_gamma);
  cert.c_K =
      minimal_sed_constant(K.K, sys.graph, Dim::Input, Dim::State, cert.gamma_used);
  const double c_A = std::max(
      1.0, minimal_sed_constant(sys.A, sys.graph, Dim::State, Dim::State, cert.gamma_used));
  const double c_B = std::max(
      1.0, minimal_sed_constant(sys.B, sys.graph, Dim::State, Dim::Input, cert.gamma_used));
  cert.system_sed.c_A = c_A;
  cert.system_sed.c_B = c_B;
  cert.system_sed.gamma_sys = cert.gamma_used;
  const int N = sys.graph.num_agents();
  cert.thm1 = theorem1_constants(sys, K, agent, cert.stability.tau, cert.stability.rho,
                                 c_A, c_B, cert.c_K, cert.gamma_used, N);
  const double norm_Si =
      spectral_norm(sys.graph.block(sys.S, agent, agent, Dim::State, Dim::State));
  const double norm_Ri =
      spectral_norm(sys.graph.block(sys.R, agent, agent, Dim::Input, Dim::Input));
  cert.c_Hi = corollary1_constant(norm_Si, norm_Ri, c_A, c_B, cert.thm1.c_Pi, N);
  return cert;
}

SedAlgebraReport sed_algebra_checks(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                                    const NetworkGraph& g) {
  SedAlgebraReport rep;
  const DecayReport rx = measure_sed(X, g, Dim::State, Dim::State);
  const DecayReport ry = measure_sed(Y, g, Dim::State, Dim::State);
  rep.c_x = rx.fitted_c;
  rep.gamma_x = rx.fitted_gamma;
  rep.c_y = ry.fitted_c;
  rep.gamma_y = ry.fitted_gamma;
  const double gamma = std::min(rx.fitted_gamma, ry.fitted_gamma);
  const double c_x = minimal_sed_constant(X, g, Dim::State, Dim::State, gamma);
  const double c_y = minimal_sed_constant(Y, g, Dim::State, Dim::State, gamma);
  const int N = g.num_agents();

  rep.sum_ok = envelope_holds(X + Y, g, Dim::State, Dim::State, c_x + c_y, gamma);
  rep.product_ok =
      envelope_holds(X * Y, g, Dim::State, Dim::State, N * c_x * c_y, gamma);

  // Away-from variant: X measured away from every anchor in turn.
  rep.product_away_ok = true;
  for (int anchor = 0; anchor < N; ++anchor) {
    double c_x_away = 0.0;
    for (int l = 0; l < N; ++l) {
      for (int j = 0; j < N; ++j) {
        const double nrm = spectral_norm(g.block(X, l, j, Dim::State, Dim::State));
        const int d = std::max(g.distance(anchor, l), g.distance(anchor, j));
        if (nrm > 0.0) c_x_away = std::max(c_x_away, nrm * std::exp(gamma * d));
      }
    }
    if (!envelope_holds(X * Y, g, Dim::State, Dim::State, N * c_x_away * c_y, gamma,
                        anchor)) {
      rep.product_away_ok = false;
    }
  }
  return rep;
}

Lemma6Report lemma6_check(const LinearSystem& sys, const PolicyMatrix& K, int agent) {
  Lemma6Report rep;
  const DecayReport k_report = measure_sed(K.K, sys.graph, Dim::Input, Dim::State);
  rep.gamma = k_report.fitted_gamma;
  const double c_K =
      minimal_sed_constant(K.K, sys.graph, Dim::Input, Dim::State, rep.gamma);
  const double norm_Sii =
      spectral_norm(sys.graph.block(sys.S, agent, agent, Dim::State, Dim::State));
  const double norm_Rii =
      spectral_norm(sys.graph.block(sys.R, agent, agent, Dim::Input, Dim::Input));
  rep.c = norm_Sii + norm_Rii * c_K * c_K;
  const Eigen::MatrixXd Ki = K.K.middleRows(sys.graph.input_offset(agent),
                                            sys.graph.input_dim(agent));
  const Eigen::MatrixXd Rii =
      sys.graph.block(sys.R, agent, agent, Dim::Input, Dim::Input);
  const Eigen::MatrixXd M = sys.S_i(agent) + Ki.transpose() * Rii * Ki;
  rep.holds = envelope_holds(M, sys.graph, Dim::State, Dim::State, rep.c, rep.gamma, agent);
  return rep;
}

}  // namespace netlqr
