#include "netlqr/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>

#include "netlqr/errors.hpp"
#include "netlqr/parallel.hpp"

namespace netlqr {

namespace {
const double kSqrt2 = std::sqrt(2.0);
}

int smat_side(long length) {
  if (length <= 0) throw ArgumentError("smat: vector length must be positive");
  const long d = static_cast<long>((std::sqrt(8.0 * static_cast<double>(length) + 1.0) - 1.0) / 2.0 + 0.5);
  if (d * (d + 1) / 2 != length) {
    throw ArgumentError("smat: length " + std::to_string(length) + " is not triangular");
  }
  return static_cast<int>(d);
}

Eigen::VectorXd svec(const Eigen::MatrixXd& M) {
  if (M.rows() != M.cols()) throw ArgumentError("svec: input must be square");
  const double scale = 1.0 + M.norm();
  if ((M - M.transpose()).norm() > 1e-10 * scale) {
    throw ArgumentError("svec: input must be symmetric within 1e-10");
  }
  const Eigen::MatrixXd sym = 0.5 * (M + M.transpose());
  const long d = M.rows();
  Eigen::VectorXd v(svec_length(d));
  long k = 0;
  for (long p = 0; p < d; ++p) {
    v[k++] = sym(p, p);
    for (long q = p + 1; q < d; ++q) v[k++] = kSqrt2 * sym(p, q);
  }
  return v;
}

Eigen::MatrixXd smat(const Eigen::VectorXd& v) {
  const int d = smat_side(v.size());
  Eigen::MatrixXd M(d, d);
  long k = 0;
  for (int p = 0; p < d; ++p) {
    M(p, p) = v[k++];
    for (int q = p + 1; q < d; ++q) {
      const double x = v[k++] / kSqrt2;
      M(p, q) = x;
      M(q, p) = x;
    }
  }
  return M;
}

double spectral_radius(const Eigen::MatrixXd& X) {
  if (X.rows() != X.cols()) throw ArgumentError("spectral_radius: input must be square");
  if (X.rows() == 0) return 0.0;
  Eigen::EigenSolver<Eigen::MatrixXd> es(X, /*computeEigenvectors=*/false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double spectral_norm(const Eigen::MatrixXd& X) {
  if (X.rows() == 0 || X.cols() == 0) return 0.0;
  return Eigen::JacobiSVD<Eigen::MatrixXd>(X).singularValues()(0);
}

Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& L, const Eigen::MatrixXd& M) {
  if (L.rows() != L.cols() || M.rows() != M.cols() || L.rows() != M.rows()) {
    throw ArgumentError("solve_lyapunov: L and M must be square with equal size");
  }
  const double radius = spectral_radius(L);
  if (radius >= 1.0) {
    throw InstabilityError("solve_lyapunov: spectral radius " + std::to_string(radius) +
                               " >= 1",
                           radius);
  }
  Eigen::MatrixXd P = 0.5 * (M + M.transpose());
  Eigen::MatrixXd Lk = L;
  for (int iter = 0; iter < 200; ++iter) {
    P = P + Lk.transpose() * P * Lk;
    P = 0.5 * (P + P.transpose());
    Lk = Lk * Lk;
    const double residual = (P - L.transpose() * P * L - M).norm();
    if (residual <= 1e-12 * (1.0 + P.norm())) break;
  }
  const double residual = (P - L.transpose() * P * L - M).norm();
  if (residual > 1e-9 * (1.0 + P.norm())) {
    throw NumericalError("solve_lyapunov: residual " + std::to_string(residual) +
                         " did not reach tolerance");
  }
  return P;
}

DareSolution solve_dare(const LinearSystem& sys) {
  const Eigen::MatrixXd& A = sys.A;
  const Eigen::MatrixXd& B = sys.B;
  const Eigen::MatrixXd& S = sys.S;
  const Eigen::MatrixXd& R = sys.R;

  Eigen::MatrixXd P = 0.5 * (S + S.transpose());
  const long max_iter = 500000;
  for (long iter = 1; iter <= max_iter; ++iter) {
    const Eigen::MatrixXd BtP = B.transpose() * P;
    const Eigen::MatrixXd G = R + BtP * B;
    const Eigen::MatrixXd BtPA = BtP * A;
    Eigen::MatrixXd next = S + A.transpose() * P * A -
                           BtPA.transpose() * G.ldlt().solve(BtPA);
    next = 0.5 * (next + next.transpose());
    const double step = (next - P).norm();
    if (!next.allFinite() || next.norm() > 1e12) {
      throw NumericalError("solve_dare: iteration diverged (system not stabilizable?)");
    }
    if (step <= 1e-12 * (1.0 + P.norm())) {
      DareSolution out;
      out.P = P;
      const Eigen::MatrixXd BtP2 = B.transpose() * P;
      const Eigen::MatrixXd G2 = R + BtP2 * B;
      out.K = -G2.ldlt().solve(BtP2 * A);
      out.iterations = iter;
      out.residual = step;
      return out;
    }
    P = next;
  }
  throw NumericalError("solve_dare: no convergence after " + std::to_string(max_iter) +
                       " iterations");
}

StabilityCert stability_params(const Eigen::MatrixXd& X) {
  if (X.rows() != X.cols()) throw ArgumentError("stability_params: input must be square");
  const double radius = spectral_radius(X);
  if (radius >= 1.0) {
    throw InstabilityError(
        "stability_params: spectral radius " + std::to_string(radius) + " >= 1", radius);
  }
  // rho candidates: fractions of -ln(radius), largest first. The first
  // candidate for which a power dips under the envelope within the horizon
  // wins; submultiplicativity then covers all later powers.
  const double rho_spec = -std::log(std::max(radius, 1e-12));
  const std::vector<double> margins = {1.0, 0.98, 0.95, 0.9, 0.75, 0.5, 0.25};
  const long k_cap = 20000;

  std::vector<double> norms;  // norms[k] = ||X^k||, norms[0] = 1 by convention
  norms.reserve(1024);
  norms.push_back(1.0);
  Eigen::MatrixXd Xk = Eigen::MatrixXd::Identity(X.rows(), X.cols());
  auto extend = [&](long k) {
    while (static_cast<long>(norms.size()) <= k) {
      Xk = Xk * X;
      norms.push_back(spectral_norm(Xk));
    }
  };

  for (double margin : margins) {
    const double rho = margin * rho_spec;
    double tau = 1.0;
    for (long k = 1; k <= k_cap; ++k) {
      extend(k);
      const double beta = norms[k] == 0.0 ? 0.0 : norms[k] * std::exp(rho * k);
      if (beta <= 1.0 + 1e-9) {
        StabilityCert cert;
        cert.tau = tau;
        cert.rho = rho;
        cert.spectral_radius = radius;
        cert.dip_step = k;
        return cert;
      }
      tau = std::max(tau, beta);
      if (!std::isfinite(beta)) break;
    }
  }
  throw NumericalError("stability_params: could not certify an envelope within horizon");
}

Eigen::MatrixXd psd_project(const Eigen::MatrixXd& M) {
  if (M.rows() != M.cols()) throw ArgumentError("psd_project: input must be square");
  const Eigen::MatrixXd sym = 0.5 * (M + M.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  const Eigen::VectorXd clipped = es.eigenvalues().cwiseMax(0.0);
  Eigen::MatrixXd out =
      es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

Eigen::MatrixXd value_matrix_global(const LinearSystem& sys, const PolicyMatrix& K) {
  return solve_lyapunov(closed_loop(sys, K), stage_cost_matrix(sys, K));
}

AverageCost average_cost(const LinearSystem& sys, const PolicyMatrix& K) {
  const Eigen::MatrixXd P = value_matrix_global(sys, K);
  AverageCost out;
  const double var = sys.sigma_w * sys.sigma_w;
  out.J = var * P.trace();
  const int N = sys.graph.num_agents();
  out.per_agent.resize(N);
  for (int i = 0; i < N; ++i) {
    out.per_agent[i] = var * value_matrix_Pi(sys, K, i).trace();
  }
  return out;
}

Eigen::MatrixXd value_matrix_Pi(const LinearSystem& sys, const PolicyMatrix& K, int agent) {
  const Eigen::MatrixXd L = closed_loop(sys, K);
  const Eigen::MatrixXd Ki = K.K.middleRows(sys.graph.input_offset(agent),
                                            sys.graph.input_dim(agent));
  const Eigen::MatrixXd Rii = sys.graph.block(sys.R, agent, agent, Dim::Input, Dim::Input);
  const Eigen::MatrixXd M = sys.S_i(agent) + Ki.transpose() * Rii * Ki;
  return solve_lyapunov(L, M);
}

Eigen::MatrixXd QMatrixBlocks::assembled() const {
  const long n = H11.rows();
  const long m = H22.rows();
  Eigen::MatrixXd H(n + m, n + m);
  H.topLeftCorner(n, n) = H11;
  H.topRightCorner(n, m) = H12;
  H.bottomLeftCorner(m, n) = H12.transpose();
  H.bottomRightCorner(m, m) = H22;
  return H;
}

namespace {

QMatrixBlocks q_blocks_from(const LinearSystem& sys, const Eigen::MatrixXd& P,
                            const Eigen::MatrixXd& Scost, const Eigen::MatrixXd& Rcost) {
  QMatrixBlocks H;
  const Eigen::MatrixXd PA = P * sys.A;
  const Eigen::MatrixXd PB = P * sys.B;
  H.H11 = Scost + sys.A.transpose() * PA;
  H.H12 = sys.A.transpose() * PB;
  H.H22 = Rcost + sys.B.transpose() * PB;
  return H;
}

}  // namespace

QMatrixBlocks qfun_matrix_Hi(const LinearSystem& sys, const PolicyMatrix& K, int agent) {
  const Eigen::MatrixXd Pi = value_matrix_Pi(sys, K, agent);
  return q_blocks_from(sys, Pi, sys.S_i(agent), sys.R_i(agent));
}

QMatrixBlocks qfun_matrix_global(const LinearSystem& sys, const PolicyMatrix& K) {
  const Eigen::MatrixXd P = value_matrix_global(sys, K);
  return q_blocks_from(sys, P, sys.S, sys.R);
}

PolicyEvaluation evaluate_policy(const LinearSystem& sys, const PolicyMatrix& K, int jobs) {
  PolicyEvaluation ev;
  ev.P = value_matrix_global(sys, K);
  ev.H = q_blocks_from(sys, ev.P, sys.S, sys.R);
  const int N = sys.graph.num_agents();
  ev.P_i.resize(N);
  ev.H_i.resize(N);
  ev.lambda_i.resize(N);
  parallel_for(N, jobs, [&](int i) {
    ev.P_i[i] = value_matrix_Pi(sys, K, i);
    ev.H_i[i] = q_blocks_from(sys, ev.P_i[i], sys.S_i(i), sys.R_i(i));
  });
  const double var = sys.sigma_w * sys.sigma_w;
  for (int i = 0; i < N; ++i) ev.lambda_i[i] = var * ev.P_i[i].trace();
  ev.J = var * ev.P.trace();
  ev.lambda = ev.J;
  return ev;
}

}  // namespace netlqr
