#pragma once

#include <Eigen/Core>
#include <vector>

#include "netlqr/system.hpp"

namespace netlqr {

/// Length of svec(M) for a d x d symmetric M.
inline long svec_length(long d) { return d * (d + 1) / 2; }

/// Side length d recovered from a svec length; throws if not triangular.
int smat_side(long length);

/// Norm-preserving vectorization of the upper triangle, row-major, with
/// off-diagonal entries scaled by sqrt(2): svec(M)' svec(M) = ||M||_F^2.
/// Inputs must be symmetric within 1e-10 (relative); the matrix is
/// symmetrized internally before packing.
Eigen::VectorXd svec(const Eigen::MatrixXd& M);

/// Inverse of svec. Exact for values whose sqrt(2)-scaling is representable;
/// otherwise the round trip is within 1 ulp per entry.
Eigen::MatrixXd smat(const Eigen::VectorXd& v);

/// Largest |eigenvalue|.
double spectral_radius(const Eigen::MatrixXd& X);

/// Largest singular value (induced l2 norm).
double spectral_norm(const Eigen::MatrixXd& X);

/// Solves P = L' P L + M (M symmetric, spectral radius of L < 1) by the
/// doubling iteration P <- P + L'PL, L <- L^2. Residual of the returned P is
/// at most 1e-9 * (1 + ||P||_F). Throws InstabilityError if rho(L) >= 1.
Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& L, const Eigen::MatrixXd& M);

struct DareSolution {
  Eigen::MatrixXd P;  // stabilizing fixed point, PSD
  Eigen::MatrixXd K;  // optimal gain, K = -(R + B'PB)^{-1} B'PA
  long iterations = 0;
  double residual = 0.0;
};

/// Discrete algebraic Riccati equation by fixed-point iteration from P = S.
/// Converges for stabilizable (A, B) and detectable (A, S^{1/2}); divergence
/// (||P|| > 1e12) or stalling raises NumericalError.
DareSolution solve_dare(const LinearSystem& sys);

struct StabilityCert {
  double tau = 1.0;
  double rho = 0.0;
  double spectral_radius = 0.0;
  long dip_step = 0;  // first k with ||X^k|| e^{rho k} <= 1; certifies the tail
};

/// Certified (tau, rho)-stability envelope: ||X^k|| <= tau e^{-rho k} for all
/// k >= 0, established by scanning powers until submultiplicativity covers
/// the tail. Throws InstabilityError (with the radius) when rho(X) >= 1.
StabilityCert stability_params(const Eigen::MatrixXd& X);

/// Frobenius-nearest symmetric PSD matrix: symmetrize, then clip negative
/// eigenvalues at zero.
Eigen::MatrixXd psd_project(const Eigen::MatrixXd& M);

struct AverageCost {
  double J = 0.0;                // sigma_w^2 trace(P)
  Eigen::VectorXd per_agent;     // lambda_i = sigma_w^2 trace(P_i); sums to J
};

/// Long-run average cost of the stationary closed loop. Throws
/// InstabilityError if A + BK is not Schur stable.
AverageCost average_cost(const LinearSystem& sys, const PolicyMatrix& K);

/// P_i solving P_i = S_i + [K]_i:' [R]_ii [K]_i: + (A+BK)' P_i (A+BK).
Eigen::MatrixXd value_matrix_Pi(const LinearSystem& sys, const PolicyMatrix& K, int agent);

struct QMatrixBlocks {
  Eigen::MatrixXd H11;  // n x n
  Eigen::MatrixXd H12;  // n x m
  Eigen::MatrixXd H22;  // m x m
  Eigen::MatrixXd assembled() const;
};

/// Per-agent Q-matrix H_i: H11 = S_i + A'P_iA, H12 = A'P_iB, H22 = R_i + B'P_iB.
QMatrixBlocks qfun_matrix_Hi(const LinearSystem& sys, const PolicyMatrix& K, int agent);

/// Global H built from the global P the same way.
QMatrixBlocks qfun_matrix_global(const LinearSystem& sys, const PolicyMatrix& K);

/// Global value matrix P (solution of the policy Lyapunov equation).
Eigen::MatrixXd value_matrix_global(const LinearSystem& sys, const PolicyMatrix& K);

struct PolicyEvaluation {
  Eigen::MatrixXd P;
  QMatrixBlocks H;
  std::vector<Eigen::MatrixXd> P_i;
  std::vector<QMatrixBlocks> H_i;
  double lambda = 0.0;           // == J
  Eigen::VectorXd lambda_i;
  double J = 0.0;
};

/// Everything at once (P, H, all P_i / H_i, average costs).
PolicyEvaluation evaluate_policy(const LinearSystem& sys, const PolicyMatrix& K,
                                 int jobs = 1);

}  // namespace netlqr
