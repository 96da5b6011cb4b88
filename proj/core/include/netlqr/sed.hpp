#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "netlqr/linalg.hpp"
#include "netlqr/system.hpp"

namespace netlqr {

enum class DecayMode { Sed, SedAwayFrom };

/// Distance-indexed block-norm envelope of a partitioned matrix, with a
/// deterministic (c, gamma) fit and an exhaustive certification scan.
///
/// In Sed mode envelope[d] is the largest spectral block norm over pairs at
/// graph distance d; in SedAwayFrom mode the pair distance is
/// max(dist(anchor, l), dist(anchor, j)).
struct DecayReport {
  DecayMode mode = DecayMode::Sed;
  std::optional<int> anchor;
  std::vector<double> envelope;  // index = distance, 0..max observed distance
  double fitted_c = 0.0;
  double fitted_gamma = 0.0;
  bool certified = false;  // ||[X]_lj|| <= fitted_c e^{-fitted_gamma d} for all blocks
};

/// Measures the decay envelope of X (partition given by row/col kinds).
/// anchor is required iff mode == SedAwayFrom. Zero blocks are excluded from
/// the fit but participate in certification.
DecayReport measure_sed(const Eigen::MatrixXd& X, const NetworkGraph& g, Dim row_kind,
                        Dim col_kind, DecayMode mode = DecayMode::Sed,
                        std::optional<int> anchor = std::nullopt);

/// Smallest c such that every block obeys c e^{-gamma d} at the given gamma
/// (the measured SED certificate at a fixed rate). Zero for the zero matrix.
double minimal_sed_constant(const Eigen::MatrixXd& X, const NetworkGraph& g, Dim row_kind,
                            Dim col_kind, double gamma);

/// Blockwise truncation away from an agent: keeps [X]_lj iff
/// max(dist(i,l), dist(i,j)) < kappa. Linear and idempotent.
Eigen::MatrixXd truncate_away_from(const Eigen::MatrixXd& X, int anchor, int kappa,
                                   const NetworkGraph& g, Dim row_kind, Dim col_kind);

/// Projects a gain onto the policy class K^kappa by zeroing every block
/// [K]_ij with j outside N_i^kappa.
PolicyMatrix truncate_policy(const Eigen::MatrixXd& K, int kappa, const NetworkGraph& g);

struct Lemma1Constants {
  double c_P = 0.0;
  double gamma_P = 0.0;
};

/// Decay constants for the Lyapunov solution P = L'PL + M when L is
/// (tau, rho)-stable and (c_L, gamma)-SED and M is (c_M, gamma)-SED away
/// from the anchor:
///   c_P = ||M|| tau^2 / (1 - e^{-2 rho}) + 2 c_M,
///   gamma_P = rho gamma / (rho + ln(N c_L)).
Lemma1Constants lemma1_constants(double norm_M, double c_M, double c_L, double tau,
                                 double rho, double gamma, int N);

struct Theorem1Constants {
  double c_Pi = 0.0;
  double gamma_Pi = 0.0;
};

/// Decay constants certifying that P_i is SED away from `agent`:
///   c_Pi = ||S_i + [K]_i:' [R]_ii [K]_i: || tau^2 / (1 - e^{-2 rho})
///          + 2 (||[S]_ii|| + ||[R]_ii|| c_K^2),
///   gamma_Pi = rho gamma_sys / (rho + ln(N c_A + N^2 c_B c_K)).
/// (tau, rho) must certify A + BK; (c_A, c_B, c_K, gamma_sys) must be valid
/// SED certificates for A, B and K at the same rate.
Theorem1Constants theorem1_constants(const LinearSystem& sys, const PolicyMatrix& K,
                                     int agent, double tau, double rho, double c_A,
                                     double c_B, double c_K, double gamma_sys, int N);

/// c_Hi = max(||S_i|| + N^2 c_A^2 c_Pi, N^2 c_A c_B c_Pi, ||R_i|| + N^2 c_B^2 c_Pi).
double corollary1_constant(double norm_Si, double norm_Ri, double c_A, double c_B,
                           double c_Pi, int N);

/// sqrt(N) c_Hi e^{-gamma_Pi kappa}, the truncation error bound.
double corollary2_bound(double c_Hi, double gamma_Pi, int kappa, int N);

struct TruncationErrors {
  double e11 = 0.0;  // ||H_i11 - trunc^kappa H_i11||
  double e12 = 0.0;
  double e22 = 0.0;
  double max() const;
};

/// Measured spectral-norm truncation errors of the three H_i submatrices.
TruncationErrors truncation_errors(const QMatrixBlocks& Hi, int anchor, int kappa,
                                   const NetworkGraph& g);

/// Measured SED data for a system's A and B at a shared rate: gamma_sys is
/// the smaller of the two fitted rates, c_A / c_B are the minimal constants
/// at that rate clamped to >= 1 (the theorem statements assume c >= 1).
struct SystemSedSummary {
  double c_A = 1.0;
  double c_B = 1.0;
  double gamma_sys = 0.0;
  DecayReport report_A;
  DecayReport report_B;
};

SystemSedSummary measure_system_sed(const LinearSystem& sys);

/// All inputs and outputs of the Theorem 1 / Corollary 1-2 chain for one
/// agent, measured and certified on a concrete system and policy.
struct TheoremCertificate {
  StabilityCert stability;       // for A + BK
  SystemSedSummary system_sed;
  double c_K = 0.0;              // minimal constant of K at gamma_used
  double gamma_used = 0.0;       // min(gamma_sys, fitted gamma of K)
  Theorem1Constants thm1;
  double c_Hi = 0.0;
  int agent = 0;
};

/// Measures every constant feeding Theorem 1 / Corollaries 1-2 for `agent`.
TheoremCertificate certify_agent(const LinearSystem& sys, const PolicyMatrix& K, int agent);

/// True iff every block of X satisfies ||[X]_lj|| <= c e^{-gamma dist} (+1e-9
/// relative slack), with the away-from-anchor distance when anchor is set.
bool envelope_holds(const Eigen::MatrixXd& X, const NetworkGraph& g, Dim row_kind,
                    Dim col_kind, double c, double gamma,
                    std::optional<int> anchor = std::nullopt);

struct SedAlgebraReport {
  // Lemma: X + Y is (c_x + c_y, min gamma)-SED.
  bool sum_ok = false;
  // Lemma: XY is (N c_x c_y, min gamma)-SED.
  bool product_ok = false;
  // Lemma: X SED away from anchor, Y SED => XY SED away from anchor.
  bool product_away_ok = false;
  double c_x = 0.0, gamma_x = 0.0;
  double c_y = 0.0, gamma_y = 0.0;
};

/// Verifies the SED algebra lemmas blockwise on a square pair (state x state
/// partition); the away-from variant is checked for every anchor.
SedAlgebraReport sed_algebra_checks(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                                    const NetworkGraph& g);

struct Lemma6Report {
  double c = 0.0;       // ||[S]_ii|| + ||[R]_ii|| c_K^2
  double gamma = 0.0;   // rate at which c_K was measured
  bool holds = false;   // envelope verified on S_i + [K]_i:' [R]_ii [K]_i:
};

/// Checks the stage-cost matrix envelope of the helper lemma behind
/// Theorem 1 for one agent.
Lemma6Report lemma6_check(const LinearSystem& sys, const PolicyMatrix& K, int agent);

}  // namespace netlqr
