#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "netlqr/critic.hpp"
#include "netlqr/learner.hpp"
#include "netlqr/sed.hpp"
#include "netlqr/simulator.hpp"
#include "netlqr/system.hpp"

namespace netlqr {

// --- dense matrix container -------------------------------------------------
// Binary: magic "NLQM", u32 version, i64 rows, i64 cols, row-major doubles
// (little endian). CSV: "rows,cols" header line, then one row per line with
// full-precision (%.17g) values.

void save_matrix(const Eigen::MatrixXd& M, const std::string& path);
Eigen::MatrixXd load_matrix(const std::string& path);

void save_matrix_csv(const Eigen::MatrixXd& M, const std::string& path);
Eigen::MatrixXd load_matrix_csv(const std::string& path);

// --- system / policy artifacts ----------------------------------------------
// A system is a JSON file holding the graph (edges + dimensions), sigma_w and
// relative paths of the four matrix files stored next to it.

void save_system(const LinearSystem& sys, const std::string& dir,
                 const std::string& stem = "system");
LinearSystem load_system(const std::string& json_path);

void save_policy(const PolicyMatrix& K, const std::string& dir,
                 const std::string& stem = "policy");
PolicyMatrix load_policy(const std::string& json_path);

// --- reports ------------------------------------------------------------------

/// distance, max_block_norm, theoretical_envelope rows. The third column is
/// c * exp(-gamma d) for the given pair (fitted constants by default).
void save_decay_csv(const DecayReport& report, double c, double gamma,
                    const std::string& path);

std::string decay_report_json(const DecayReport& report);
std::string theorem_certificate_json(const TheoremCertificate& cert);

void save_qestimate_json(const QEstimate& est, const std::string& path);
QEstimate load_qestimate_json(const std::string& path);

/// iter, J, relative_cost, grad_norm, max_cond rows.
void save_metrics_csv(const LearningRun& run, double J_opt, const std::string& path);

/// t, x_1..x_n, u_1..u_m, c_1..c_N rows.
void save_trajectory_csv(const Trajectory& traj, const std::string& path);

// --- run manifest -------------------------------------------------------------

struct RunManifest {
  std::string command;
  std::vector<std::pair<std::string, std::string>> config;  // resolved key/value pairs
  uint64_t seed = 0;
  std::vector<std::string> outputs;
  std::string timestamp;  // informational only, excluded from determinism checks
};

void save_manifest(const RunManifest& manifest, const std::string& path);

std::string iso8601_now();

}  // namespace netlqr
