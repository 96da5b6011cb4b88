#include "netlqr/serialize.hpp"

#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "netlqr/errors.hpp"
#include "netlqr/version.hpp"

namespace netlqr {

using nlohmann::json;

namespace fs = std::filesystem;

const char* version_string() {
#ifdef NETLQR_VERSION_STRING
  return NETLQR_VERSION_STRING;
#else
  return "0.0.0";
#endif
}

namespace {

constexpr char kMagic[4] = {'N', 'L', 'Q', 'M'};
constexpr uint32_t kFormatVersion = 1;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ArgumentError("cannot open " + path + " for writing");
  out << text;
  if (!out) throw NumericalError("write to " + path + " failed");
}

json graph_to_json(const NetworkGraph& g) {
  json j;
  j["num_agents"] = g.num_agents();
  json edges = json::array();
  for (auto [a, b] : g.edges()) edges.push_back({a, b});
  j["edges"] = edges;
  std::vector<int> nd, md;
  for (int i = 0; i < g.num_agents(); ++i) {
    nd.push_back(g.state_dim(i));
    md.push_back(g.input_dim(i));
  }
  j["state_dims"] = nd;
  j["input_dims"] = md;
  return j;
}

NetworkGraph graph_from_json(const json& j) {
  std::vector<std::pair<int, int>> edges;
  for (const auto& e : j.at("edges")) edges.emplace_back(e.at(0), e.at(1));
  return NetworkGraph(j.at("num_agents"), edges, j.at("state_dims"), j.at("input_dims"));
}

json matrix_to_json(const Eigen::MatrixXd& M) {
  json rows = json::array();
  for (long r = 0; r < M.rows(); ++r) {
    json row = json::array();
    for (long c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
    rows.push_back(row);
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  const long rows = static_cast<long>(j.size());
  const long cols = rows == 0 ? 0 : static_cast<long>(j.at(0).size());
  Eigen::MatrixXd M(rows, cols);
  for (long r = 0; r < rows; ++r) {
    for (long c = 0; c < cols; ++c) M(r, c) = j.at(r).at(c).get<double>();
  }
  return M;
}

}  // namespace

void save_matrix(const Eigen::MatrixXd& M, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ArgumentError("cannot open " + path + " for writing");
  out.write(kMagic, 4);
  const uint32_t version = kFormatVersion;
  const int64_t rows = M.rows(), cols = M.cols();
  out.write(reinterpret_cast<const char*>(&version), sizeof version);
  out.write(reinterpret_cast<const char*>(&rows), sizeof rows);
  out.write(reinterpret_cast<const char*>(&cols), sizeof cols);
  for (int64_t r = 0; r < rows; ++r) {
    for (int64_t c = 0; c < cols; ++c) {
      const double v = M(r, c);
      out.write(reinterpret_cast<const char*>(&v), sizeof v);
    }
  }
  if (!out) throw NumericalError("write to " + path + " failed");
}

Eigen::MatrixXd load_matrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot open " + path);
  char magic[4];
  uint32_t version = 0;
  int64_t rows = 0, cols = 0;
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(&version), sizeof version);
  in.read(reinterpret_cast<char*>(&rows), sizeof rows);
  in.read(reinterpret_cast<char*>(&cols), sizeof cols);
  if (!in || std::memcmp(magic, kMagic, 4) != 0 || version != kFormatVersion ||
      rows < 0 || cols < 0) {
    throw ArgumentError(path + " is not a matrix container");
  }
  Eigen::MatrixXd M(rows, cols);
  for (int64_t r = 0; r < rows; ++r) {
    for (int64_t c = 0; c < cols; ++c) {
      double v;
      in.read(reinterpret_cast<char*>(&v), sizeof v);
      M(r, c) = v;
    }
  }
  if (!in) throw ArgumentError(path + " is truncated");
  return M;
}

void save_matrix_csv(const Eigen::MatrixXd& M, const std::string& path) {
  std::ostringstream out;
  out << M.rows() << "," << M.cols() << "\n";
  for (long r = 0; r < M.rows(); ++r) {
    for (long c = 0; c < M.cols(); ++c) {
      if (c) out << ",";
      out << format_double(M(r, c));
    }
    out << "\n";
  }
  write_text(path, out.str());
}

Eigen::MatrixXd load_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw ArgumentError(path + ": missing header");
  long rows = 0, cols = 0;
  if (std::sscanf(line.c_str(), "%ld,%ld", &rows, &cols) != 2 || rows < 0 || cols < 0) {
    throw ArgumentError(path + ": bad header");
  }
  Eigen::MatrixXd M(rows, cols);
  for (long r = 0; r < rows; ++r) {
    if (!std::getline(in, line)) throw ArgumentError(path + ": truncated");
    std::istringstream ls(line);
    std::string cell;
    for (long c = 0; c < cols; ++c) {
      if (!std::getline(ls, cell, ',')) throw ArgumentError(path + ": short row");
      M(r, c) = std::stod(cell);
    }
  }
  return M;
}

void save_system(const LinearSystem& sys, const std::string& dir, const std::string& stem) {
  fs::create_directories(dir);
  const fs::path base(dir);
  save_matrix(sys.A, (base / (stem + "_A.nlqm")).string());
  save_matrix(sys.B, (base / (stem + "_B.nlqm")).string());
  save_matrix(sys.S, (base / (stem + "_S.nlqm")).string());
  save_matrix(sys.R, (base / (stem + "_R.nlqm")).string());
  json j;
  j["format"] = "netlqr-system";
  j["version"] = version_string();
  j["graph"] = graph_to_json(sys.graph);
  j["sigma_w"] = sys.sigma_w;
  j["matrices"] = {{"A", stem + "_A.nlqm"},
                   {"B", stem + "_B.nlqm"},
                   {"S", stem + "_S.nlqm"},
                   {"R", stem + "_R.nlqm"}};
  write_text((base / (stem + ".json")).string(), j.dump(2) + "\n");
}

LinearSystem load_system(const std::string& json_path) {
  std::ifstream in(json_path);
  if (!in) throw ArgumentError("cannot open " + json_path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ArgumentError(json_path + ": " + e.what());
  }
  if (j.value("format", "") != "netlqr-system") {
    throw ArgumentError(json_path + " is not a system file");
  }
  const fs::path base = fs::path(json_path).parent_path();
  LinearSystem sys{graph_from_json(j.at("graph")),
                   load_matrix((base / j.at("matrices").at("A").get<std::string>()).string()),
                   load_matrix((base / j.at("matrices").at("B").get<std::string>()).string()),
                   load_matrix((base / j.at("matrices").at("S").get<std::string>()).string()),
                   load_matrix((base / j.at("matrices").at("R").get<std::string>()).string()),
                   j.at("sigma_w")};
  sys.validate();
  return sys;
}

void save_policy(const PolicyMatrix& K, const std::string& dir, const std::string& stem) {
  fs::create_directories(dir);
  const fs::path base(dir);
  save_matrix(K.K, (base / (stem + "_K.nlqm")).string());
  save_matrix_csv(K.K, (base / (stem + "_K.csv")).string());
  json j;
  j["format"] = "netlqr-policy";
  j["version"] = version_string();
  if (K.kappa) j["kappa"] = *K.kappa;
  j["matrix"] = stem + "_K.nlqm";
  write_text((base / (stem + ".json")).string(), j.dump(2) + "\n");
}

PolicyMatrix load_policy(const std::string& json_path) {
  std::ifstream in(json_path);
  if (!in) throw ArgumentError("cannot open " + json_path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ArgumentError(json_path + ": " + e.what());
  }
  if (j.value("format", "") != "netlqr-policy") {
    throw ArgumentError(json_path + " is not a policy file");
  }
  const fs::path base = fs::path(json_path).parent_path();
  PolicyMatrix K;
  K.K = load_matrix((base / j.at("matrix").get<std::string>()).string());
  if (j.contains("kappa")) K.kappa = j.at("kappa").get<int>();
  return K;
}

void save_decay_csv(const DecayReport& report, double c, double gamma,
                    const std::string& path) {
  std::ostringstream out;
  out << "distance,max_block_norm,theoretical_envelope\n";
  for (size_t d = 0; d < report.envelope.size(); ++d) {
    out << d << "," << format_double(report.envelope[d]) << ","
        << format_double(c * std::exp(-gamma * static_cast<double>(d))) << "\n";
  }
  write_text(path, out.str());
}

std::string decay_report_json(const DecayReport& report) {
  json j;
  j["mode"] = report.mode == DecayMode::Sed ? "sed" : "sed-away-from";
  if (report.anchor) j["anchor"] = *report.anchor;
  j["envelope"] = report.envelope;
  j["fitted_c"] = report.fitted_c;
  j["fitted_gamma"] = report.fitted_gamma;
  j["certified"] = report.certified;
  return j.dump(2) + "\n";
}

std::string theorem_certificate_json(const TheoremCertificate& cert) {
  json j;
  j["agent"] = cert.agent;
  j["tau"] = cert.stability.tau;
  j["rho"] = cert.stability.rho;
  j["spectral_radius"] = cert.stability.spectral_radius;
  j["c_A"] = cert.system_sed.c_A;
  j["c_B"] = cert.system_sed.c_B;
  j["gamma_sys"] = cert.system_sed.gamma_sys;
  j["c_K"] = cert.c_K;
  j["gamma_used"] = cert.gamma_used;
  j["c_Pi"] = cert.thm1.c_Pi;
  j["gamma_Pi"] = cert.thm1.gamma_Pi;
  j["c_Hi"] = cert.c_Hi;
  return j.dump(2) + "\n";
}

void save_qestimate_json(const QEstimate& est, const std::string& path) {
  json j;
  j["format"] = "netlqr-qestimate";
  j["version"] = version_string();
  j["kappa"] = est.kappa;
  json agents = json::array();
  for (size_t i = 0; i < est.h_hat.size(); ++i) {
    json a;
    a["h"] = std::vector<double>(est.h_hat[i].data(), est.h_hat[i].data() + est.h_hat[i].size());
    a["cond"] = est.cond[static_cast<long>(i)];
    a["ill_conditioned"] = static_cast<bool>(est.ill_conditioned[i]);
    agents.push_back(a);
  }
  j["agents"] = agents;
  j["H11"] = matrix_to_json(est.H11);
  j["H12"] = matrix_to_json(est.H12);
  j["H22"] = matrix_to_json(est.H22);
  write_text(path, j.dump() + "\n");
}

QEstimate load_qestimate_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ArgumentError(path + ": " + e.what());
  }
  if (j.value("format", "") != "netlqr-qestimate") {
    throw ArgumentError(path + " is not a Q-estimate file");
  }
  QEstimate est;
  est.kappa = j.at("kappa");
  const auto& agents = j.at("agents");
  est.cond.resize(static_cast<long>(agents.size()));
  long idx = 0;
  for (const auto& a : agents) {
    const std::vector<double> h = a.at("h");
    est.h_hat.emplace_back(Eigen::Map<const Eigen::VectorXd>(h.data(), h.size()));
    est.H_local.push_back(Eigen::MatrixXd());
    est.cond[idx] = a.at("cond");
    est.ill_conditioned.push_back(a.at("ill_conditioned").get<bool>() ? 1 : 0);
    ++idx;
  }
  est.H11 = matrix_from_json(j.at("H11"));
  est.H12 = matrix_from_json(j.at("H12"));
  est.H22 = matrix_from_json(j.at("H22"));
  return est;
}

void save_metrics_csv(const LearningRun& run, double J_opt, const std::string& path) {
  std::ostringstream out;
  out << "iter,J,relative_cost,grad_norm,max_cond\n";
  for (const auto& rec : run.records) {
    out << rec.iter << "," << format_double(rec.J) << ","
        << format_double(J_opt > 0 ? rec.J / J_opt - 1.0 : 0.0) << ","
        << format_double(rec.grad_norm) << "," << format_double(rec.max_cond) << "\n";
  }
  write_text(path, out.str());
}

void save_trajectory_csv(const Trajectory& traj, const std::string& path) {
  std::ostringstream out;
  out << "t";
  for (long i = 0; i < traj.states.rows(); ++i) out << ",x_" << (i + 1);
  for (long i = 0; i < traj.inputs.rows(); ++i) out << ",u_" << (i + 1);
  for (long i = 0; i < traj.agent_costs.rows(); ++i) out << ",c_" << (i + 1);
  out << "\n";
  for (long t = 0; t < traj.length(); ++t) {
    out << t;
    for (long i = 0; i < traj.states.rows(); ++i)
      out << "," << format_double(traj.states(i, t));
    for (long i = 0; i < traj.inputs.rows(); ++i)
      out << "," << format_double(traj.inputs(i, t));
    for (long i = 0; i < traj.agent_costs.rows(); ++i)
      out << "," << format_double(traj.agent_costs(i, t));
    out << "\n";
  }
  write_text(path, out.str());
}

void save_manifest(const RunManifest& manifest, const std::string& path) {
  json j;
  j["format"] = "netlqr-manifest";
  j["tool_version"] = version_string();
  j["command"] = manifest.command;
  j["seed"] = manifest.seed;
  j["timestamp"] = manifest.timestamp;
  json cfg = json::object();
  for (const auto& [k, v] : manifest.config) cfg[k] = v;
  j["config"] = cfg;
  j["outputs"] = manifest.outputs;
  write_text(path, j.dump(2) + "\n");
}

std::string iso8601_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace netlqr
