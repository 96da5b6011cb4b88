// netlqr: build networked LQR benchmark systems, run distributed
// actor-critic learning, sweep neighborhood sizes and emit decay reports.
//
// Exit codes: 0 success, 2 configuration/usage error, 3 runtime instability,
// 4 numerical failure.

#include <CLI11.hpp>
#include <Eigen/Core>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "netlqr/config.hpp"
#include "netlqr/errors.hpp"
#include "netlqr/learner.hpp"
#include "netlqr/linalg.hpp"
#include "netlqr/parallel.hpp"
#include "netlqr/sed.hpp"
#include "netlqr/serialize.hpp"
#include "netlqr/simulator.hpp"
#include "netlqr/thermal.hpp"
#include "netlqr/version.hpp"

namespace fs = std::filesystem;
using namespace netlqr;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitInstability = 3;
constexpr int kExitNumerical = 4;

struct CommonOptions {
  std::string output_dir = ".";
  std::string config_path;
  int jobs = default_jobs();
};

/// "file value unless the flag was passed" precedence.
template <typename T>
void apply_config(const CLI::Option* opt, const ConfigFile& cfg, const std::string& key,
                  T& value) {
  if (opt->count() > 0 || !cfg.has(key)) return;
  std::istringstream stream(cfg.get_string(key, ""));
  T parsed;
  if (stream >> parsed) {
    value = parsed;
  } else {
    throw ConfigError(key + ": cannot parse '" + cfg.get_string(key, "") + "'");
  }
}

void apply_config_string(const CLI::Option* opt, const ConfigFile& cfg,
                         const std::string& key, std::string& value) {
  if (opt->count() == 0 && cfg.has(key)) value = cfg.get_string(key, value);
}

std::vector<std::pair<std::string, std::string>> flatten(const ConfigFile& cfg) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [k, v] : cfg.entries()) out.emplace_back(k, v);
  return out;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// generate

struct GenerateArgs {
  CommonOptions common;
  bool thermal = true;
  ThermalConfig thermal_cfg;
  std::string discretization = "euler";
};

int run_generate(const GenerateArgs& args, const ConfigFile& cfg) {
  ThermalConfig tc = args.thermal_cfg;
  if (args.discretization == "euler") {
    tc.discretization = Discretization::Euler;
  } else if (args.discretization == "exact") {
    tc.discretization = Discretization::Exact;
  } else {
    throw ConfigError("unknown discretization '" + args.discretization + "'");
  }
  const ThermalSystem built = build_thermal_system(tc);
  fs::create_directories(args.common.output_dir);
  save_system(built.system, args.common.output_dir);

  RunManifest manifest;
  manifest.command = "generate";
  manifest.seed = tc.seed;
  manifest.timestamp = iso8601_now();
  manifest.config = flatten(cfg);
  manifest.config.emplace_back("thermal.rows", std::to_string(tc.rows));
  manifest.config.emplace_back("thermal.cols", std::to_string(tc.cols));
  manifest.config.emplace_back("thermal.zeta", fmt(tc.zeta));
  manifest.config.emplace_back("thermal.v_mean", fmt(tc.v_mean));
  manifest.config.emplace_back("thermal.v_std", fmt(tc.v_std));
  manifest.config.emplace_back("thermal.s", fmt(tc.s));
  manifest.config.emplace_back("thermal.dt", fmt(tc.dt));
  manifest.config.emplace_back("thermal.sigma_w", fmt(tc.sigma_w));
  manifest.config.emplace_back("thermal.discretization", args.discretization);
  manifest.config.emplace_back("thermal.capacitance_resamples",
                               std::to_string(built.resamples));
  manifest.outputs = {"system.json", "system_A.nlqm", "system_B.nlqm", "system_S.nlqm",
                      "system_R.nlqm"};
  save_manifest(manifest, (fs::path(args.common.output_dir) / "manifest.json").string());
  std::printf("generated %dx%d thermal system (N=%d) in %s\n", tc.rows, tc.cols,
              built.system.graph.num_agents(), args.common.output_dir.c_str());
  return kExitOk;
}

// ---------------------------------------------------------------------------
// learn

LearnerConfig benchmark_defaults() {
  // The grid experiment's parameter set: K0 = -3I, T_c = 100000,
  // sigma_eta = 10, T_a = 10000, alpha = 0.005.
  LearnerConfig lc;
  lc.kappa = 3;
  lc.k_max = 50;
  lc.T_c = 100000;
  lc.sigma_eta = 10.0;
  lc.T_a = 10000;
  lc.alpha = 0.005;
  lc.sigma_w = 1.0;
  return lc;
}

struct LearnArgs {
  CommonOptions common;
  std::string system_path;
  LearnerConfig lc = benchmark_defaults();
  double k0_diag = -3.0;
  std::string k0_path;
  std::string mode = "estimated-q";
  bool dump_evaluation = false;
  bool dump_qestimate = false;
};

LearnerConfig resolve_learner(const LearnArgs& args, const LinearSystem& sys) {
  LearnerConfig lc = args.lc;
  if (args.mode == "estimated-q") {
    lc.mode = QMode::EstimatedQ;
  } else if (args.mode == "exact-q") {
    lc.mode = QMode::ExactQ;
  } else {
    throw ConfigError("unknown mode '" + args.mode + "'");
  }
  if (!args.k0_path.empty()) {
    lc.K0 = load_policy(args.k0_path).K;
  } else {
    lc.K0 = PolicyMatrix::diagonal(sys.graph, args.k0_diag).K;
  }
  lc.jobs = args.common.jobs;
  return lc;
}

int run_learn(const LearnArgs& args, const ConfigFile& cfg) {
  const LinearSystem sys_file = load_system(args.system_path);
  LinearSystem sys = sys_file;
  LearnerConfig lc = resolve_learner(args, sys);
  sys.sigma_w = lc.sigma_w;

  const DareSolution opt = solve_dare(sys);
  const double J_opt = lc.sigma_w * lc.sigma_w * opt.P.trace();

  const LearningRun run = learn(sys, lc);

  fs::create_directories(args.common.output_dir);
  save_metrics_csv(run, J_opt, (fs::path(args.common.output_dir) / "metrics.csv").string());
  save_policy(run.final_policy, args.common.output_dir, "policy_final");

  RunManifest manifest;
  manifest.command = "learn";
  manifest.seed = lc.seed;
  manifest.timestamp = iso8601_now();
  manifest.config = flatten(cfg);
  manifest.config.emplace_back("learner.kappa", std::to_string(lc.kappa));
  manifest.config.emplace_back("learner.k_max", std::to_string(lc.k_max));
  manifest.config.emplace_back("learner.T_c", std::to_string(lc.T_c));
  manifest.config.emplace_back("learner.T_a", std::to_string(lc.T_a));
  manifest.config.emplace_back("learner.sigma_eta", fmt(lc.sigma_eta));
  manifest.config.emplace_back("learner.alpha", fmt(lc.alpha));
  manifest.config.emplace_back("learner.sigma_w", fmt(lc.sigma_w));
  manifest.config.emplace_back("learner.burn_in", std::to_string(lc.burn_in));
  manifest.config.emplace_back("learner.mode", args.mode);
  manifest.config.emplace_back("learner.jobs", std::to_string(args.common.jobs));
  manifest.config.emplace_back("system", args.system_path);
  manifest.outputs = {"metrics.csv", "policy_final.json"};
  if (run.aborted) {
    manifest.config.emplace_back("run.aborted_iteration",
                                 std::to_string(run.abort_iteration));
    manifest.config.emplace_back("run.abort_reason", run.abort_reason);
  }
  save_manifest(manifest, (fs::path(args.common.output_dir) / "manifest.json").string());

  if (args.dump_qestimate && run.has_estimate) {
    save_qestimate_json(run.last_estimate,
                        (fs::path(args.common.output_dir) / "qestimate.json").string());
  }

  if (args.dump_evaluation && !run.aborted) {
    const PolicyEvaluation ev = evaluate_policy(sys, run.final_policy, args.common.jobs);
    const fs::path base(args.common.output_dir);
    save_matrix_csv(ev.P, (base / "P.csv").string());
    save_matrix_csv(ev.H.H11, (base / "H11.csv").string());
    save_matrix_csv(ev.H.H12, (base / "H12.csv").string());
    save_matrix_csv(ev.H.H22, (base / "H22.csv").string());
  }

  if (run.aborted) {
    std::fprintf(stderr, "learn: aborted at iteration %d: %s\n", run.abort_iteration,
                 run.abort_reason.c_str());
    return kExitInstability;
  }
  const double rel = run.records.back().J / J_opt - 1.0;
  std::printf("learn: %zu iterations, final J = %s, relative cost = %s\n",
              run.records.size() - 1, fmt(run.records.back().J).c_str(), fmt(rel).c_str());
  return kExitOk;
}

// ---------------------------------------------------------------------------
// decay

struct DecayArgs {
  CommonOptions common;
  std::string system_path;
  std::string matrix = "A_cl";
  int agent = 0;
  double gain_diag = -3.0;
  std::string policy_path;
};

int run_decay(const DecayArgs& args, const ConfigFile& cfg) {
  const LinearSystem sys = load_system(args.system_path);
  PolicyMatrix K = args.policy_path.empty()
                       ? PolicyMatrix::diagonal(sys.graph, args.gain_diag)
                       : load_policy(args.policy_path);
  fs::create_directories(args.common.output_dir);
  const fs::path base(args.common.output_dir);

  RunManifest manifest;
  manifest.command = "decay";
  manifest.timestamp = iso8601_now();
  manifest.config = flatten(cfg);
  manifest.config.emplace_back("decay.matrix", args.matrix);
  manifest.config.emplace_back("decay.agent", std::to_string(args.agent));
  manifest.config.emplace_back("system", args.system_path);

  if (args.matrix == "A_cl") {
    const DecayReport rep =
        measure_sed(closed_loop(sys, K), sys.graph, Dim::State, Dim::State);
    save_decay_csv(rep, rep.fitted_c, rep.fitted_gamma, (base / "decay_A_cl.csv").string());
    std::ofstream((base / "decay_A_cl.json").string()) << decay_report_json(rep);
    manifest.outputs = {"decay_A_cl.csv", "decay_A_cl.json"};
  } else if (args.matrix == "P_i") {
    const TheoremCertificate cert = certify_agent(sys, K, args.agent);
    const Eigen::MatrixXd Pi = value_matrix_Pi(sys, K, args.agent);
    const DecayReport rep = measure_sed(Pi, sys.graph, Dim::State, Dim::State,
                                        DecayMode::SedAwayFrom, args.agent);
    save_decay_csv(rep, cert.thm1.c_Pi, cert.thm1.gamma_Pi,
                   (base / "decay_P_i.csv").string());
    std::ofstream((base / "decay_P_i.json").string()) << decay_report_json(rep);
    std::ofstream((base / "constants_P_i.json").string())
        << theorem_certificate_json(cert);
    manifest.outputs = {"decay_P_i.csv", "decay_P_i.json", "constants_P_i.json"};
  } else if (args.matrix == "H_i") {
    const TheoremCertificate cert = certify_agent(sys, K, args.agent);
    const QMatrixBlocks Hi = qfun_matrix_Hi(sys, K, args.agent);
    const struct {
      const char* name;
      const Eigen::MatrixXd& M;
      Dim rows, cols;
    } blocks[] = {{"H_i11", Hi.H11, Dim::State, Dim::State},
                  {"H_i12", Hi.H12, Dim::State, Dim::Input},
                  {"H_i22", Hi.H22, Dim::Input, Dim::Input}};
    for (const auto& blk : blocks) {
      const DecayReport rep = measure_sed(blk.M, sys.graph, blk.rows, blk.cols,
                                          DecayMode::SedAwayFrom, args.agent);
      const std::string csv = "decay_" + std::string(blk.name) + ".csv";
      save_decay_csv(rep, cert.c_Hi, cert.thm1.gamma_Pi, (base / csv).string());
      manifest.outputs.push_back(csv);
    }
    std::ofstream((base / "constants_H_i.json").string())
        << theorem_certificate_json(cert);
    manifest.outputs.push_back("constants_H_i.json");
  } else {
    throw ConfigError("unknown matrix kind '" + args.matrix + "'");
  }
  save_manifest(manifest, (base / "manifest.json").string());
  std::printf("decay: wrote %s report to %s\n", args.matrix.c_str(),
              args.common.output_dir.c_str());
  return kExitOk;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepArgs {
  CommonOptions common;
  std::string system_path;
  std::string kappas = "1,2,3,5";
  LearnerConfig lc = benchmark_defaults();
  double k0_diag = -3.0;
  std::string modes = "both";
  int decay_agent = 0;
};

int run_sweep(const SweepArgs& args, const ConfigFile& cfg) {
  const LinearSystem sys_file = load_system(args.system_path);
  LinearSystem sys = sys_file;
  sys.sigma_w = args.lc.sigma_w;

  std::vector<int> kappas;
  std::istringstream ks(args.kappas);
  std::string tok;
  while (std::getline(ks, tok, ',')) {
    if (tok.empty()) continue;
    int k = 0;
    try {
      k = std::stoi(tok);
    } catch (const std::exception&) {
      throw ConfigError("sweep: bad kappa '" + tok + "'");
    }
    if (k < 1) throw ConfigError("sweep: kappa must be >= 1, got " + tok);
    kappas.push_back(k);
  }
  if (kappas.empty()) throw ConfigError("sweep: no kappa values given");
  const bool run_exact = args.modes == "both" || args.modes == "exact";
  const bool run_estimated = args.modes == "both" || args.modes == "estimated";
  if (!run_exact && !run_estimated) {
    throw ConfigError("sweep: modes must be exact, estimated, or both");
  }

  LearnerConfig lc = args.lc;
  lc.K0 = PolicyMatrix::diagonal(sys.graph, args.k0_diag).K;
  const int outer = static_cast<int>(
      std::min<size_t>(kappas.size(), static_cast<size_t>(std::max(1, args.common.jobs))));
  lc.jobs = std::max(1, args.common.jobs / outer);

  const DareSolution opt = solve_dare(sys);
  const double J_opt = lc.sigma_w * lc.sigma_w * opt.P.trace();
  fs::create_directories(args.common.output_dir);
  const fs::path base(args.common.output_dir);

  struct Entry {
    int kappa = 0;
    std::optional<LearningRun> exact;
    std::optional<LearningRun> estimated;
  };
  std::vector<Entry> entries(kappas.size());
  parallel_for(static_cast<int>(kappas.size()), args.common.jobs, [&](int e) {
    Entry& entry = entries[e];
    entry.kappa = kappas[e];
    LearnerConfig run_cfg = lc;
    run_cfg.kappa = kappas[e];
    if (run_exact) {
      run_cfg.mode = QMode::ExactQ;
      entry.exact = learn(sys, run_cfg);
    }
    if (run_estimated) {
      run_cfg.mode = QMode::EstimatedQ;
      entry.estimated = learn(sys, run_cfg);
    }
  });

  RunManifest manifest;
  manifest.command = "sweep";
  manifest.seed = lc.seed;
  manifest.timestamp = iso8601_now();
  manifest.config = flatten(cfg);
  manifest.config.emplace_back("sweep.kappas", args.kappas);
  manifest.config.emplace_back("sweep.modes", args.modes);
  manifest.config.emplace_back("learner.k_max", std::to_string(lc.k_max));
  manifest.config.emplace_back("learner.T_c", std::to_string(lc.T_c));
  manifest.config.emplace_back("learner.T_a", std::to_string(lc.T_a));
  manifest.config.emplace_back("learner.sigma_eta", fmt(lc.sigma_eta));
  manifest.config.emplace_back("learner.alpha", fmt(lc.alpha));
  manifest.config.emplace_back("learner.sigma_w", fmt(lc.sigma_w));
  manifest.config.emplace_back("system", args.system_path);

  std::ostringstream summary;
  summary << "kappa,final_relative_cost_exactQ,final_relative_cost_estimatedQ,aborted\n";
  bool any_aborted = false;
  for (const auto& entry : entries) {
    std::ostringstream table;
    table << "iter,relative_cost_exactQ,relative_cost_estimatedQ\n";
    const size_t rows = std::max(entry.exact ? entry.exact->records.size() : 0,
                                 entry.estimated ? entry.estimated->records.size() : 0);
    for (size_t k = 0; k < rows; ++k) {
      table << k << ",";
      if (entry.exact && k < entry.exact->records.size()) {
        table << fmt(entry.exact->records[k].J / J_opt - 1.0);
      }
      table << ",";
      if (entry.estimated && k < entry.estimated->records.size()) {
        table << fmt(entry.estimated->records[k].J / J_opt - 1.0);
      }
      table << "\n";
    }
    const std::string name = "sweep_kappa" + std::to_string(entry.kappa) + ".csv";
    std::ofstream((base / name).string()) << table.str();
    manifest.outputs.push_back(name);

    const bool aborted = (entry.exact && entry.exact->aborted) ||
                         (entry.estimated && entry.estimated->aborted);
    any_aborted = any_aborted || aborted;
    summary << entry.kappa << ",";
    if (entry.exact) summary << fmt(entry.exact->records.back().J / J_opt - 1.0);
    summary << ",";
    if (entry.estimated) summary << fmt(entry.estimated->records.back().J / J_opt - 1.0);
    summary << "," << (aborted ? 1 : 0) << "\n";
  }
  std::ofstream((base / "sweep_summary.csv").string()) << summary.str();
  manifest.outputs.push_back("sweep_summary.csv");

  // Decay data for the initial closed loop and the probe agent's P_i.
  const PolicyMatrix K0 = PolicyMatrix::diagonal(sys.graph, args.k0_diag);
  const DecayReport acl =
      measure_sed(closed_loop(sys, K0), sys.graph, Dim::State, Dim::State);
  save_decay_csv(acl, acl.fitted_c, acl.fitted_gamma, (base / "decay_A_cl.csv").string());
  const DecayReport pd = measure_sed(value_matrix_Pi(sys, K0, args.decay_agent), sys.graph,
                                     Dim::State, Dim::State, DecayMode::SedAwayFrom,
                                     args.decay_agent);
  save_decay_csv(pd, pd.fitted_c, pd.fitted_gamma, (base / "decay_P_i.csv").string());
  manifest.outputs.push_back("decay_A_cl.csv");
  manifest.outputs.push_back("decay_P_i.csv");

  save_manifest(manifest, (base / "manifest.json").string());
  std::printf("sweep: wrote %zu kappa tables to %s\n", entries.size(),
              args.common.output_dir.c_str());
  return any_aborted ? kExitInstability : kExitOk;
}

void add_common(CLI::App* cmd, CommonOptions& common) {
  cmd->add_option("--output-dir", common.output_dir, "Directory for artifacts");
  cmd->add_option("--config", common.config_path, "Sectioned key=value config file");
  cmd->add_option("--jobs", common.jobs, "Worker threads / parallel sweep entries");
}

ConfigFile load_common_config(const CommonOptions& common) {
  if (common.config_path.empty()) return ConfigFile();
  return ConfigFile::parse_file(common.config_path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"networked LQR actor-critic learning toolkit"};
  app.set_version_flag("--version", std::string("netlqr ") + version_string());
  app.require_subcommand(1);

  GenerateArgs gen_args;
  CLI::App* gen = app.add_subcommand("generate", "Build a benchmark system");
  add_common(gen, gen_args.common);
  gen->add_flag("--thermal", gen_args.thermal, "Thermal room-grid model (default)");
  auto* opt_rows = gen->add_option("--rows", gen_args.thermal_cfg.rows, "Grid rows");
  auto* opt_cols = gen->add_option("--cols", gen_args.thermal_cfg.cols, "Grid cols");
  auto* opt_zeta = gen->add_option("--zeta", gen_args.thermal_cfg.zeta, "Thermal resistance");
  auto* opt_vm = gen->add_option("--v-mean", gen_args.thermal_cfg.v_mean, "Capacitance mean");
  auto* opt_vs = gen->add_option("--v-std", gen_args.thermal_cfg.v_std, "Capacitance std");
  auto* opt_s = gen->add_option("--s", gen_args.thermal_cfg.s, "State cost weight");
  auto* opt_dt = gen->add_option("--dt", gen_args.thermal_cfg.dt, "Discretization step");
  auto* opt_sw = gen->add_option("--sigma-w", gen_args.thermal_cfg.sigma_w, "Plant noise std");
  auto* opt_disc =
      gen->add_option("--discretization", gen_args.discretization, "euler|exact");
  auto* opt_seed = gen->add_option("--seed", gen_args.thermal_cfg.seed, "Capacitance seed");

  LearnArgs learn_args;
  CLI::App* lrn = app.add_subcommand("learn", "Run the actor-critic learner");
  add_common(lrn, learn_args.common);
  lrn->add_option("--system", learn_args.system_path, "system.json path")->required();
  auto* l_kappa = lrn->add_option("--kappa", learn_args.lc.kappa, "Neighborhood size");
  auto* l_kmax = lrn->add_option("--kmax", learn_args.lc.k_max, "Policy iterations");
  auto* l_tc = lrn->add_option("--Tc", learn_args.lc.T_c, "Critic trajectory length");
  auto* l_ta = lrn->add_option("--Ta", learn_args.lc.T_a, "Actor trajectory length");
  auto* l_se = lrn->add_option("--sigma-eta", learn_args.lc.sigma_eta, "Exploration std");
  auto* l_al = lrn->add_option("--alpha", learn_args.lc.alpha, "Actor step size");
  auto* l_sw = lrn->add_option("--sigma-w", learn_args.lc.sigma_w, "Plant noise std");
  auto* l_bi = lrn->add_option("--burn-in", learn_args.lc.burn_in, "Rollout burn-in");
  auto* l_seed = lrn->add_option("--seed", learn_args.lc.seed, "Run seed");
  auto* l_mode = lrn->add_option("--mode", learn_args.mode, "estimated-q|exact-q");
  lrn->add_option("--k0-diag", learn_args.k0_diag, "Initial diagonal gain value");
  lrn->add_option("--k0", learn_args.k0_path, "Initial policy.json (overrides --k0-diag)");
  lrn->add_flag("--dump-evaluation", learn_args.dump_evaluation,
                "Write P/H11/H12/H22 CSVs of the final policy");
  lrn->add_flag("--dump-qestimate", learn_args.dump_qestimate,
                "Write the last Q-estimate with per-agent condition numbers");

  DecayArgs decay_args;
  CLI::App* dec = app.add_subcommand("decay", "Measure spatial decay envelopes");
  add_common(dec, decay_args.common);
  dec->add_option("--system", decay_args.system_path, "system.json path")->required();
  dec->add_option("--matrix", decay_args.matrix, "A_cl|P_i|H_i");
  dec->add_option("--agent", decay_args.agent, "Anchor agent for P_i / H_i");
  dec->add_option("--gain-diag", decay_args.gain_diag, "Diagonal gain for the policy");
  dec->add_option("--policy", decay_args.policy_path, "policy.json (overrides --gain-diag)");

  SweepArgs sweep_args;
  CLI::App* swp = app.add_subcommand("sweep", "Run the kappa sweep");
  add_common(swp, sweep_args.common);
  swp->add_option("--system", sweep_args.system_path, "system.json path")->required();
  swp->add_option("--kappas", sweep_args.kappas, "Comma-separated kappa list");
  auto* s_kmax = swp->add_option("--kmax", sweep_args.lc.k_max, "Policy iterations");
  auto* s_tc = swp->add_option("--Tc", sweep_args.lc.T_c, "Critic trajectory length");
  auto* s_ta = swp->add_option("--Ta", sweep_args.lc.T_a, "Actor trajectory length");
  auto* s_se = swp->add_option("--sigma-eta", sweep_args.lc.sigma_eta, "Exploration std");
  auto* s_al = swp->add_option("--alpha", sweep_args.lc.alpha, "Actor step size");
  auto* s_sw = swp->add_option("--sigma-w", sweep_args.lc.sigma_w, "Plant noise std");
  auto* s_seed = swp->add_option("--seed", sweep_args.lc.seed, "Run seed");
  swp->add_option("--modes", sweep_args.modes, "exact|estimated|both");
  swp->add_option("--k0-diag", sweep_args.k0_diag, "Initial diagonal gain value");
  swp->add_option("--decay-agent", sweep_args.decay_agent, "Anchor for the P_i report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (gen->parsed()) {
      const ConfigFile cfg = load_common_config(gen_args.common);
      apply_config(opt_rows, cfg, "thermal.rows", gen_args.thermal_cfg.rows);
      apply_config(opt_cols, cfg, "thermal.cols", gen_args.thermal_cfg.cols);
      apply_config(opt_zeta, cfg, "thermal.zeta", gen_args.thermal_cfg.zeta);
      apply_config(opt_vm, cfg, "thermal.v_mean", gen_args.thermal_cfg.v_mean);
      apply_config(opt_vs, cfg, "thermal.v_std", gen_args.thermal_cfg.v_std);
      apply_config(opt_s, cfg, "thermal.s", gen_args.thermal_cfg.s);
      apply_config(opt_dt, cfg, "thermal.dt", gen_args.thermal_cfg.dt);
      apply_config(opt_sw, cfg, "thermal.sigma_w", gen_args.thermal_cfg.sigma_w);
      apply_config(opt_seed, cfg, "thermal.seed", gen_args.thermal_cfg.seed);
      apply_config_string(opt_disc, cfg, "thermal.discretization", gen_args.discretization);
      return run_generate(gen_args, cfg);
    }
    if (lrn->parsed()) {
      const ConfigFile cfg = load_common_config(learn_args.common);
      apply_config(l_kappa, cfg, "learner.kappa", learn_args.lc.kappa);
      apply_config(l_kmax, cfg, "learner.k_max", learn_args.lc.k_max);
      apply_config(l_tc, cfg, "learner.T_c", learn_args.lc.T_c);
      apply_config(l_ta, cfg, "learner.T_a", learn_args.lc.T_a);
      apply_config(l_se, cfg, "learner.sigma_eta", learn_args.lc.sigma_eta);
      apply_config(l_al, cfg, "learner.alpha", learn_args.lc.alpha);
      apply_config(l_sw, cfg, "learner.sigma_w", learn_args.lc.sigma_w);
      apply_config(l_bi, cfg, "learner.burn_in", learn_args.lc.burn_in);
      apply_config(l_seed, cfg, "learner.seed", learn_args.lc.seed);
      apply_config_string(l_mode, cfg, "learner.mode", learn_args.mode);
      return run_learn(learn_args, cfg);
    }
    if (dec->parsed()) {
      const ConfigFile cfg = load_common_config(decay_args.common);
      return run_decay(decay_args, cfg);
    }
    if (swp->parsed()) {
      const ConfigFile cfg = load_common_config(sweep_args.common);
      apply_config(s_kmax, cfg, "learner.k_max", sweep_args.lc.k_max);
      apply_config(s_tc, cfg, "learner.T_c", sweep_args.lc.T_c);
      apply_config(s_ta, cfg, "learner.T_a", sweep_args.lc.T_a);
      apply_config(s_se, cfg, "learner.sigma_eta", sweep_args.lc.sigma_eta);
      apply_config(s_al, cfg, "learner.alpha", sweep_args.lc.alpha);
      apply_config(s_sw, cfg, "learner.sigma_w", sweep_args.lc.sigma_w);
      apply_config(s_seed, cfg, "learner.seed", sweep_args.lc.seed);
      return run_sweep(sweep_args, cfg);
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const ArgumentError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const InstabilityError& e) {
    std::fprintf(stderr, "instability: %s\n", e.what());
    return kExitInstability;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "failure: %s\n", e.what());
    return kExitNumerical;
  }
  return kExitConfig;
}
