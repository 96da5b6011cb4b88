#include "netlqr/thermal.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include "netlqr/errors.hpp"
#include "netlqr/linalg.hpp"
#include "netlqr/parallel.hpp"
#include "netlqr/rng.hpp"

namespace netlqr {

ThermalSystem build_thermal_system(const ThermalConfig& cfg) {
  if (cfg.rows <= 0 || cfg.cols <= 0) throw ArgumentError("thermal: grid shape must be positive");
  if (cfg.zeta <= 0 || cfg.v_mean <= 0 || cfg.v_std < 0 || cfg.s <= 0 || cfg.dt <= 0) {
    throw ArgumentError("thermal: physical parameters must be positive");
  }
  NetworkGraph g = NetworkGraph::grid(cfg.rows, cfg.cols);
  const int N = g.num_agents();

  ThermalSystem out{LinearSystem{g, {}, {}, {}, {}, cfg.sigma_w}, {}, 0};
  out.capacitances.resize(N);
  const CounterRng rng(cfg.seed, stream::capacitance);
  for (int i = 0; i < N; ++i) {
    double v = 0.0;
    uint32_t attempt = 0;
    do {
      if (attempt > 1000) throw NumericalError("thermal: capacitance sampling stuck");
      v = cfg.v_mean + cfg.v_std * rng.normal(NoiseKind::Process, i, attempt, 0);
      if (v <= 0) ++out.resamples;
      ++attempt;
    } while (v <= 0);
    out.capacitances[i] = v;
  }

  Eigen::MatrixXd Ac = Eigen::MatrixXd::Zero(N, N);
  Eigen::MatrixXd Bc = Eigen::MatrixXd::Zero(N, N);
  for (int i = 0; i < N; ++i) {
    const double vi = out.capacitances[i];
    for (int j = 0; j < N; ++j) {
      if (!g.adjacent(i, j)) continue;
      Ac(i, j) = 1.0 / (vi * cfg.zeta);
      Ac(i, i) -= 1.0 / (vi * cfg.zeta);
    }
    Bc(i, i) = 1.0 / vi;
  }

  LinearSystem& sys = out.system;
  if (cfg.discretization == Discretization::Euler) {
    sys.A = Eigen::MatrixXd::Identity(N, N) + cfg.dt * Ac;
    sys.B = cfg.dt * Bc;
  } else {
    // Exact zero-order-hold discretization of the augmented system; this
    // densifies A, which is why Euler is the default for the decay studies.
    Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(2 * N, 2 * N);
    aug.topLeftCorner(N, N) = cfg.dt * Ac;
    aug.topRightCorner(N, N) = cfg.dt * Bc;
    const Eigen::MatrixXd expm = aug.exp();
    sys.A = expm.topLeftCorner(N, N);
    sys.B = expm.topRightCorner(N, N);
  }
  sys.S = cfg.s * Eigen::MatrixXd::Identity(N, N);
  sys.R = Eigen::MatrixXd::Identity(N, N);
  sys.sigma_w = cfg.sigma_w;
  return out;
}

ExperimentReport run_paper_experiment(const ThermalConfig& thermal,
                                      const LearnerConfig& learner,
                                      const std::vector<int>& kappas, int decay_agent,
                                      int sweep_jobs) {
  if (kappas.empty()) throw ArgumentError("run_paper_experiment: no kappa values");
  for (int k : kappas) {
    if (k < 1) throw ArgumentError("run_paper_experiment: kappa must be >= 1");
  }
  ExperimentReport report;
  report.thermal = thermal;
  report.learner = learner;
  report.decay_agent = decay_agent;

  const ThermalSystem built = build_thermal_system(thermal);
  LinearSystem sys = built.system;
  sys.sigma_w = learner.sigma_w;

  const PolicyMatrix K0 = PolicyMatrix::truncated(learner.K0, 1);
  {
    const double radius = spectral_radius(closed_loop(sys, K0));
    if (radius >= 1.0) {
      throw ConfigError("run_paper_experiment: K0 does not stabilize the grid");
    }
  }
  const DareSolution opt = solve_dare(sys);
  report.J_opt = sys.sigma_w * sys.sigma_w * opt.P.trace();

  report.closed_loop_decay =
      measure_sed(closed_loop(sys, K0), sys.graph, Dim::State, Dim::State);
  report.value_decay = measure_sed(value_matrix_Pi(sys, K0, decay_agent), sys.graph,
                                   Dim::State, Dim::State, DecayMode::SedAwayFrom,
                                   decay_agent);

  report.entries.resize(kappas.size());
  const int entry_jobs = std::max(1, sweep_jobs);
  const int inner_jobs = std::max(1, learner.jobs);
  parallel_for(static_cast<int>(kappas.size()), entry_jobs, [&](int e) {
    SweepEntry& entry = report.entries[e];
    entry.kappa = kappas[e];
    LearnerConfig cfg = learner;
    cfg.kappa = kappas[e];
    cfg.jobs = inner_jobs;

    cfg.mode = QMode::ExactQ;
    entry.exact_run = learn(sys, cfg);
    cfg.mode = QMode::EstimatedQ;
    entry.estimated_run = learn(sys, cfg);

    for (const auto& rec : entry.exact_run.records) {
      entry.relative_cost_exact.push_back(rec.J / report.J_opt - 1.0);
    }
    for (const auto& rec : entry.estimated_run.records) {
      entry.relative_cost_estimated.push_back(rec.J / report.J_opt - 1.0);
    }
  });
  return report;
}

}  // namespace netlqr
