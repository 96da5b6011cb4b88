#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "netlqr/learner.hpp"
#include "netlqr/sed.hpp"
#include "netlqr/system.hpp"

namespace netlqr {

enum class Discretization { Euler, Exact };

/// Room-grid thermal model: rooms exchange heat with grid neighbors through
/// a shared resistance, each room has its own heater input.
struct ThermalConfig {
  int rows = 5;
  int cols = 5;
  double zeta = 0.5;       // thermal resistance between neighboring rooms
  double v_mean = 200.0;   // capacitance mean
  double v_std = 20.0;     // capacitance standard deviation
  double s = 5.0;          // state cost weight (S = s I)
  double dt = 0.25;        // discretization step
  double sigma_w = 1.0;    // plant noise std (not printed in the model source)
  uint64_t seed = 0;       // capacitance sampling seed
  Discretization discretization = Discretization::Euler;
};

struct ThermalSystem {
  LinearSystem system;
  std::vector<double> capacitances;
  int resamples = 0;  // draws rejected for being nonpositive
};

/// Continuous dynamics xdot_i = sum_j (x_j - x_i) / (v_i zeta) + u_i / v_i
/// on the grid, discretized either by forward Euler (A = I + dt A_c, keeps
/// the nearest-neighbor sparsity) or exactly through the matrix exponential.
/// Capacitances are v_mean + v_std * N(0,1), redrawn while nonpositive.
ThermalSystem build_thermal_system(const ThermalConfig& cfg);

struct SweepEntry {
  int kappa = 0;
  LearningRun exact_run;
  LearningRun estimated_run;
  std::vector<double> relative_cost_exact;      // per iteration
  std::vector<double> relative_cost_estimated;  // per iteration
};

struct ExperimentReport {
  ThermalConfig thermal;
  LearnerConfig learner;   // kappa field varies per entry
  double J_opt = 0.0;
  std::vector<SweepEntry> entries;
  DecayReport closed_loop_decay;  // A + B K0
  DecayReport value_decay;        // P_i away from the probe agent
  int decay_agent = 0;
};

/// The grid experiment: for each kappa, runs the learner in exact-Q and
/// estimated-Q mode from the same K0 and reports relative costs per
/// iteration, plus decay envelopes of A + BK0 and of P_i for `decay_agent`.
/// Sweep entries run as independent learner invocations, in parallel up to
/// `sweep_jobs`.
ExperimentReport run_paper_experiment(const ThermalConfig& thermal,
                                      const LearnerConfig& learner,
                                      const std::vector<int>& kappas,
                                      int decay_agent = 0, int sweep_jobs = 1);

}  // namespace netlqr
