#include "netlqr/learner.hpp"

#include <chrono>
#include <limits>
#include <memory>

#include "netlqr/actor.hpp"
#include "netlqr/errors.hpp"
#include "netlqr/linalg.hpp"
#include "netlqr/simulator.hpp"

namespace netlqr {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

void LearnerConfig::validate() const {
  if (kappa < 1) throw ConfigError("learner: kappa must be >= 1");
  if (k_max < 0) throw ConfigError("learner: k_max must be >= 0");
  if (T_c < 1) throw ConfigError("learner: T_c must be >= 1");
  if (T_a < 1) throw ConfigError("learner: T_a must be >= 1");
  if (alpha <= 0) throw ConfigError("learner: alpha must be > 0");
  if (sigma_eta < 0) throw ConfigError("learner: sigma_eta must be >= 0");
  if (sigma_w < 0) throw ConfigError("learner: sigma_w must be >= 0");
  if (burn_in < 0) throw ConfigError("learner: burn_in must be >= 0");
  if (K0.size() == 0) throw ConfigError("learner: K0 is required");
}

LearningRun learn(const LinearSystem& sys_in, const LearnerConfig& cfg) {
  cfg.validate();
  LinearSystem sys = sys_in;
  sys.sigma_w = cfg.sigma_w;
  const NetworkGraph& g = sys.graph;

  if (!in_policy_class(cfg.K0, cfg.kappa, g)) {
    throw ConfigError("learner: K0 is not in the policy class K^kappa");
  }
  PolicyMatrix K = PolicyMatrix::truncated(cfg.K0, cfg.kappa);
  {
    const double radius = spectral_radius(closed_loop(sys, K));
    if (radius >= 1.0) {
      throw ConfigError("learner: K0 does not stabilize the plant (radius " +
                        std::to_string(radius) + ")");
    }
  }

  LearningRun run;
  auto t0 = std::chrono::steady_clock::now();

  // Algorithm line 1: one off-policy dataset under K0, reused by every
  // iteration's critic.
  std::unique_ptr<CriticEstimator> critic;
  if (cfg.mode == QMode::EstimatedQ) {
    RolloutConfig rc;
    rc.T = cfg.T_c + 1;  // T_c + 1 (x, u) pairs
    rc.sigma_eta = cfg.sigma_eta;
    rc.seed = cfg.seed;
    rc.stream_domain = stream::critic_data;
    rc.burn_in = cfg.burn_in;
    rc.policy_id = "K0";
    const Trajectory traj = rollout(sys, K, rc);
    const std::vector<LocalDataset> datasets = collect_local_datasets(traj, g, cfg.kappa);
    run.critic_rollouts = 1;
    critic = std::make_unique<CriticEstimator>(datasets, cfg.T_c, cfg.kappa, cfg.sigma_w,
                                               g, cfg.jobs);
  }
  run.times.collect_s = seconds_since(t0);

  auto record_policy = [&](int iter, const PolicyMatrix& Kk) -> bool {
    const auto te = std::chrono::steady_clock::now();
    const double radius = spectral_radius(closed_loop(sys, Kk));
    if (radius >= 1.0) {
      run.aborted = true;
      run.abort_iteration = iter;
      run.abort_reason = "policy at iteration " + std::to_string(iter) +
                         " destabilizes the plant (radius " + std::to_string(radius) + ")";
      run.times.eval_s += seconds_since(te);
      return false;
    }
    IterationRecord rec;
    rec.iter = iter;
    rec.K = Kk.K;
    rec.J = sys.sigma_w * sys.sigma_w * value_matrix_global(sys, Kk).trace();
    run.records.push_back(std::move(rec));
    run.times.eval_s += seconds_since(te);
    return true;
  };

  if (!record_policy(0, K)) {
    // cannot happen: K0 stability was checked above
    run.final_policy = K;
    return run;
  }

  for (int k = 0; k < cfg.k_max; ++k) {
    // Critic.
    auto tc = std::chrono::steady_clock::now();
    QEstimate H;
    if (cfg.mode == QMode::EstimatedQ) {
      H = critic->estimate(K, cfg.jobs);
    } else {
      H = exact_truncated_q(sys, K, cfg.kappa, cfg.jobs);
    }
    run.records.back().max_cond = H.max_cond();
    run.times.critic_s += seconds_since(tc);
    run.last_estimate = H;
    run.has_estimate = true;

    // Actor.
    auto ta = std::chrono::steady_clock::now();
    ActorResult step;
    try {
      step = update_policy(K, H, sys, cfg.T_a, cfg.alpha, cfg.seed,
                           stream::actor(static_cast<uint32_t>(k)), cfg.burn_in,
                           cfg.jobs);
    } catch (const InstabilityError& e) {
      run.aborted = true;
      run.abort_iteration = k;
      run.abort_reason = std::string("actor rollout diverged at iteration ") +
                         std::to_string(k) + ": " + e.what();
      run.times.actor_s += seconds_since(ta);
      run.final_policy = K;
      return run;
    }
    run.records.back().grad_norm = step.grad_norm;
    run.times.actor_s += seconds_since(ta);

    K = step.next;
    if (!record_policy(k + 1, K)) {
      run.final_policy =
          PolicyMatrix::truncated(run.records.back().K, cfg.kappa);
      return run;
    }
  }

  run.final_policy = K;
  return run;
}

double relative_cost(const LinearSystem& sys, const PolicyMatrix& K) {
  const DareSolution opt = solve_dare(sys);
  const double J_opt =
      sys.sigma_w * sys.sigma_w * opt.P.trace();
  return relative_cost(sys, K, J_opt);
}

double relative_cost(const LinearSystem& sys, const PolicyMatrix& K, double J_opt) {
  if (J_opt <= 0) {
    // Degenerate optimum (e.g. sigma_w = 0): relative cost is 0 iff J is too.
    return average_cost(sys, K).J <= 0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return average_cost(sys, K).J / J_opt - 1.0;
}

}  // namespace netlqr
