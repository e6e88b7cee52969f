#include "looptune/tuner.hpp"

#include <chrono>
#include <cmath>

#include "looptune/errors.hpp"
#include "looptune/estimation/noisy_source.hpp"

namespace looptune {

std::string to_string(SystemKind k) {
  return k == SystemKind::dubins ? "dubins" : "quadrotor";
}

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::gd: return "gd";
    case Strategy::gdm: return "gdm";
    case Strategy::ls: return "ls";
    case Strategy::gn: return "gn";
    case Strategy::lm: return "lm";
    case Strategy::bfgs: return "bfgs";
  }
  return "unknown";
}

std::string to_string(TerminationReason r) {
  switch (r) {
    case TerminationReason::rel_tol: return "rel_tol";
    case TerminationReason::max_iters: return "max_iters";
    case TerminationReason::negative_curvature: return "negative_curvature";
    case TerminationReason::singular_system: return "singular_system";
    case TerminationReason::divergence: return "divergence";
  }
  return "unknown";
}

SystemKind system_from_string(const std::string& name) {
  if (name == "dubins") return SystemKind::dubins;
  if (name == "quadrotor") return SystemKind::quadrotor;
  throw ConfigError("unknown system: " + name);
}

Strategy strategy_from_string(const std::string& name) {
  if (name == "gd") return Strategy::gd;
  if (name == "gdm") return Strategy::gdm;
  if (name == "ls") return Strategy::ls;
  if (name == "gn") return Strategy::gn;
  if (name == "lm") return Strategy::lm;
  if (name == "bfgs") return Strategy::bfgs;
  throw ConfigError("unknown strategy: " + name);
}

TuneConfig default_config(SystemKind system, TrajectoryKind trajectory, Strategy strategy) {
  TuneConfig cfg;
  cfg.system = system;
  cfg.trajectory = trajectory;
  cfg.strategy = strategy;
  cfg.max_iters = 100;

  if (system == SystemKind::dubins) {
    cfg.dt = 0.001;
    cfg.N = 10000;  // 10 s
    cfg.rel_tol = 1e-4;
    cfg.initial_theta = Vec::Constant(kDubinsParamDim, 5.0);
    cfg.feasible_set = FeasibleSet::lower_bounded(kDubinsParamDim, 0.5);
    if (strategy == Strategy::gd || strategy == Strategy::gdm) cfg.alpha = 2.0;
    if (strategy == Strategy::gdm) cfg.beta = 0.99;
    if (strategy == Strategy::lm) cfg.mu = 0.01;
  } else {
    cfg.dt = 0.0025;
    cfg.N = 2512;  // one 2*pi period of the circle
    cfg.rel_tol = 0.0;  // fixed iteration count
    cfg.initial_theta = Vec(kQuadParamDim);
    cfg.initial_theta << 16.0, 16.0, 16.0, 5.6, 5.6, 5.6, 8.8, 8.8, 8.8, 2.54, 2.54, 2.54;
    cfg.feasible_set = FeasibleSet::lower_bounded(kQuadParamDim, 0.5);
    if (strategy == Strategy::gd || strategy == Strategy::gdm) cfg.alpha = 1e-3;
    if (strategy == Strategy::gdm) cfg.beta = 0.5;
    if (strategy == Strategy::lm) cfg.mu = 20.0;
  }
  cfg.dubins_params.dt = cfg.dt;
  cfg.quad_params.dt = cfg.dt;
  return cfg;
}

void validate_config(const TuneConfig& cfg) {
  if (cfg.max_iters < 1) throw ConfigError("max_iters must be >= 1");
  if (cfg.rel_tol < 0.0) throw ConfigError("rel_tol must be nonnegative");
  if (cfg.lambda < 0.0) throw ConfigError("lambda must be nonnegative");
  if (cfg.dt <= 0.0) throw ConfigError("dt must be positive");
  if (cfg.N < 1) throw ConfigError("N must be >= 1");
  if (cfg.trials < 1) throw ConfigError("trials must be >= 1");

  const bool dubins = cfg.system == SystemKind::dubins;
  if (dubins && cfg.trajectory != TrajectoryKind::dubins_circle) {
    throw ConfigError("dubins supports only the dubins_circle trajectory");
  }
  if (!dubins && cfg.trajectory == TrajectoryKind::dubins_circle) {
    throw ConfigError("quadrotor requires circle3d or figure8");
  }
  if (dubins && cfg.noise) {
    throw ConfigError("sensor noise is modeled for the quadrotor only");
  }

  const int p = dubins ? kDubinsParamDim : kQuadParamDim;
  if (cfg.initial_theta.size() != p) {
    throw ConfigError("initial_theta must have length " + std::to_string(p));
  }
  if (cfg.feasible_set.lower.size() != p) {
    throw ConfigError("feasible_set bounds must have length " + std::to_string(p));
  }
  if (cfg.feasible_set.upper) {
    if (cfg.feasible_set.upper->size() != p) {
      throw ConfigError("feasible_set upper bounds must have length " + std::to_string(p));
    }
    if ((cfg.feasible_set.upper->array() <= cfg.feasible_set.lower.array()).any()) {
      throw ConfigError("feasible_set upper bounds must exceed lower bounds");
    }
  }

  // hyperparameter contract: gd/gdm need alpha, gdm needs beta, lm needs mu
  switch (cfg.strategy) {
    case Strategy::gd:
      if (!cfg.alpha || *cfg.alpha <= 0.0) throw ConfigError("gd requires alpha > 0");
      break;
    case Strategy::gdm:
      if (!cfg.alpha || *cfg.alpha <= 0.0) throw ConfigError("gdm requires alpha > 0");
      if (!cfg.beta || *cfg.beta < 0.0 || *cfg.beta >= 1.0)
        throw ConfigError("gdm requires beta in [0, 1)");
      break;
    case Strategy::lm:
      if (!cfg.mu || *cfg.mu <= 0.0) throw ConfigError("lm requires mu > 0");
      break;
    case Strategy::ls:
    case Strategy::gn:
    case Strategy::bfgs:
      break;  // hyperparameter-free
  }
}

Instance build_instance(const TuneConfig& cfg) {
  Instance inst;
  if (cfg.system == SystemKind::dubins) {
    DubinsParams prm = cfg.dubins_params;
    prm.dt = cfg.dt;
    inst.model = make_dubins_model(prm);
    inst.desired = dubins_circle_trajectory(cfg.dubins_circle, cfg.dt, cfg.N);
    // default start: at rest on the circle with matched heading, so tuning has
    // a catch-up transient to shrink
    inst.x0 = dubins_circle_initial_state(cfg.dubins_circle, cfg.dubins_v0.value_or(0.0),
                                          cfg.dubins_omega0.value_or(0.0));
    inst.loss_cfg = LossConfig{cfg.lambda, {0, 1}};
  } else {
    QuadParams prm = cfg.quad_params;
    prm.dt = cfg.dt;
    inst.model = make_quad_model(prm);
    inst.desired = make_trajectory(cfg.trajectory, cfg.dt, cfg.N);
    inst.x0 = quad_initial_state(inst.desired.front());
    inst.loss_cfg = LossConfig{cfg.lambda, {0, 1, 2}};
  }
  return inst;
}

double relative_loss_change(double current, double previous) {
  return std::abs(current - previous) / std::max(std::abs(previous), 1e-30);
}

namespace {

StepOutcome dispatch_step(const TuneConfig& cfg, const ParamVector& theta, const Vec& grad,
                          const Rollout& rollout, const SensitivitySet& sens,
                          const LossConfig& loss_cfg, UpdaterState& state) {
  switch (cfg.strategy) {
    case Strategy::gd:
      return gd_step(theta, grad, *cfg.alpha, cfg.feasible_set);
    case Strategy::gdm:
      return gdm_step(theta, grad, *cfg.alpha, *cfg.beta, state, cfg.feasible_set);
    case Strategy::ls:
      return line_search_step(theta, grad, rollout, sens, loss_cfg, cfg.feasible_set);
    case Strategy::gn:
      return gauss_newton_step(theta, grad, build_curvature(sens, loss_cfg), cfg.feasible_set);
    case Strategy::lm:
      return lm_step(theta, grad, build_curvature(sens, loss_cfg), *cfg.mu, cfg.feasible_set);
    case Strategy::bfgs:
      return bfgs_step(theta, grad, rollout, sens, loss_cfg, state, cfg.feasible_set);
  }
  throw ConfigError("unknown strategy");
}

}  // namespace

RunArtifact tune(const TuneConfig& cfg) {
  validate_config(cfg);
  return tune_on(cfg, build_instance(cfg));
}

RunArtifact tune_on(const TuneConfig& cfg, const Instance& inst) {
  if (cfg.initial_theta.size() != inst.model.p ||
      cfg.feasible_set.lower.size() != inst.model.p) {
    throw ConfigError("tune_on: theta/bounds length does not match the instance");
  }
  const auto t_start = std::chrono::steady_clock::now();

  ParamVector theta = project(cfg.initial_theta, cfg.feasible_set);
  UpdaterState ustate;
  RunArtifact art;
  double prev_loss = 0.0;

  for (int iter = 0; iter <= cfg.max_iters; ++iter) {
    GradientResult gr;
    double loss_value = 0.0;
    double rmse_value = 0.0;
    try {
      if (cfg.noise) {
        NoisyLoopSource source(inst.model, inst.desired, theta, inst.x0, *cfg.noise);
        gr = evaluate_gradient(inst.model, theta, inst.desired, inst.x0, inst.loss_cfg,
                               std::ref(source));
        // report on the true trajectory; tune on the estimated one
        Rollout true_view = gr.rollout;
        true_view.states = source.true_states();
        loss_value = loss(true_view, inst.loss_cfg);
        rmse_value = rmse(true_view, inst.loss_cfg);
      } else {
        gr = evaluate_gradient(inst.model, theta, inst.desired, inst.x0, inst.loss_cfg);
        loss_value = loss(gr.rollout, inst.loss_cfg);
        rmse_value = rmse(gr.rollout, inst.loss_cfg);
      }
    } catch (const DivergenceError&) {
      TuneRecord rec;
      rec.iteration = iter;
      rec.loss = std::numeric_limits<double>::infinity();
      rec.rmse = std::numeric_limits<double>::infinity();
      rec.theta = theta;
      rec.step = Vec::Zero(theta.size());
      art.records.push_back(std::move(rec));
      art.termination_reason = TerminationReason::divergence;
      break;
    }

    TuneRecord rec;
    rec.iteration = iter;
    rec.loss = loss_value;
    rec.rmse = rmse_value;
    rec.grad_norm = gr.grad.norm();
    rec.theta = theta;
    rec.step = Vec::Zero(theta.size());

    if (iter == cfg.max_iters) {
      art.records.push_back(std::move(rec));
      art.termination_reason = TerminationReason::max_iters;
      break;
    }
    if (iter >= 1 && relative_loss_change(loss_value, prev_loss) < cfg.rel_tol) {
      art.records.push_back(std::move(rec));
      art.termination_reason = TerminationReason::rel_tol;
      break;
    }
    prev_loss = loss_value;

    StepOutcome outcome;
    if (gr.grad.norm() == 0.0 && cfg.strategy != Strategy::gdm) {
      // stationary point: every strategy's correct update is no update (GDM
      // still dispatches so an accumulated momentum buffer keeps acting)
      outcome.new_theta = theta;
      outcome.epsilon = Vec::Zero(theta.size());
    } else {
      outcome = dispatch_step(cfg, theta, gr.grad, gr.rollout, gr.sens, inst.loss_cfg, ustate);
    }
    rec.step = outcome.epsilon;
    rec.strategy_diag = outcome.diag;
    art.records.push_back(std::move(rec));

    if (outcome.status == StepStatus::terminated_negative_curvature) {
      art.termination_reason = TerminationReason::negative_curvature;
      break;
    }
    if (outcome.status == StepStatus::singular_system) {
      art.termination_reason = TerminationReason::singular_system;
      break;
    }
    theta = outcome.new_theta;
  }

  art.final_theta = theta;
  art.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return art;
}

ComparisonTable compare_strategies(const TuneConfig& base_config,
                                   const std::vector<Strategy>& strategies) {
  if (strategies.empty()) throw ConfigError("compare_strategies: empty strategy list");

  ComparisonTable table;
  for (Strategy s : strategies) {
    TuneConfig cfg = base_config;
    cfg.strategy = s;
    // fill strategy hyperparameters missing from the base config
    const TuneConfig defaults = default_config(cfg.system, cfg.trajectory, s);
    if (!cfg.alpha) cfg.alpha = defaults.alpha;
    if (!cfg.beta) cfg.beta = defaults.beta;
    if (!cfg.mu) cfg.mu = defaults.mu;

    ComparisonRow row;
    row.strategy = s;
    RunArtifact art;
    try {
      art = tune(cfg);
      const TuneRecord& last = art.records.back();
      row.final_loss = last.loss;
      row.final_rmse = last.rmse;
      row.termination = art.termination_reason;
      row.iterations = last.iteration;
      row.final_theta = art.final_theta;
    } catch (const std::exception& e) {
      row.failed = true;
      row.error = e.what();
    }
    table.rows.push_back(std::move(row));
    table.artifacts.push_back(std::move(art));
  }
  return table;
}

}  // namespace looptune
