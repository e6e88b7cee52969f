#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "looptune/errors.hpp"
#include "looptune/estimation/monte_carlo.hpp"
#include "looptune/tuner.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitConfig = 2;
constexpr int kExitDivergence = 3;
constexpr int kExitIo = 4;

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::string strategy;
  std::string system;
  std::string trajectory;
  std::optional<std::int64_t> seed;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "JSON config file");
  cmd->add_option("--seed", args.seed, "override the config seed");
  cmd->add_option("--out", args.out_dir, "output directory");
  cmd->add_option("--strategy", args.strategy, "override the config strategy")
      ->check(CLI::IsMember({"gd", "gdm", "ls", "gn", "lm", "bfgs"}));
  cmd->add_option("--system", args.system, "system when no config is given")
      ->check(CLI::IsMember({"dubins", "quadrotor"}));
  cmd->add_option("--trajectory", args.trajectory, "trajectory when no config is given")
      ->check(CLI::IsMember({"dubins_circle", "circle3d", "figure8"}));
}

looptune::TuneConfig resolve_config(const CommonArgs& args) {
  using namespace looptune;
  TuneConfig cfg;
  if (!args.config_path.empty()) {
    cfg = load_config(args.config_path);
    if (!args.system.empty() && system_from_string(args.system) != cfg.system) {
      throw ConfigError("--system conflicts with the config file");
    }
  } else {
    const SystemKind system =
        args.system.empty() ? SystemKind::dubins : system_from_string(args.system);
    TrajectoryKind trajectory = system == SystemKind::dubins ? TrajectoryKind::dubins_circle
                                                             : TrajectoryKind::circle3d;
    if (!args.trajectory.empty()) trajectory = trajectory_from_string(args.trajectory);
    const Strategy strategy =
        args.strategy.empty() ? Strategy::ls : strategy_from_string(args.strategy);
    cfg = default_config(system, trajectory, strategy);
  }
  if (!args.strategy.empty()) {
    cfg.strategy = strategy_from_string(args.strategy);
    const TuneConfig defaults = default_config(cfg.system, cfg.trajectory, cfg.strategy);
    if (!cfg.alpha) cfg.alpha = defaults.alpha;
    if (!cfg.beta) cfg.beta = defaults.beta;
    if (!cfg.mu) cfg.mu = defaults.mu;
  }
  if (args.seed) {
    cfg.seed = static_cast<std::uint64_t>(*args.seed);
    if (cfg.noise) cfg.noise->seed = cfg.seed;
  }
  if (!args.out_dir.empty()) cfg.output_dir = args.out_dir;
  return cfg;
}

int run_tune(const CommonArgs& args) {
  using namespace looptune;
  const TuneConfig cfg = resolve_config(args);
  const RunArtifact art = tune(cfg);
  emit_artifacts(art, cfg, cfg.output_dir);
  const TuneRecord& last = art.records.back();
  std::printf("%s %s %s: iterations=%d loss=%.6g rmse=%.6g (%s), artifacts in %s\n",
              to_string(cfg.system).c_str(), to_string(cfg.trajectory).c_str(),
              to_string(cfg.strategy).c_str(), last.iteration, last.loss, last.rmse,
              to_string(art.termination_reason).c_str(), cfg.output_dir.c_str());
  return art.termination_reason == TerminationReason::divergence ? kExitDivergence : kExitOk;
}

int run_compare(const CommonArgs& args, const std::vector<std::string>& names) {
  using namespace looptune;
  const TuneConfig cfg = resolve_config(args);
  std::vector<Strategy> strategies;
  if (names.empty()) {
    strategies = cfg.system == SystemKind::dubins
                     ? std::vector<Strategy>{Strategy::gd, Strategy::gdm, Strategy::lm, Strategy::ls}
                     : std::vector<Strategy>{Strategy::gd, Strategy::gdm, Strategy::ls,
                                             Strategy::gn, Strategy::lm, Strategy::bfgs};
  } else {
    for (const auto& name : names) strategies.push_back(strategy_from_string(name));
  }
  const ComparisonTable table = compare_strategies(cfg, strategies);
  emit_comparison(table, cfg, cfg.output_dir);
  std::printf("%-6s %-8s %-14s %-14s %s\n", "name", "status", "final_loss", "final_rmse",
              "termination");
  for (const ComparisonRow& row : table.rows) {
    if (row.failed) {
      std::printf("%-6s %-8s %-14s %-14s %s\n", to_string(row.strategy).c_str(), "failed", "-",
                  "-", row.error.c_str());
    } else {
      std::printf("%-6s %-8s %-14.6g %-14.6g %s\n", to_string(row.strategy).c_str(), "ok",
                  row.final_loss, row.final_rmse, to_string(row.termination).c_str());
    }
  }
  return kExitOk;
}

int run_monte_carlo_cmd(const CommonArgs& args, std::optional<int> trials,
                        const std::vector<std::string>& strategy_names) {
  using namespace looptune;
  TuneConfig cfg = resolve_config(args);
  if (cfg.system != SystemKind::quadrotor) {
    throw ConfigError("montecarlo requires the quadrotor system");
  }
  if (!cfg.noise) cfg.noise = NoiseSpec{};
  const int n_trials = trials.value_or(cfg.trials);

  if (strategy_names.empty()) {
    const MonteCarloResult result = run_monte_carlo(cfg, n_trials);
    emit_monte_carlo(result, cfg.output_dir);
    std::printf("montecarlo: %d trials (%zu failed), final mean loss %.6g, artifacts in %s\n",
                result.trials, result.failed_trials.size(),
                result.mean_loss.empty() ? 0.0 : result.mean_loss.back(),
                cfg.output_dir.c_str());
    return kExitOk;
  }

  // per-strategy studies plus the aggregated gains table
  std::vector<std::pair<Strategy, MonteCarloResult>> results;
  for (const std::string& name : strategy_names) {
    TuneConfig scfg = cfg;
    scfg.strategy = strategy_from_string(name);
    const TuneConfig defaults = default_config(scfg.system, scfg.trajectory, scfg.strategy);
    if (!scfg.alpha) scfg.alpha = defaults.alpha;
    if (!scfg.beta) scfg.beta = defaults.beta;
    if (!scfg.mu) scfg.mu = defaults.mu;
    MonteCarloResult result = run_monte_carlo(scfg, n_trials);
    emit_monte_carlo(result, cfg.output_dir + "/" + name);
    std::printf("montecarlo %s: %d trials (%zu failed), final mean loss %.6g\n", name.c_str(),
                result.trials, result.failed_trials.size(),
                result.mean_loss.empty() ? 0.0 : result.mean_loss.back());
    results.emplace_back(scfg.strategy, std::move(result));
  }
  emit_gains_table(results, cfg.output_dir);
  std::printf("gains table written to %s/gains_table.csv\n", cfg.output_dir.c_str());
  return kExitOk;
}

int run_check_jacobians(const CommonArgs& args, int samples) {
  using namespace looptune;
  const TuneConfig cfg = resolve_config(args);
  JacobianReport report;
  if (cfg.system == SystemKind::dubins) {
    DubinsParams prm = cfg.dubins_params;
    prm.dt = cfg.dt;
    report = check_jacobians(make_dubins_model(prm), dubins_point_sampler(), samples, 1e-5, 1e-6,
                             cfg.seed + 1);
  } else {
    QuadParams prm = cfg.quad_params;
    prm.dt = cfg.dt;
    // fd-backed model (step 1e-6) probed at 1e-5: two-step-size consistency
    report = check_jacobians(make_quad_model(prm), quad_point_sampler(prm), samples, 1e-3, 1e-5,
                             cfg.seed + 1);
  }
  std::printf("jacobian check over %d samples (tol %.1e):\n", report.samples, report.tol);
  std::printf("  df/dx      max rel err %.3e\n", report.max_err_f_x);
  std::printf("  df/du      max rel err %.3e\n", report.max_err_f_u);
  std::printf("  dh/dx      max rel err %.3e\n", report.max_err_h_x);
  std::printf("  dh/dtheta  max rel err %.3e\n", report.max_err_h_theta);
  std::printf("  %s\n", report.passed() ? "PASS" : "FAIL");
  return report.passed() ? kExitOk : kExitError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Closed-loop controller gain auto-tuner with forward sensitivity propagation"};
  app.require_subcommand(1);

  CommonArgs tune_args, compare_args, mc_args, jac_args;
  std::vector<std::string> compare_names, mc_names;
  std::optional<int> mc_trials;
  int jac_samples = 100;

  CLI::App* tune_cmd = app.add_subcommand("tune", "run one tuning loop");
  add_common(tune_cmd, tune_args);

  CLI::App* compare_cmd = app.add_subcommand("compare", "run several strategies on one problem");
  add_common(compare_cmd, compare_args);
  compare_cmd->add_option("--strategies", compare_names, "strategies to compare")
      ->delimiter(',');

  CLI::App* mc_cmd = app.add_subcommand("montecarlo", "noisy-sensor Monte Carlo tuning");
  add_common(mc_cmd, mc_args);
  mc_cmd->add_option("--trials", mc_trials, "number of trials");
  mc_cmd->add_option("--strategies", mc_names, "run one study per strategy and emit a gains table")
      ->delimiter(',');

  CLI::App* jac_cmd = app.add_subcommand("check-jacobians", "validate model Jacobians");
  add_common(jac_cmd, jac_args);
  jac_cmd->add_option("--samples", jac_samples, "random evaluation points");

  CLI11_PARSE(app, argc, argv);

  try {
    if (tune_cmd->parsed()) return run_tune(tune_args);
    if (compare_cmd->parsed()) return run_compare(compare_args, compare_names);
    if (mc_cmd->parsed()) return run_monte_carlo_cmd(mc_args, mc_trials, mc_names);
    if (jac_cmd->parsed()) return run_check_jacobians(jac_args, jac_samples);
  } catch (const looptune::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const looptune::DivergenceError& e) {
    std::fprintf(stderr, "divergence: %s\n", e.what());
    return kExitDivergence;
  } catch (const looptune::FilterDivergenceError& e) {
    std::fprintf(stderr, "filter divergence: %s\n", e.what());
    return kExitDivergence;
  } catch (const looptune::IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return kExitIo;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitError;
  }
  return kExitError;
}
