#pragma once

#include <optional>
#include <string>
#include <vector>

#include "looptune/estimation/noise.hpp"
#include "looptune/sensitivity.hpp"
#include "looptune/systems/dubins.hpp"
#include "looptune/systems/quadrotor.hpp"
#include "looptune/systems/trajectories.hpp"
#include "looptune/types.hpp"
#include "looptune/updaters.hpp"

namespace looptune {

enum class SystemKind { dubins, quadrotor };
enum class Strategy { gd, gdm, ls, gn, lm, bfgs };
enum class TerminationReason { rel_tol, max_iters, negative_curvature, singular_system, divergence };

std::string to_string(SystemKind k);
std::string to_string(Strategy s);
std::string to_string(TerminationReason r);
SystemKind system_from_string(const std::string& name);
Strategy strategy_from_string(const std::string& name);

struct TuneConfig {
  SystemKind system = SystemKind::dubins;
  TrajectoryKind trajectory = TrajectoryKind::dubins_circle;
  Strategy strategy = Strategy::ls;

  // required only by gd/gdm (alpha), gdm (beta) and lm (mu)
  std::optional<double> alpha;
  std::optional<double> beta;
  std::optional<double> mu;

  double lambda = 0.0;
  int max_iters = 100;
  double rel_tol = 1e-4;  // 0 disables the relative-reduction stop
  ParamVector initial_theta;
  FeasibleSet feasible_set;
  std::optional<NoiseSpec> noise;  // quadrotor only
  int trials = 100;
  std::uint64_t seed = 0;
  double dt = 0.01;
  int N = 1000;
  std::string output_dir = "out";

  DubinsParams dubins_params;
  DubinsCircle dubins_circle;
  // initial speed/rate on the circle; defaults match the reference exactly
  std::optional<double> dubins_v0;
  std::optional<double> dubins_omega0;
  QuadParams quad_params;
};

/// Protocol defaults for the given system/trajectory/strategy, including
/// the strategy hyperparameters, initial gains, bounds and termination rules.
TuneConfig default_config(SystemKind system, TrajectoryKind trajectory, Strategy strategy);

/// Throws ConfigError on missing strategy hyperparameters, dimension
/// mismatches, or incompatible system/trajectory/noise combinations.
void validate_config(const TuneConfig& config);

/// Parse a JSON config file; unspecified keys fall back to default_config of
/// the file's system/trajectory/strategy.
TuneConfig load_config(const std::string& path);

/// The assembled problem behind a config: model, reference, start, loss.
struct Instance {
  SystemModel model;
  std::vector<Vec> desired;
  State x0;
  LossConfig loss_cfg;
};
Instance build_instance(const TuneConfig& config);

struct RunArtifact {
  std::vector<TuneRecord> records;  // at most max_iters + 1
  TerminationReason termination_reason = TerminationReason::max_iters;
  ParamVector final_theta;
  double wall_time = 0.0;  // seconds
};

/// Guarded relative loss change used by the rel_tol stop:
/// |current - previous| / max(|previous|, 1e-30).
double relative_loss_change(double current, double previous);

/// One full tuning run: per iteration roll out, propagate sensitivities,
/// assemble the gradient, take one strategy step, project, record. Loss is
/// recorded as-is (decrease is not guaranteed). Noisy configs report loss and
/// RMSE on the true states while the gradient path uses the EKF estimates.
RunArtifact tune(const TuneConfig& config);

/// tune() on a caller-supplied problem; config supplies the strategy,
/// termination rules, bounds and noise.
RunArtifact tune_on(const TuneConfig& config, const Instance& instance);

/// Write run.csv, curves_norm.csv and final.json under dir (created if
/// needed). All floating-point values use 17 significant digits.
void emit_artifacts(const RunArtifact& artifact, const TuneConfig& config, const std::string& dir);

struct ComparisonRow {
  Strategy strategy = Strategy::ls;
  bool failed = false;
  std::string error;
  double final_loss = 0.0;
  double final_rmse = 0.0;
  TerminationReason termination = TerminationReason::max_iters;
  int iterations = 0;
  ParamVector final_theta;
};

struct ComparisonTable {
  std::vector<ComparisonRow> rows;
  std::vector<RunArtifact> artifacts;  // aligned with rows; empty artifact on failure
};

/// Run tune() per strategy with an identical system and seed. Per-run errors
/// become failed cells; the sweep never aborts.
ComparisonTable compare_strategies(const TuneConfig& base_config,
                                   const std::vector<Strategy>& strategies);

/// comparison.csv plus one artifact directory per strategy.
void emit_comparison(const ComparisonTable& table, const TuneConfig& base_config,
                     const std::string& dir);

}  // namespace looptune
