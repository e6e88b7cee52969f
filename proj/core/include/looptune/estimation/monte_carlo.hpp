#pragma once

#include <string>
#include <vector>

#include "looptune/tuner.hpp"

namespace looptune {

struct MonteCarloResult {
  int trials = 0;
  std::vector<std::vector<double>> trial_losses;  // per trial, per iteration
  std::vector<std::vector<double>> trial_rmse;
  std::vector<double> mean_loss;  // per iteration, over completed trials
  std::vector<double> std_loss;
  std::vector<ParamVector> final_gains;  // empty vector for failed trials
  std::vector<int> failed_trials;        // indices, reported not aggregated
};

/// Run the full tuning loop per trial with independent noise streams (trial i
/// is seeded with config.seed + i). Trials execute in parallel; aggregation is
/// a deterministic reduction ordered by trial index.
MonteCarloResult run_monte_carlo(const TuneConfig& config, int trials);

/// trials.csv (trial, iteration, loss, rmse) and aggregate.csv
/// (iteration, mean, std), 17 significant digits.
void emit_monte_carlo(const MonteCarloResult& result, const std::string& dir);

/// gains_table.csv: one row per tuned parameter, a mean and std column per
/// strategy, aggregated over each strategy's completed trials.
void emit_gains_table(const std::vector<std::pair<Strategy, MonteCarloResult>>& results,
                      const std::string& dir);

}  // namespace looptune
