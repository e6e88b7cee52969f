#include "looptune/estimation/monte_carlo.hpp"

#include <atomic>
#include <cmath>
#include <thread>

#include "looptune/errors.hpp"

namespace looptune {

MonteCarloResult run_monte_carlo(const TuneConfig& config, int trials) {
  if (trials < 1) throw ConfigError("run_monte_carlo: trials must be >= 1");
  TuneConfig base = config;
  if (!base.noise) base.noise = NoiseSpec{};
  validate_config(base);

  struct TrialOutcome {
    bool failed = false;
    std::vector<double> losses;
    std::vector<double> rmse;
    ParamVector final_theta;
  };
  std::vector<TrialOutcome> outcomes(trials);

  std::atomic<int> next{0};
  const auto worker = [&]() {
    for (int t = next.fetch_add(1); t < trials; t = next.fetch_add(1)) {
      TuneConfig cfg = base;
      cfg.noise->seed = base.seed + static_cast<std::uint64_t>(t);  // per-trial stream
      TrialOutcome& out = outcomes[t];
      try {
        const RunArtifact art = tune(cfg);
        if (art.termination_reason == TerminationReason::divergence) {
          out.failed = true;
          continue;
        }
        out.losses.reserve(art.records.size());
        out.rmse.reserve(art.records.size());
        for (const TuneRecord& rec : art.records) {
          out.losses.push_back(rec.loss);
          out.rmse.push_back(rec.rmse);
        }
        out.final_theta = art.final_theta;
      } catch (const std::exception&) {
        out.failed = true;
      }
    }
  };

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned workers = std::min<unsigned>(hw, static_cast<unsigned>(trials));
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (std::thread& th : pool) th.join();

  // deterministic reduction in trial order
  MonteCarloResult result;
  result.trials = trials;
  std::size_t max_len = 0;
  for (int t = 0; t < trials; ++t) {
    const TrialOutcome& out = outcomes[t];
    if (out.failed) {
      result.failed_trials.push_back(t);
      result.trial_losses.emplace_back();
      result.trial_rmse.emplace_back();
      result.final_gains.emplace_back();
      continue;
    }
    result.trial_losses.push_back(out.losses);
    result.trial_rmse.push_back(out.rmse);
    result.final_gains.push_back(out.final_theta);
    max_len = std::max(max_len, out.losses.size());
  }

  result.mean_loss.resize(max_len, 0.0);
  result.std_loss.resize(max_len, 0.0);
  for (std::size_t i = 0; i < max_len; ++i) {
    double sum = 0.0;
    int count = 0;
    for (const auto& curve : result.trial_losses) {
      if (i < curve.size()) {
        sum += curve[i];
        ++count;
      }
    }
    const double mean = count > 0 ? sum / count : 0.0;
    double var = 0.0;
    for (const auto& curve : result.trial_losses) {
      if (i < curve.size()) var += (curve[i] - mean) * (curve[i] - mean);
    }
    result.mean_loss[i] = mean;
    result.std_loss[i] = count > 1 ? std::sqrt(var / (count - 1)) : 0.0;
  }
  return result;
}

}  // namespace looptune
