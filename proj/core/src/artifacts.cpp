#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "looptune/errors.hpp"
#include "looptune/estimation/monte_carlo.hpp"
#include "looptune/tuner.hpp"

namespace looptune {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string fp(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing", path.string());
  return out;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory", dir.string());
}

// alpha* (ls/bfgs) or mu (lm); zero when the strategy has no scalar knob
double alpha_or_mu(const TuneRecord& rec) {
  if (auto it = rec.strategy_diag.find("alpha_star"); it != rec.strategy_diag.end())
    return it->second;
  if (auto it = rec.strategy_diag.find("mu"); it != rec.strategy_diag.end()) return it->second;
  return 0.0;
}

}  // namespace

void emit_artifacts(const RunArtifact& artifact, const TuneConfig& config,
                    const std::string& dir) {
  ensure_dir(dir);
  const int p = static_cast<int>(artifact.final_theta.size());

  {
    auto out = open_out(fs::path(dir) / "run.csv");
    out << "iteration,loss,rmse,grad_norm,alpha_or_mu";
    for (int i = 0; i < p; ++i) out << ",theta" << i;
    out << "\n";
    for (const TuneRecord& rec : artifact.records) {
      out << rec.iteration << "," << fp(rec.loss) << "," << fp(rec.rmse) << ","
          << fp(rec.grad_norm) << "," << fp(alpha_or_mu(rec));
      for (int i = 0; i < p; ++i) out << "," << fp(rec.theta[i]);
      out << "\n";
    }
  }

  {
    // loss normalized by the iteration-0 value, as plotted in loss-curve figures
    auto out = open_out(fs::path(dir) / "curves_norm.csv");
    out << "iteration,loss_norm\n";
    const double base = artifact.records.empty() ? 1.0 : artifact.records.front().loss;
    const double denom = base != 0.0 ? base : 1.0;
    for (const TuneRecord& rec : artifact.records) {
      out << rec.iteration << "," << fp(rec.loss / denom) << "\n";
    }
  }

  {
    json j;
    j["strategy"] = to_string(config.strategy);
    j["system"] = to_string(config.system);
    j["trajectory"] = to_string(config.trajectory);
    j["termination_reason"] = to_string(artifact.termination_reason);
    j["iterations"] = artifact.records.empty() ? 0 : artifact.records.back().iteration;
    j["wall_time"] = artifact.wall_time;
    j["final_theta"] = std::vector<double>(artifact.final_theta.begin(), artifact.final_theta.end());
    if (!artifact.records.empty()) {
      j["final_loss"] = artifact.records.back().loss;
      j["final_rmse"] = artifact.records.back().rmse;
    }
    auto out = open_out(fs::path(dir) / "final.json");
    out << j.dump(2) << "\n";
  }
}

void emit_comparison(const ComparisonTable& table, const TuneConfig& base_config,
                     const std::string& dir) {
  ensure_dir(dir);
  auto out = open_out(fs::path(dir) / "comparison.csv");
  out << "strategy,status,final_loss,final_rmse,termination,iterations";
  const int p = static_cast<int>(base_config.initial_theta.size());
  for (int i = 0; i < p; ++i) out << ",theta" << i;
  out << "\n";
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const ComparisonRow& row = table.rows[r];
    if (row.failed) {
      out << to_string(row.strategy) << ",failed,,,,";
      for (int i = 0; i < p; ++i) out << ",";
      out << "\n";
      continue;
    }
    out << to_string(row.strategy) << ",ok," << fp(row.final_loss) << "," << fp(row.final_rmse)
        << "," << to_string(row.termination) << "," << row.iterations;
    for (int i = 0; i < p; ++i) out << "," << fp(row.final_theta[i]);
    out << "\n";
    emit_artifacts(table.artifacts[r], base_config,
                   (fs::path(dir) / to_string(row.strategy)).string());
  }
}

void emit_monte_carlo(const MonteCarloResult& result, const std::string& dir) {
  ensure_dir(dir);
  {
    auto out = open_out(fs::path(dir) / "trials.csv");
    out << "trial,iteration,loss,rmse\n";
    for (std::size_t t = 0; t < result.trial_losses.size(); ++t) {
      for (std::size_t i = 0; i < result.trial_losses[t].size(); ++i) {
        out << t << "," << i << "," << fp(result.trial_losses[t][i]) << ","
            << fp(result.trial_rmse[t][i]) << "\n";
      }
    }
  }
  {
    auto out = open_out(fs::path(dir) / "aggregate.csv");
    out << "iteration,mean,std\n";
    for (std::size_t i = 0; i < result.mean_loss.size(); ++i) {
      out << i << "," << fp(result.mean_loss[i]) << "," << fp(result.std_loss[i]) << "\n";
    }
  }
}

void emit_gains_table(const std::vector<std::pair<Strategy, MonteCarloResult>>& results,
                      const std::string& dir) {
  ensure_dir(dir);
  int p = 0;
  for (const auto& [strategy, mc] : results) {
    for (const ParamVector& gains : mc.final_gains) {
      p = std::max(p, static_cast<int>(gains.size()));
    }
  }

  auto out = open_out(fs::path(dir) / "gains_table.csv");
  out << "parameter";
  for (const auto& [strategy, mc] : results) {
    out << "," << to_string(strategy) << "_mean," << to_string(strategy) << "_std";
  }
  out << "\n";
  for (int i = 0; i < p; ++i) {
    out << "theta" << i;
    for (const auto& [strategy, mc] : results) {
      double sum = 0.0;
      int count = 0;
      for (const ParamVector& gains : mc.final_gains) {
        if (gains.size() > i) {
          sum += gains[i];
          ++count;
        }
      }
      const double mean = count > 0 ? sum / count : 0.0;
      double var = 0.0;
      for (const ParamVector& gains : mc.final_gains) {
        if (gains.size() > i) var += (gains[i] - mean) * (gains[i] - mean);
      }
      const double std_dev = count > 1 ? std::sqrt(var / (count - 1)) : 0.0;
      out << "," << fp(mean) << "," << fp(std_dev);
    }
    out << "\n";
  }
}

namespace {

NoiseSpec noise_from_json(const json& j) {
  NoiseSpec spec;
  if (j.contains("sigma_pos")) spec.sigma_pos = j["sigma_pos"].get<double>();
  if (j.contains("sigma_acc")) spec.sigma_acc = j["sigma_acc"].get<double>();
  if (j.contains("sigma_gyro")) spec.sigma_gyro = j["sigma_gyro"].get<double>();
  if (j.contains("sigma_yaw")) spec.sigma_yaw = j["sigma_yaw"].get<double>();
  if (j.contains("seed")) spec.seed = j["seed"].get<std::uint64_t>();
  if (spec.sigma_pos < 0 || spec.sigma_acc < 0 || spec.sigma_gyro < 0 || spec.sigma_yaw < 0) {
    throw ConfigError("noise sigmas must be nonnegative");
  }
  return spec;
}

Vec vec_from_json(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Vec>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace

TuneConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config", path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }

  try {
    const SystemKind system = system_from_string(j.value("system", "dubins"));
    const std::string default_traj =
        system == SystemKind::dubins ? "dubins_circle" : "circle3d";
    const TrajectoryKind trajectory = trajectory_from_string(j.value("trajectory", default_traj));
    const Strategy strategy = strategy_from_string(j.value("strategy", "ls"));

    TuneConfig cfg = default_config(system, trajectory, strategy);
    if (j.contains("alpha")) cfg.alpha = j["alpha"].get<double>();
    if (j.contains("beta")) cfg.beta = j["beta"].get<double>();
    if (j.contains("mu")) cfg.mu = j["mu"].get<double>();
    if (j.contains("lambda")) cfg.lambda = j["lambda"].get<double>();
    if (j.contains("max_iters")) cfg.max_iters = j["max_iters"].get<int>();
    if (j.contains("rel_tol")) cfg.rel_tol = j["rel_tol"].get<double>();
    if (j.contains("initial_theta")) cfg.initial_theta = vec_from_json(j["initial_theta"]);
    if (j.contains("feasible_set")) {
      const json& f = j["feasible_set"];
      if (f.contains("lower_bounds")) cfg.feasible_set.lower = vec_from_json(f["lower_bounds"]);
      if (f.contains("upper_bounds")) cfg.feasible_set.upper = vec_from_json(f["upper_bounds"]);
    }
    if (j.contains("noise") && !j["noise"].is_null()) cfg.noise = noise_from_json(j["noise"]);
    if (j.contains("trials")) cfg.trials = j["trials"].get<int>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("dt")) cfg.dt = j["dt"].get<double>();
    if (j.contains("N")) cfg.N = j["N"].get<int>();
    if (j.contains("output_dir")) cfg.output_dir = j["output_dir"].get<std::string>();

    if (j.contains("dubins_circle")) {
      const json& c = j["dubins_circle"];
      if (c.contains("radius")) cfg.dubins_circle.radius = c["radius"].get<double>();
      if (c.contains("speed")) cfg.dubins_circle.speed = c["speed"].get<double>();
      if (c.contains("center_x")) cfg.dubins_circle.center_x = c["center_x"].get<double>();
      if (c.contains("center_y")) cfg.dubins_circle.center_y = c["center_y"].get<double>();
      if (c.contains("phase")) cfg.dubins_circle.phase = c["phase"].get<double>();
    }
    if (j.contains("dubins_params")) {
      const json& d = j["dubins_params"];
      if (d.contains("mass")) cfg.dubins_params.mass = d["mass"].get<double>();
      if (d.contains("inertia")) cfg.dubins_params.inertia = d["inertia"].get<double>();
    }
    if (j.contains("dubins_v0")) cfg.dubins_v0 = j["dubins_v0"].get<double>();
    if (j.contains("dubins_omega0")) cfg.dubins_omega0 = j["dubins_omega0"].get<double>();
    if (j.contains("quad_params")) {
      const json& q = j["quad_params"];
      if (q.contains("mass")) cfg.quad_params.mass = q["mass"].get<double>();
      if (q.contains("gravity")) cfg.quad_params.gravity = q["gravity"].get<double>();
      if (q.contains("inertia_diag")) {
        const Vec diag = vec_from_json(q["inertia_diag"]);
        if (diag.size() != 3) throw ConfigError("inertia_diag must have 3 entries");
        cfg.quad_params.inertia = Eigen::Vector3d(diag).asDiagonal();
      }
    }
    return cfg;
  } catch (const json::exception& e) {
    throw ConfigError("config error in " + path + ": " + e.what());
  }
}

}  // namespace looptune
