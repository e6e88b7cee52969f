#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "looptune/errors.hpp"
#include "looptune/estimation/monte_carlo.hpp"
#include "looptune/tuner.hpp"
#include "test_fixtures.hpp"

using namespace looptune;

namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

fs::path temp_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("looptune_test_" + tag);
  fs::remove_all(dir);
  return dir;
}

TuneConfig quick_dubins(Strategy strategy, int iters = 5) {
  TuneConfig cfg = default_config(SystemKind::dubins, TrajectoryKind::dubins_circle, strategy);
  cfg.N = 800;
  cfg.max_iters = iters;
  cfg.rel_tol = 0.0;
  return cfg;
}

Instance perfect_tracking_instance() {
  // scalar fixture starting on the constant reference: loss and gradient are 0
  Instance inst;
  inst.model = looptune::testing::make_scalar_model();
  inst.desired = looptune::testing::constant_desired(1.0, 10);
  inst.x0 = looptune::testing::scalar(1.0);
  inst.loss_cfg = LossConfig{0.0, {0}};
  return inst;
}

}  // namespace

TEST_CASE("default configs carry the protocol hyperparameters") {
  const TuneConfig d_gdm =
      default_config(SystemKind::dubins, TrajectoryKind::dubins_circle, Strategy::gdm);
  CHECK(d_gdm.alpha == 2.0);
  CHECK(d_gdm.beta == 0.99);
  CHECK(d_gdm.rel_tol == 1e-4);
  CHECK(d_gdm.max_iters == 100);
  CHECK(d_gdm.initial_theta == Vec::Constant(4, 5.0));

  const TuneConfig d_lm =
      default_config(SystemKind::dubins, TrajectoryKind::dubins_circle, Strategy::lm);
  CHECK(d_lm.mu == 0.01);

  const TuneConfig q_gdm =
      default_config(SystemKind::quadrotor, TrajectoryKind::circle3d, Strategy::gdm);
  CHECK(q_gdm.alpha == 1e-3);
  CHECK(q_gdm.beta == 0.5);
  CHECK(q_gdm.rel_tol == 0.0);
  Vec expected(12);
  expected << 16, 16, 16, 5.6, 5.6, 5.6, 8.8, 8.8, 8.8, 2.54, 2.54, 2.54;
  CHECK(q_gdm.initial_theta == expected);
  CHECK(q_gdm.feasible_set.lower == Vec::Constant(12, 0.5));

  const TuneConfig q_lm =
      default_config(SystemKind::quadrotor, TrajectoryKind::circle3d, Strategy::lm);
  CHECK(q_lm.mu == 20.0);
}

TEST_CASE("config validation enforces the hyperparameter contract") {
  TuneConfig cfg = default_config(SystemKind::dubins, TrajectoryKind::dubins_circle, Strategy::gd);

  SUBCASE("gd requires alpha") {
    cfg.alpha.reset();
    CHECK_THROWS_AS(validate_config(cfg), ConfigError);
  }
  SUBCASE("gdm requires beta") {
    cfg.strategy = Strategy::gdm;
    cfg.alpha = 2.0;
    cfg.beta.reset();
    CHECK_THROWS_AS(validate_config(cfg), ConfigError);
  }
  SUBCASE("lm requires mu") {
    cfg.strategy = Strategy::lm;
    cfg.mu.reset();
    CHECK_THROWS_AS(validate_config(cfg), ConfigError);
  }
  SUBCASE("hyperparameter-free strategies validate without alpha, beta, mu") {
    for (Strategy s : {Strategy::ls, Strategy::gn, Strategy::bfgs}) {
      cfg.strategy = s;
      cfg.alpha.reset();
      cfg.beta.reset();
      cfg.mu.reset();
      CHECK_NOTHROW(validate_config(cfg));
    }
  }
  SUBCASE("mismatched trajectory") {
    cfg.trajectory = TrajectoryKind::circle3d;
    CHECK_THROWS_AS(validate_config(cfg), ConfigError);
  }
  SUBCASE("noise is rejected for the Dubins system") {
    cfg.noise = NoiseSpec{};
    CHECK_THROWS_AS(validate_config(cfg), ConfigError);
  }
  SUBCASE("theta length must match the system") {
    cfg.initial_theta = Vec::Constant(12, 5.0);
    CHECK_THROWS_AS(validate_config(cfg), ConfigError);
  }
  SUBCASE("upper bounds must exceed lower bounds") {
    cfg.feasible_set.upper = Vec::Constant(4, 0.25);
    CHECK_THROWS_AS(validate_config(cfg), ConfigError);
  }
}

TEST_CASE("a zero-gradient start terminates at iteration 1 with the rel_tol reason") {
  TuneConfig cfg = quick_dubins(Strategy::ls);
  cfg.rel_tol = 1e-4;
  cfg.initial_theta = looptune::testing::scalar(0.5);
  cfg.feasible_set = FeasibleSet::unbounded(1);
  const RunArtifact art = tune_on(cfg, perfect_tracking_instance());
  CHECK(art.termination_reason == TerminationReason::rel_tol);
  REQUIRE(art.records.size() == 2);
  CHECK(art.records.back().iteration == 1);
  CHECK(art.records[0].loss == 0.0);
  CHECK(art.records[0].grad_norm == 0.0);
}

TEST_CASE("rel_tol of zero never stops before max_iters") {
  TuneConfig cfg = quick_dubins(Strategy::ls, 3);
  cfg.initial_theta = looptune::testing::scalar(0.5);
  cfg.feasible_set = FeasibleSet::unbounded(1);
  const RunArtifact art = tune_on(cfg, perfect_tracking_instance());
  CHECK(art.termination_reason == TerminationReason::max_iters);
  CHECK(art.records.size() == 4);
}

TEST_CASE("relative_loss_change guards the zero-loss case") {
  CHECK(relative_loss_change(0.0, 0.0) == 0.0);
  CHECK(relative_loss_change(1.0, 2.0) == doctest::Approx(0.5));
  CHECK(relative_loss_change(2.0, 0.0) > 1e10);
}

TEST_CASE("tuning runs record consistent termination evidence") {
  SUBCASE("max_iters run has max_iters + 1 records") {
    TuneConfig cfg = quick_dubins(Strategy::gd, 4);
    const RunArtifact art = tune(cfg);
    CHECK(art.termination_reason == TerminationReason::max_iters);
    CHECK(static_cast<int>(art.records.size()) == cfg.max_iters + 1);
  }
  SUBCASE("rel_tol run satisfies the stopping inequality at the final step") {
    TuneConfig cfg = default_config(SystemKind::dubins, TrajectoryKind::dubins_circle, Strategy::lm);
    cfg.N = 2000;
    cfg.rel_tol = 1e-3;
    const RunArtifact art = tune(cfg);
    if (art.termination_reason == TerminationReason::rel_tol) {
      REQUIRE(art.records.size() >= 2);
      const double last = art.records[art.records.size() - 1].loss;
      const double prev = art.records[art.records.size() - 2].loss;
      CHECK(relative_loss_change(last, prev) < cfg.rel_tol);
    }
  }
}

TEST_CASE("every recorded theta is feasible") {
  TuneConfig cfg = quick_dubins(Strategy::ls, 8);
  const RunArtifact art = tune(cfg);
  for (const TuneRecord& rec : art.records) {
    CHECK(cfg.feasible_set.contains(rec.theta, 1e-12));
  }
}

TEST_CASE("loss is recorded as-is, not forced monotone") {
  // a huge fixed learning rate overshoots: the recorded loss may rise
  TuneConfig cfg = quick_dubins(Strategy::gd, 6);
  cfg.alpha = 500.0;
  const RunArtifact art = tune(cfg);
  CHECK(art.records.size() >= 2);  // ran, recorded whatever happened
}

TEST_CASE("artifact emission") {
  TuneConfig cfg = quick_dubins(Strategy::ls, 4);
  const RunArtifact art = tune(cfg);
  const fs::path dir = temp_dir("emit");
  emit_artifacts(art, cfg, dir.string());

  SUBCASE("record count matches the CSV row count") {
    std::ifstream in(dir / "run.csv");
    REQUIRE(in);
    std::string line;
    int rows = -1;  // header
    while (std::getline(in, line)) ++rows;
    CHECK(rows == static_cast<int>(art.records.size()));
  }
  SUBCASE("normalized curve starts at 1") {
    std::ifstream in(dir / "curves_norm.csv");
    REQUIRE(in);
    std::string header, first;
    std::getline(in, header);
    std::getline(in, first);
    CHECK(first == "0,1");
  }
  SUBCASE("final.json carries the termination reason and gains") {
    const std::string text = slurp(dir / "final.json");
    CHECK(text.find("termination_reason") != std::string::npos);
    CHECK(text.find("final_theta") != std::string::npos);
    CHECK(text.find(to_string(art.termination_reason)) != std::string::npos);
  }
}

TEST_CASE("rerunning an identical config yields byte-identical CSV artifacts") {
  TuneConfig cfg = quick_dubins(Strategy::gdm, 5);
  cfg.seed = 17;
  const fs::path dir_a = temp_dir("det_a");
  const fs::path dir_b = temp_dir("det_b");
  emit_artifacts(tune(cfg), cfg, dir_a.string());
  emit_artifacts(tune(cfg), cfg, dir_b.string());
  CHECK(slurp(dir_a / "run.csv") == slurp(dir_b / "run.csv"));
  CHECK(slurp(dir_a / "curves_norm.csv") == slurp(dir_b / "curves_norm.csv"));
}

TEST_CASE("noisy monte carlo artifacts are byte-identical across reruns") {
  TuneConfig cfg = default_config(SystemKind::quadrotor, TrajectoryKind::circle3d, Strategy::ls);
  cfg.N = 200;
  cfg.max_iters = 3;
  cfg.noise = NoiseSpec{};
  cfg.seed = 5;
  const fs::path dir_a = temp_dir("mc_a");
  const fs::path dir_b = temp_dir("mc_b");
  emit_monte_carlo(run_monte_carlo(cfg, 3), dir_a.string());
  emit_monte_carlo(run_monte_carlo(cfg, 3), dir_b.string());
  CHECK(slurp(dir_a / "trials.csv") == slurp(dir_b / "trials.csv"));
  CHECK(slurp(dir_a / "aggregate.csv") == slurp(dir_b / "aggregate.csv"));
}

TEST_CASE("quadrotor GD with the protocol rate runs 100 iterations, early loss decreasing") {
  const TuneConfig cfg =
      default_config(SystemKind::quadrotor, TrajectoryKind::circle3d, Strategy::gd);
  const RunArtifact art = tune(cfg);
  CHECK(art.termination_reason == TerminationReason::max_iters);
  REQUIRE(art.records.size() == 101);
  for (int i = 0; i < 10; ++i) {
    CHECK(art.records[i + 1].loss < art.records[i].loss);
  }
}

TEST_CASE("gains table aggregates per-strategy trial means and stds") {
  TuneConfig cfg = default_config(SystemKind::quadrotor, TrajectoryKind::circle3d, Strategy::ls);
  cfg.N = 200;
  cfg.max_iters = 2;
  cfg.noise = NoiseSpec{};
  std::vector<std::pair<Strategy, MonteCarloResult>> results;
  results.emplace_back(Strategy::ls, run_monte_carlo(cfg, 3));
  cfg.strategy = Strategy::gd;
  cfg.alpha = 1e-3;
  results.emplace_back(Strategy::gd, run_monte_carlo(cfg, 3));

  const fs::path dir = temp_dir("gains");
  emit_gains_table(results, dir.string());
  std::ifstream in(dir / "gains_table.csv");
  REQUIRE(in);
  std::string header;
  std::getline(in, header);
  CHECK(header == "parameter,ls_mean,ls_std,gd_mean,gd_std");
  int rows = 0;
  std::string line;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 12);  // one row per tuned gain
}

TEST_CASE("a single-strategy comparison degenerates to one tune call") {
  TuneConfig cfg = quick_dubins(Strategy::ls, 4);
  const ComparisonTable table = compare_strategies(cfg, {Strategy::ls});
  REQUIRE(table.rows.size() == 1);
  CHECK_FALSE(table.rows[0].failed);
  const RunArtifact direct = tune(cfg);
  CHECK(table.rows[0].final_loss == direct.records.back().loss);
  CHECK(table.rows[0].final_rmse == direct.records.back().rmse);
}

TEST_CASE("comparison sweeps record failures without aborting") {
  TuneConfig cfg = quick_dubins(Strategy::gd, 3);
  cfg.alpha = -1.0;  // invalid for gd; ls ignores it
  const ComparisonTable table = compare_strategies(cfg, {Strategy::gd, Strategy::ls});
  REQUIRE(table.rows.size() == 2);
  CHECK(table.rows[0].failed);
  CHECK_FALSE(table.rows[0].error.empty());
  CHECK_FALSE(table.rows[1].failed);

  const fs::path dir = temp_dir("cmp");
  emit_comparison(table, cfg, dir.string());
  const std::string csv = slurp(dir / "comparison.csv");
  CHECK(csv.find("gd,failed") != std::string::npos);
  CHECK(csv.find("ls,ok") != std::string::npos);
  CHECK(fs::exists(dir / "ls" / "run.csv"));
}

TEST_CASE("empty strategy list is rejected") {
  CHECK_THROWS_AS(compare_strategies(quick_dubins(Strategy::ls), {}), ConfigError);
}

TEST_CASE("config files round-trip through the loader") {
  const fs::path dir = temp_dir("cfg");
  fs::create_directories(dir);
  const fs::path path = dir / "config.json";
  {
    std::ofstream out(path);
    out << R"({
      "system": "quadrotor",
      "trajectory": "figure8",
      "strategy": "gdm",
      "alpha": 0.002,
      "beta": 0.4,
      "lambda": 0.0,
      "max_iters": 17,
      "N": 300,
      "seed": 12,
      "initial_theta": [16,16,16,5.6,5.6,5.6,8.8,8.8,8.8,2.54,2.54,2.54],
      "feasible_set": {"lower_bounds": [0.5,0.5,0.5,0.5,0.5,0.5,0.5,0.5,0.5,0.5,0.5,0.5]},
      "noise": {"sigma_pos": 0.02, "seed": 3},
      "output_dir": "somewhere"
    })";
  }
  const TuneConfig cfg = load_config(path.string());
  CHECK(cfg.system == SystemKind::quadrotor);
  CHECK(cfg.trajectory == TrajectoryKind::figure8);
  CHECK(cfg.strategy == Strategy::gdm);
  CHECK(cfg.alpha == 0.002);
  CHECK(cfg.beta == 0.4);
  CHECK(cfg.max_iters == 17);
  CHECK(cfg.N == 300);
  CHECK(cfg.seed == 12);
  REQUIRE(cfg.noise.has_value());
  CHECK(cfg.noise->sigma_pos == 0.02);
  CHECK(cfg.noise->sigma_acc == 0.02);  // unspecified keys keep their defaults
  CHECK(cfg.output_dir == "somewhere");
  CHECK_NOTHROW(validate_config(cfg));
}

TEST_CASE("config loader rejects bad input") {
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), IoError);
  const fs::path dir = temp_dir("badcfg");
  fs::create_directories(dir);
  const fs::path path = dir / "bad.json";
  {
    std::ofstream out(path);
    out << "{ not json";
  }
  CHECK_THROWS_AS(load_config(path.string()), ConfigError);
  {
    std::ofstream out(path);
    out << R"({"system": "hovercraft"})";
  }
  CHECK_THROWS_AS(load_config(path.string()), ConfigError);
}

TEST_CASE("string conversions cover every enumerator") {
  for (const auto s : {Strategy::gd, Strategy::gdm, Strategy::ls, Strategy::gn, Strategy::lm,
                       Strategy::bfgs}) {
    CHECK(strategy_from_string(to_string(s)) == s);
  }
  for (const auto k : {SystemKind::dubins, SystemKind::quadrotor}) {
    CHECK(system_from_string(to_string(k)) == k);
  }
  for (const auto t :
       {TrajectoryKind::dubins_circle, TrajectoryKind::circle3d, TrajectoryKind::figure8}) {
    CHECK(trajectory_from_string(to_string(t)) == t);
  }
  CHECK(to_string(TerminationReason::negative_curvature) == "negative_curvature");
}
