#include <benchmark/benchmark.h>

#include "looptune/estimation/ekf.hpp"
#include "looptune/estimation/noise.hpp"
#include "looptune/sensitivity.hpp"
#include "looptune/systems/dubins.hpp"
#include "looptune/systems/quadrotor.hpp"
#include "looptune/systems/trajectories.hpp"
#include "looptune/updaters.hpp"

using namespace looptune;

namespace {

struct DubinsSetup {
  SystemModel model;
  std::vector<Vec> desired;
  State x0;
  ParamVector theta = Vec::Constant(4, 5.0);
  LossConfig cfg{0.0, {0, 1}};

  explicit DubinsSetup(int N) {
    DubinsParams prm;
    prm.dt = 0.001;
    model = make_dubins_model(prm);
    DubinsCircle circle;
    desired = dubins_circle_trajectory(circle, prm.dt, N);
    x0 = dubins_circle_initial_state(circle);
  }
};

struct QuadSetup {
  SystemModel model;
  std::vector<Vec> desired;
  State x0;
  ParamVector theta;
  LossConfig cfg{0.0, {0, 1, 2}};

  explicit QuadSetup(int N) {
    QuadParams prm;
    model = make_quad_model(prm);
    desired = make_trajectory(TrajectoryKind::circle3d, prm.dt, N);
    x0 = quad_initial_state(desired.front());
    theta = Vec(12);
    theta << 16, 16, 16, 5.6, 5.6, 5.6, 8.8, 8.8, 8.8, 2.54, 2.54, 2.54;
  }
};

}  // namespace

static void BM_DubinsRollout(benchmark::State& state) {
  const DubinsSetup s(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(rollout_closed_loop(s.model, s.theta, s.desired, s.x0));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_DubinsRollout)->Arg(1000)->Arg(10000);

static void BM_DubinsSensitivityPass(benchmark::State& state) {
  const DubinsSetup s(static_cast<int>(state.range(0)));
  const Rollout r = rollout_closed_loop(s.model, s.theta, s.desired, s.x0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(propagate_sensitivities(s.model, r, s.theta));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_DubinsSensitivityPass)->Arg(1000)->Arg(10000);

static void BM_QuadRollout(benchmark::State& state) {
  const QuadSetup s(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(rollout_closed_loop(s.model, s.theta, s.desired, s.x0));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_QuadRollout)->Arg(512)->Arg(2512);

static void BM_QuadSensitivityPass(benchmark::State& state) {
  // dominated by the finite-difference Jacobians of f and h at every step
  const QuadSetup s(static_cast<int>(state.range(0)));
  const Rollout r = rollout_closed_loop(s.model, s.theta, s.desired, s.x0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(propagate_sensitivities(s.model, r, s.theta));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_QuadSensitivityPass)->Arg(512)->Arg(2512);

static void BM_GradientAssembly(benchmark::State& state) {
  const QuadSetup s(2512);
  const Rollout r = rollout_closed_loop(s.model, s.theta, s.desired, s.x0);
  const SensitivitySet sens = propagate_sensitivities(s.model, r, s.theta);
  for (auto _ : state) {
    benchmark::DoNotOptimize(assemble_gradient(r, sens, s.cfg));
  }
}
BENCHMARK(BM_GradientAssembly);

static void BM_LineSearchStep(benchmark::State& state) {
  const QuadSetup s(2512);
  const Rollout r = rollout_closed_loop(s.model, s.theta, s.desired, s.x0);
  const SensitivitySet sens = propagate_sensitivities(s.model, r, s.theta);
  const Vec grad = assemble_gradient(r, sens, s.cfg);
  const FeasibleSet box = FeasibleSet::lower_bounded(12, 0.5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(line_search_step(s.theta, grad, r, sens, s.cfg, box));
  }
}
BENCHMARK(BM_LineSearchStep);

static void BM_GaussNewtonStep(benchmark::State& state) {
  const QuadSetup s(2512);
  const Rollout r = rollout_closed_loop(s.model, s.theta, s.desired, s.x0);
  const SensitivitySet sens = propagate_sensitivities(s.model, r, s.theta);
  const Vec grad = assemble_gradient(r, sens, s.cfg);
  const Mat H = build_curvature(sens, s.cfg);
  const FeasibleSet box = FeasibleSet::lower_bounded(12, 0.5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(gauss_newton_step(s.theta, grad, H, box));
  }
}
BENCHMARK(BM_GaussNewtonStep);

static void BM_CurvatureBuild(benchmark::State& state) {
  const QuadSetup s(2512);
  const Rollout r = rollout_closed_loop(s.model, s.theta, s.desired, s.x0);
  const SensitivitySet sens = propagate_sensitivities(s.model, r, s.theta);
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_curvature(sens, s.cfg));
  }
}
BENCHMARK(BM_CurvatureBuild);

static void BM_EkfStep(benchmark::State& state) {
  NoiseSpec spec;
  const State x0 = quad_hover_state({0, 0, 0});
  EkfState ekf = ekf_init(x0, spec, 0.0025);
  std::mt19937_64 rng(1);
  const Measurement z = sample_measurements(x0, Eigen::Vector3d::Zero(), spec, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ekf = ekf_step(ekf, z, 0.0025));
  }
}
BENCHMARK(BM_EkfStep);

BENCHMARK_MAIN();
