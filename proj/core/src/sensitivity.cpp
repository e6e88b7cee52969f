#include "looptune/sensitivity.hpp"

#include <algorithm>
#include <cmath>

#include "looptune/errors.hpp"

namespace looptune {

namespace {

constexpr double kDivergenceNorm = 1e9;

void guard_finite(const Vec& v, const char* what, int step) {
  if (!v.allFinite() || v.norm() > kDivergenceNorm) {
    throw DivergenceError(std::string(what) + " diverged", step);
  }
}

}  // namespace

Rollout rollout_closed_loop(const SystemModel& model, const ParamVector& theta,
                            const std::vector<Vec>& desired_points, const State& x0,
                            const StateSource& state_source) {
  if (desired_points.empty()) throw DimensionError("rollout: desired sequence is empty");
  if (theta.size() != model.p) throw DimensionError("rollout: theta length != p");
  if (x0.size() != model.n) throw DimensionError("rollout: x0 length != n");

  const int N = static_cast<int>(desired_points.size()) - 1;
  Rollout r;
  r.dt = model.dt;
  r.states.reserve(N + 1);
  r.controls.reserve(N);
  r.desired.reserve(N + 1);
  r.desired_points = desired_points;

  State x = x0;
  if (state_source) {
    if (auto injected = state_source(0, x)) x = *injected;
  }
  guard_finite(x, "state", 0);
  r.states.push_back(x);

  for (int k = 0; k < N; ++k) {
    Control u = model.h(r.states[k], desired_points[k], theta);
    guard_finite(u, "control", k);
    State next = model.f(r.states[k], u);
    if (state_source) {
      if (auto injected = state_source(k + 1, next)) next = *injected;
    }
    guard_finite(next, "state", k + 1);
    r.controls.push_back(std::move(u));
    r.states.push_back(std::move(next));
  }

  for (const Vec& d : desired_points) r.desired.push_back(model.desired_state(d));
  return r;
}

SensitivitySet propagate_sensitivities(const SystemModel& model, const Rollout& rollout,
                                       const ParamVector& theta) {
  const int N = rollout.horizon();
  if (static_cast<int>(rollout.desired_points.size()) != N + 1) {
    throw DimensionError("propagate: rollout carries no desired points");
  }

  SensitivitySet sens;
  sens.state_sens.reserve(N + 1);
  sens.control_sens.reserve(N);
  sens.state_sens.push_back(Mat::Zero(model.n, model.p));  // x0 is known, independent of theta

  for (int k = 0; k < N; ++k) {
    const State& x = rollout.states[k];
    const Control& u = rollout.controls[k];
    const Vec& d = rollout.desired_points[k];
    const Mat& S = sens.state_sens.back();

    const Mat h_x = model.jac_h_x(x, d, theta);
    const Mat h_theta = model.jac_h_theta(x, d, theta);
    const Mat f_x = model.jac_f_x(x, u);
    const Mat f_u = model.jac_f_u(x, u);

    Mat U = h_x * S + h_theta;
    Mat S_next = f_x * S + f_u * U;  // = (f_x + f_u h_x) S + f_u h_theta

    if (!U.allFinite() || !S_next.allFinite()) {
      throw DivergenceError("sensitivity propagation overflowed", k);
    }
    sens.control_sens.push_back(std::move(U));
    sens.state_sens.push_back(std::move(S_next));
  }
  return sens;
}

Vec assemble_gradient(const Rollout& rollout, const SensitivitySet& sens, const LossConfig& cfg) {
  if (sens.state_sens.size() != rollout.states.size() ||
      sens.control_sens.size() != rollout.controls.size()) {
    throw DimensionError("assemble_gradient: rollout/sensitivity length mismatch");
  }
  const int p = static_cast<int>(sens.state_sens.front().cols());
  Vec grad = Vec::Zero(p);
  for (std::size_t k = 0; k < rollout.states.size(); ++k) {
    const State& x = rollout.states[k];
    const State& xhat = rollout.desired[k];
    for (int i : cfg.tracked_indices) {
      grad.noalias() += 2.0 * (x[i] - xhat[i]) * sens.state_sens[k].row(i).transpose();
    }
  }
  if (cfg.lambda != 0.0) {
    for (std::size_t k = 0; k < rollout.controls.size(); ++k) {
      grad.noalias() += 2.0 * cfg.lambda * sens.control_sens[k].transpose() * rollout.controls[k];
    }
  }
  return grad;
}

double predict_loss(const Rollout& rollout, const SensitivitySet& sens, const Vec& epsilon,
                    const LossConfig& cfg) {
  if (sens.state_sens.size() != rollout.states.size()) {
    throw DimensionError("predict_loss: rollout/sensitivity length mismatch");
  }
  double value = 0.0;
  for (std::size_t k = 0; k < rollout.states.size(); ++k) {
    const State& x = rollout.states[k];
    const State& xhat = rollout.desired[k];
    const Mat& S = sens.state_sens[k];
    for (int i : cfg.tracked_indices) {
      const double e = x[i] + S.row(i).dot(epsilon) - xhat[i];
      value += e * e;
    }
  }
  if (cfg.lambda != 0.0) {
    for (std::size_t k = 0; k < rollout.controls.size(); ++k) {
      value += cfg.lambda * (rollout.controls[k] + sens.control_sens[k] * epsilon).squaredNorm();
    }
  }
  return value;
}

GradientResult evaluate_gradient(const SystemModel& model, const ParamVector& theta,
                                 const std::vector<Vec>& desired_points, const State& x0,
                                 const LossConfig& cfg, const StateSource& state_source) {
  GradientResult result;
  result.rollout = rollout_closed_loop(model, theta, desired_points, x0, state_source);
  result.sens = propagate_sensitivities(model, result.rollout, theta);
  result.grad = assemble_gradient(result.rollout, result.sens, cfg);
  return result;
}

Vec fd_gradient(const SystemModel& model, const ParamVector& theta,
                const std::vector<Vec>& desired_points, const State& x0, const LossConfig& cfg,
                double delta) {
  if (delta <= 0.0) throw std::invalid_argument("fd_gradient: delta must be positive");
  Vec grad(model.p);
  ParamVector tp = theta;
  ParamVector tm = theta;
  for (int i = 0; i < model.p; ++i) {
    tp[i] = theta[i] + delta;
    tm[i] = theta[i] - delta;
    const double lp = loss(rollout_closed_loop(model, tp, desired_points, x0), cfg);
    const double lm = loss(rollout_closed_loop(model, tm, desired_points, x0), cfg);
    grad[i] = (lp - lm) / (2.0 * delta);
    tp[i] = theta[i];
    tm[i] = theta[i];
  }
  return grad;
}

double JacobianReport::worst() const {
  return std::max({max_err_f_x, max_err_f_u, max_err_h_x, max_err_h_theta});
}

namespace {

double rel_diff(const Mat& candidate, const Mat& reference) {
  const double scale = std::max(1.0, reference.cwiseAbs().maxCoeff());
  return (candidate - reference).cwiseAbs().maxCoeff() / scale;
}

}  // namespace

JacobianReport check_jacobians(const SystemModel& model, const PointSampler& sampler, int samples,
                               double tol, double fd_step, std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("check_jacobians: samples must be >= 1");

  SystemModel fd = model;  // same f/h, finite-difference reference maps
  attach_fd_jacobians(fd, fd_step);

  JacobianReport report;
  report.tol = tol;
  report.samples = samples;

  std::mt19937_64 rng(seed);
  State x(model.n);
  Control u(model.m);
  Vec d(model.desired_dim);
  ParamVector theta(model.p);
  for (int s = 0; s < samples; ++s) {
    sampler(rng, x, u, d, theta);
    report.max_err_f_x = std::max(report.max_err_f_x, rel_diff(model.jac_f_x(x, u), fd.jac_f_x(x, u)));
    report.max_err_f_u = std::max(report.max_err_f_u, rel_diff(model.jac_f_u(x, u), fd.jac_f_u(x, u)));
    report.max_err_h_x =
        std::max(report.max_err_h_x, rel_diff(model.jac_h_x(x, d, theta), fd.jac_h_x(x, d, theta)));
    report.max_err_h_theta = std::max(
        report.max_err_h_theta, rel_diff(model.jac_h_theta(x, d, theta), fd.jac_h_theta(x, d, theta)));
  }
  return report;
}

}  // namespace looptune
