#include "looptune/updaters.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace looptune {

namespace {

constexpr double kSingularDenominator = 1e-18;
constexpr double kMaxCondition = 1e12;

// Quadratic coefficient of the predicted loss along direction d:
//   sum_k |S_k d|^2 over tracked rows + lambda sum_k |U_k d|^2.
double direction_curvature(const SensitivitySet& sens, const LossConfig& cfg, const Vec& d) {
  double denom = 0.0;
  for (const Mat& S : sens.state_sens) {
    for (int i : cfg.tracked_indices) {
      const double v = S.row(i).dot(d);
      denom += v * v;
    }
  }
  if (cfg.lambda != 0.0) {
    for (const Mat& U : sens.control_sens) denom += cfg.lambda * (U * d).squaredNorm();
  }
  return denom;
}

StepOutcome unchanged(const ParamVector& theta, StepStatus status) {
  StepOutcome out;
  out.new_theta = theta;
  out.epsilon = Vec::Zero(theta.size());
  out.status = status;
  return out;
}

}  // namespace

Mat build_curvature(const SensitivitySet& sens, const LossConfig& cfg) {
  const int p = static_cast<int>(sens.state_sens.front().cols());
  Mat H = Mat::Zero(p, p);
  for (const Mat& S : sens.state_sens) {
    for (int i : cfg.tracked_indices) {
      H.noalias() += S.row(i).transpose() * S.row(i);
    }
  }
  if (cfg.lambda != 0.0) {
    for (const Mat& U : sens.control_sens) H.noalias() += cfg.lambda * U.transpose() * U;
  }
  return H;
}

StepOutcome gd_step(const ParamVector& theta, const Vec& grad, double alpha,
                    const FeasibleSet& set) {
  if (alpha <= 0.0) throw std::invalid_argument("gd_step: alpha must be positive");
  StepOutcome out;
  out.epsilon = -alpha * grad;
  out.new_theta = project(theta + out.epsilon, set);
  return out;
}

StepOutcome gdm_step(const ParamVector& theta, const Vec& grad, double alpha, double beta,
                     UpdaterState& state, const FeasibleSet& set) {
  if (alpha <= 0.0) throw std::invalid_argument("gdm_step: alpha must be positive");
  if (beta < 0.0 || beta >= 1.0) throw std::invalid_argument("gdm_step: beta must be in [0, 1)");
  if (state.momentum.size() != theta.size()) state.momentum = Vec::Zero(theta.size());
  state.momentum = beta * state.momentum + grad;
  StepOutcome out;
  out.epsilon = -alpha * state.momentum;
  out.new_theta = project(theta + out.epsilon, set);
  return out;
}

StepOutcome line_search_step(const ParamVector& theta, const Vec& grad, const Rollout& /*rollout*/,
                             const SensitivitySet& sens, const LossConfig& cfg,
                             const FeasibleSet& set) {
  const double denom = direction_curvature(sens, cfg, grad);
  if (denom <= kSingularDenominator) {
    // gradient lies in the null space of every sensitivity; no informative step
    return unchanged(theta, StepStatus::singular_system);
  }
  const double alpha_star = 0.5 * grad.squaredNorm() / denom;
  StepOutcome out;
  out.epsilon = -alpha_star * grad;
  out.new_theta = project(theta + out.epsilon, set);
  out.diag["alpha_star"] = alpha_star;
  return out;
}

StepOutcome gauss_newton_step(const ParamVector& theta, const Vec& grad, const Mat& curvature,
                              const FeasibleSet& set) {
  Eigen::SelfAdjointEigenSolver<Mat> eig(curvature);
  if (eig.info() != Eigen::Success) return unchanged(theta, StepStatus::singular_system);

  const Vec& evals = eig.eigenvalues();
  const double emax = evals.maxCoeff();
  const double emin = evals.minCoeff();
  if (emin <= 0.0 || emax / emin > kMaxCondition) {
    StepOutcome out = unchanged(theta, StepStatus::singular_system);
    out.diag["condition"] = emin > 0.0 ? emax / emin : std::numeric_limits<double>::infinity();
    return out;
  }

  const Vec rhs = eig.eigenvectors().transpose() * (-0.5 * grad);
  StepOutcome out;
  out.epsilon = eig.eigenvectors() * rhs.cwiseQuotient(evals);
  out.new_theta = project(theta + out.epsilon, set);
  out.diag["condition"] = emax / emin;
  return out;
}

StepOutcome lm_step(const ParamVector& theta, const Vec& grad, const Mat& curvature, double mu,
                    const FeasibleSet& set) {
  if (mu <= 0.0) throw std::invalid_argument("lm_step: mu must be positive");
  Mat damped = curvature;
  damped.diagonal().array() += mu;
  StepOutcome out;
  out.epsilon = Eigen::LDLT<Mat>(damped).solve(-0.5 * grad);
  out.new_theta = project(theta + out.epsilon, set);
  out.diag["mu"] = mu;
  return out;
}

StepOutcome bfgs_step(const ParamVector& theta, const Vec& grad, const Rollout& /*rollout*/,
                      const SensitivitySet& sens, const LossConfig& cfg, UpdaterState& state,
                      const FeasibleSet& set) {
  const int p = static_cast<int>(theta.size());
  if (state.bfgs_inverse.rows() != p) state.bfgs_inverse = Mat::Identity(p, p);
  if (state.frozen) return unchanged(theta, StepStatus::terminated_negative_curvature);

  StepOutcome out;
  if (state.has_prev) {
    const Vec s = theta - state.prev_theta;  // post-projection difference
    const Vec y = grad - state.prev_grad;
    const double sy = s.dot(y);
    out.diag["s_dot_y"] = sy;
    if (sy <= 0.0) {
      state.frozen = true;  // keep B; further updates would lose positive definiteness
      out.new_theta = theta;
      out.epsilon = Vec::Zero(p);
      out.status = StepStatus::terminated_negative_curvature;
      return out;
    }
    const double rho = 1.0 / sy;
    const Mat V = Mat::Identity(p, p) - rho * s * y.transpose();
    state.bfgs_inverse = V * state.bfgs_inverse * V.transpose() + rho * s * s.transpose();
  }

  const Vec d = -(state.bfgs_inverse * grad);
  const double denom = direction_curvature(sens, cfg, d);
  if (denom <= kSingularDenominator) return unchanged(theta, StepStatus::singular_system);

  // line-search formula with the gradient replaced by the descent direction
  const double alpha_star = 0.5 * d.squaredNorm() / denom;
  out.diag["alpha_star"] = alpha_star;
  out.epsilon = alpha_star * d;
  out.new_theta = project(theta + out.epsilon, set);

  state.prev_theta = theta;
  state.prev_grad = grad;
  state.has_prev = true;
  return out;
}

}  // namespace looptune
