#pragma once

#include "looptune/loss.hpp"
#include "looptune/types.hpp"

namespace looptune {

enum class StepStatus {
  ok,
  terminated_negative_curvature,  // BFGS secant pair with s.y <= 0
  singular_system,                // no informative step (degenerate curvature)
};

struct StepOutcome {
  ParamVector new_theta;
  Vec epsilon;  // raw step before projection
  StepStatus status = StepStatus::ok;
  std::map<std::string, double> diag;
};

/// Per-run mutable strategy memory (momentum buffer, BFGS inverse Hessian).
/// One instance per tuning run; not shared across runs.
struct UpdaterState {
  Vec momentum;
  Mat bfgs_inverse;  // lazily initialized to identity
  Vec prev_grad;
  ParamVector prev_theta;
  bool has_prev = false;
  bool frozen = false;  // set once BFGS hits non-positive curvature
};

/// Gauss-Newton curvature H = sum_k S_k^T S_k (tracked rows) + lambda sum_k U_k^T U_k.
/// Symmetric PSD by construction.
Mat build_curvature(const SensitivitySet& sens, const LossConfig& cfg);

/// theta <- project(theta - alpha * grad).
StepOutcome gd_step(const ParamVector& theta, const Vec& grad, double alpha,
                    const FeasibleSet& set);

/// Heavy-ball momentum: v <- beta v + grad, theta <- project(theta - alpha v).
StepOutcome gdm_step(const ParamVector& theta, const Vec& grad, double alpha, double beta,
                     UpdaterState& state, const FeasibleSet& set);

/// Closed-form optimal step length along -grad for the predicted loss:
///   alpha* = (1/2 |grad|^2) / (sum_k |S_k grad|^2 (tracked) + lambda sum_k |U_k grad|^2).
/// diag carries "alpha_star". Degenerate denominator -> singular_system.
StepOutcome line_search_step(const ParamVector& theta, const Vec& grad, const Rollout& rollout,
                             const SensitivitySet& sens, const LossConfig& cfg,
                             const FeasibleSet& set);

/// Minimizer of the predicted loss over all of R^p: solve H eps = -1/2 grad.
/// H with condition estimate > 1e12 (or a failed factorization) -> singular_system.
StepOutcome gauss_newton_step(const ParamVector& theta, const Vec& grad, const Mat& curvature,
                              const FeasibleSet& set);

/// Damped variant: solve (H + mu I) eps = -1/2 grad; always solvable for mu > 0.
StepOutcome lm_step(const ParamVector& theta, const Vec& grad, const Mat& curvature, double mu,
                    const FeasibleSet& set);

/// Quasi-Newton step d = -B grad with the step length from the line-search
/// formula applied to d. B is refreshed with the standard inverse secant
/// update before stepping; if s.y <= 0 the update is frozen and the outcome is
/// terminated_negative_curvature. diag carries "alpha_star" and "s_dot_y".
StepOutcome bfgs_step(const ParamVector& theta, const Vec& grad, const Rollout& rollout,
                      const SensitivitySet& sens, const LossConfig& cfg, UpdaterState& state,
                      const FeasibleSet& set);

}  // namespace looptune
