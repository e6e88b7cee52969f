#pragma once

#include <functional>
#include <optional>
#include <random>

#include "looptune/loss.hpp"
#include "looptune/system_model.hpp"
#include "looptune/types.hpp"

namespace looptune {

/// Optional per-step state override. When it returns a state for step k, that
/// state replaces the propagated one before the step-k control and the next
/// transition are computed — the measured/estimated-state injection path.
using StateSource = std::function<std::optional<State>(int k, const State& propagated)>;

/// Unroll the closed loop: u_k = h(x_k, d_k, theta), x_{k+1} = f(x_k, u_k).
/// desired_points has length N+1. Throws DivergenceError if a state goes
/// non-finite or its norm exceeds 1e9.
Rollout rollout_closed_loop(const SystemModel& model, const ParamVector& theta,
                            const std::vector<Vec>& desired_points, const State& x0,
                            const StateSource& state_source = {});

/// Forward recursion for dx_k/dtheta and du_k/dtheta:
///   S_{k+1} = (df/dx + df/du dh/dx) S_k + df/du dh/dtheta
///   U_k     = dh/dx S_k + dh/dtheta
/// with S_0 = 0. Jacobians are evaluated at the rollout's (x_k, u_k, d_k).
SensitivitySet propagate_sensitivities(const SystemModel& model, const Rollout& rollout,
                                       const ParamVector& theta);

/// Chain-rule gradient of the quadratic loss:
///   grad = sum_k S_k^T dL/dx_k + sum_k U_k^T dL/du_k
/// with dL/dx_k = 2(x_k - xhat_k) on tracked indices and dL/du_k = 2 lambda u_k.
Vec assemble_gradient(const Rollout& rollout, const SensitivitySet& sens, const LossConfig& cfg);

/// Loss of the first-order state/control approximations under a parameter
/// perturbation epsilon:
///   sum_k |x_k + S_k eps - xhat_k|^2 (tracked) + lambda sum_k |u_k + U_k eps|^2.
/// Equals loss(rollout, cfg) at epsilon = 0.
double predict_loss(const Rollout& rollout, const SensitivitySet& sens, const Vec& epsilon,
                    const LossConfig& cfg);

/// One full differentiation pass bundled: the rollout, its sensitivities and
/// the assembled gradient for a parameter value.
struct GradientResult {
  Vec grad;
  SensitivitySet sens;
  Rollout rollout;
};

GradientResult evaluate_gradient(const SystemModel& model, const ParamVector& theta,
                                 const std::vector<Vec>& desired_points, const State& x0,
                                 const LossConfig& cfg, const StateSource& state_source = {});

/// Central finite difference of loss(rollout(theta)) over each parameter
/// coordinate. Independent validation oracle for the propagated gradient.
Vec fd_gradient(const SystemModel& model, const ParamVector& theta,
                const std::vector<Vec>& desired_points, const State& x0, const LossConfig& cfg,
                double delta = 1e-6);

/// Draws a random evaluation point (state, control, desired vector, theta)
/// from a system-appropriate distribution.
using PointSampler =
    std::function<void(std::mt19937_64& rng, State& x, Control& u, Vec& desired, ParamVector& theta)>;

struct JacobianReport {
  double max_err_f_x = 0.0;
  double max_err_f_u = 0.0;
  double max_err_h_x = 0.0;
  double max_err_h_theta = 0.0;
  double tol = 0.0;
  int samples = 0;

  double worst() const;
  bool passed() const { return worst() <= tol; }
};

/// Compare the model's four Jacobian maps against central finite differences
/// of f and h at random points. Errors are reported per map as
/// max |J - J_fd| / max(1, |J_fd|_max); failures are report entries, not throws.
JacobianReport check_jacobians(const SystemModel& model, const PointSampler& sampler, int samples,
                               double tol, double fd_step = 1e-6, std::uint64_t seed = 20240613);

}  // namespace looptune
