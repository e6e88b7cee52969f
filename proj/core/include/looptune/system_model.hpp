#pragma once

#include <functional>

#include "looptune/types.hpp"

namespace looptune {

/// A discrete closed-loop problem: plant f, feedback controller h, and the
/// four partial-derivative maps consumed by the sensitivity recursion.
///
/// f and h must be deterministic and pure. Desired vectors use a
/// model-specific layout (length desired_dim) that carries feedforward terms;
/// desired_state() maps one to the state-shaped tracking target used by the
/// loss.
struct SystemModel {
  int n = 0;            // state dimension
  int m = 0;            // control dimension
  int p = 0;            // parameter dimension
  int desired_dim = 0;  // desired-vector dimension
  double dt = 0.0;      // step length baked into f, seconds

  std::function<State(const State&, const Control&)> f;
  std::function<Control(const State&, const Vec&, const ParamVector&)> h;

  std::function<Mat(const State&, const Control&)> jac_f_x;                      // n x n
  std::function<Mat(const State&, const Control&)> jac_f_u;                      // n x m
  std::function<Mat(const State&, const Vec&, const ParamVector&)> jac_h_x;      // m x n
  std::function<Mat(const State&, const Vec&, const ParamVector&)> jac_h_theta;  // m x p

  std::function<State(const Vec&)> desired_state;
};

/// Replace the model's four Jacobian maps with central finite differences of
/// f and h, for models that only supply the maps themselves.
void attach_fd_jacobians(SystemModel& model, double step = 1e-6);

}  // namespace looptune
