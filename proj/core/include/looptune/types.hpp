#pragma once

#include <Eigen/Dense>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace looptune {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Controller parameter vector theta (length p).
using ParamVector = Vec;
/// System state (length n).
using State = Vec;
/// Control action (length m).
using Control = Vec;

/// One closed-loop simulation over horizon N: states 0..N, controls 0..N-1.
/// `desired` holds state-shaped tracking targets (what the loss compares
/// against); `desired_points` holds the model-specific desired vectors that
/// also carry feedforward terms and feed the controller and its Jacobians.
struct Rollout {
  std::vector<State> states;        // N+1
  std::vector<Control> controls;    // N
  std::vector<State> desired;       // N+1
  std::vector<Vec> desired_points;  // N+1
  double dt = 0.0;

  int horizon() const { return static_cast<int>(controls.size()); }
};

/// Forward sensitivities dx_k/dtheta (n x p) and du_k/dtheta (m x p).
/// state_sens[0] is zero: the initial state does not depend on theta.
struct SensitivitySet {
  std::vector<Mat> state_sens;    // N+1
  std::vector<Mat> control_sens;  // N
};

struct LossConfig {
  double lambda = 0.0;               // control regularization weight, >= 0
  std::vector<int> tracked_indices;  // state components entering the tracking error
};

/// Box feasible set for theta; upper bounds are optional.
struct FeasibleSet {
  Vec lower;
  std::optional<Vec> upper;

  static FeasibleSet lower_bounded(const Vec& lo) { return FeasibleSet{lo, std::nullopt}; }
  static FeasibleSet lower_bounded(int p, double lo) {
    return FeasibleSet{Vec::Constant(p, lo), std::nullopt};
  }
  static FeasibleSet unbounded(int p) {
    return FeasibleSet{Vec::Constant(p, -std::numeric_limits<double>::infinity()), std::nullopt};
  }

  bool contains(const ParamVector& theta, double tol = 0.0) const {
    if (theta.size() != lower.size()) return false;
    if ((theta.array() < lower.array() - tol).any()) return false;
    if (upper && (theta.array() > upper->array() + tol).any()) return false;
    return true;
  }
};

/// Per-iteration tuning trace entry.
struct TuneRecord {
  int iteration = 0;
  double loss = 0.0;
  double rmse = 0.0;
  double grad_norm = 0.0;
  ParamVector theta;
  Vec step;  // applied epsilon (pre-projection); zero on terminal records
  std::map<std::string, double> strategy_diag;
};

}  // namespace looptune
