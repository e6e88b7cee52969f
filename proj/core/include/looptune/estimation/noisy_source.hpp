#pragma once

#include <optional>
#include <vector>

#include "looptune/estimation/ekf.hpp"
#include "looptune/estimation/noise.hpp"
#include "looptune/system_model.hpp"

namespace looptune {

/// StateSource that simulates the true plant alongside the rollout and feeds
/// back EKF estimates: the controller and the sensitivity recursion see
/// estimated states, while the true trajectory is retained for loss reporting.
class NoisyLoopSource {
 public:
  NoisyLoopSource(const SystemModel& model, const std::vector<Vec>& desired_points,
                  const ParamVector& theta, const State& x0, const NoiseSpec& spec);

  /// Called by rollout_closed_loop with increasing k. Returns the estimate.
  std::optional<State> operator()(int k, const State& propagated);

  const std::vector<State>& true_states() const { return true_states_; }

 private:
  const SystemModel* model_;
  const std::vector<Vec>* desired_;
  ParamVector theta_;
  NoiseSpec spec_;
  State x0_;
  std::mt19937_64 rng_;
  EkfState ekf_;
  State prev_estimate_;
  Eigen::Vector3d prev_gyro_ = Eigen::Vector3d::Zero();
  std::vector<State> true_states_;
  int last_step_ = -1;
};

}  // namespace looptune
