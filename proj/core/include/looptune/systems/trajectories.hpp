#pragma once

#include <string>
#include <vector>

#include "looptune/systems/dubins.hpp"
#include "looptune/types.hpp"

namespace looptune {

enum class TrajectoryKind {
  dubins_circle,  // planar circle for the Dubins car
  circle3d,       // p(t) = [2(1-cos t), 2 sin t, 0.1 sin t]
  figure8,        // p(t) = [sin 2t, sin 4t, sin t]
};

std::string to_string(TrajectoryKind kind);
TrajectoryKind trajectory_from_string(const std::string& name);

/// Analytic position/velocity/acceleration sampled at t_k = k dt, k = 0..N.
/// Quadrotor kinds use the 10-dim desired layout with yaw = 0; dubins_circle
/// uses the 8-dim Dubins layout with the default circle geometry.
std::vector<Vec> make_trajectory(TrajectoryKind kind, double dt, int N);

/// Constant quadrotor hover reference at `position`.
std::vector<Vec> quad_hover_trajectory(const Eigen::Vector3d& position, int N);

}  // namespace looptune
