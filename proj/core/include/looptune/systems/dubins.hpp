#pragma once

#include "looptune/sensitivity.hpp"
#include "looptune/system_model.hpp"

namespace looptune {

/// Planar car with forward force and steering moment.
/// State  [x, y, psi, v, omega]   (m, m, rad, m/s, rad/s) — psi kept unwrapped.
/// Control [F, M]                 (N, N·m)
/// Theta  [kp, kv, kpsi, komega]  (p = 4)
/// Desired [x, y, psi, v, omega, ax, ay, omega_dot]  (target state + feedforward)
struct DubinsParams {
  double mass = 1.0;     // kg
  double inertia = 1.0;  // kg m^2
  double dt = 0.01;      // s
};

inline constexpr int kDubinsStateDim = 5;
inline constexpr int kDubinsControlDim = 2;
inline constexpr int kDubinsParamDim = 4;
inline constexpr int kDubinsDesiredDim = 8;

/// Explicit-Euler plant with the PD tracking controller and analytic Jacobians.
SystemModel make_dubins_model(const DubinsParams& params);

/// Constant-speed circular reference.
struct DubinsCircle {
  double radius = 3.0;  // m
  double speed = 1.0;   // m/s
  double center_x = 0.0;
  double center_y = 0.0;
  double phase = 0.0;  // rad, position angle at t = 0
};

/// Sampled desired sequence (length N+1) with consistent feedforward.
std::vector<Vec> dubins_circle_trajectory(const DubinsCircle& circle, double dt, int N);

/// On-circle start with matched heading; speed and rate default to rest.
State dubins_circle_initial_state(const DubinsCircle& circle, double v0 = 0.0, double omega0 = 0.0);

/// Random evaluation points for check_jacobians.
PointSampler dubins_point_sampler();

}  // namespace looptune
