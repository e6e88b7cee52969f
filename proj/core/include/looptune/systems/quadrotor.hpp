#pragma once

#include "looptune/sensitivity.hpp"
#include "looptune/system_model.hpp"

namespace looptune {

/// Rigid-body quadrotor with geometric tracking control.
///
/// Frame convention follows the dynamics vdot = g e3 - (f/m) R e3: gravity
/// points along +e3, thrust along -R e3, so R = I with f = m g is hover.
///
/// State  [p(3), v(3), R row-major (9), Omega(3)]   n = 18
/// Control [f, Mx, My, Mz]                          m = 4
/// Theta  [kp(3), kv(3), kR(3), kOmega(3)]          p = 12, per-axis gains
/// Desired [p(3), v(3), a(3), yaw]                  desired_dim = 10
struct QuadParams {
  double mass = 4.34;  // kg
  Eigen::Matrix3d inertia =
      Eigen::Vector3d(0.0820, 0.0845, 0.1377).asDiagonal();  // kg m^2
  double gravity = 9.81;  // m/s^2
  double dt = 0.0025;     // s
};

inline constexpr int kQuadStateDim = 18;
inline constexpr int kQuadControlDim = 4;
inline constexpr int kQuadParamDim = 12;
inline constexpr int kQuadDesiredDim = 10;

Eigen::Matrix3d hat(const Eigen::Vector3d& w);
Eigen::Vector3d vee(const Eigen::Matrix3d& skew);

Eigen::Matrix3d quad_rotation(const State& x);
void set_quad_rotation(State& x, const Eigen::Matrix3d& R);
double quad_yaw(const State& x);

/// Plant stepped with explicit Euler, R_{k+1} = R_k (I + dt hat(Omega)).
/// No re-orthonormalization inside the differentiated path; Jacobians come
/// from the central-finite-difference wrapper (step fd_step).
SystemModel make_quad_model(const QuadParams& params, double fd_step = 1e-6);

/// Alternate integrator using the exponential map for the attitude update.
/// Accuracy reference only; not part of the differentiated tuning loop.
State quad_step_expmap(const QuadParams& params, const State& x, const Control& u);

/// State on the desired point: p, v from desired[0], R = I, Omega = 0.
State quad_initial_state(const Vec& desired_point);

State quad_hover_state(const Eigen::Vector3d& position);

/// Random evaluation points (rotation sampled on SO(3)) for check_jacobians.
PointSampler quad_point_sampler(const QuadParams& params);

}  // namespace looptune
