#include "looptune/systems/dubins.hpp"

#include <cmath>
#include <numbers>

namespace looptune {

namespace {

// state   [x, y, psi, v, omega]
// control [F, M]
// theta   [kp, kv, kpsi, komega]
// desired [x, y, psi, v, omega, ax, ay, omega_dot]

struct ControllerTerms {
  Eigen::Vector2d q;       // heading [cos psi, sin psi]
  Eigen::Vector2d q_perp;  // [-sin psi, cos psi]
  Eigen::Vector2d e_p;
  Eigen::Vector2d e_v;
  Eigen::Vector2d a_ff;
  double e_psi;
  double e_omega;
  double omega_dot_ff;
};

ControllerTerms controller_terms(const State& x, const Vec& d) {
  ControllerTerms t;
  const double psi = x[2];
  const double v = x[3];
  t.q = {std::cos(psi), std::sin(psi)};
  t.q_perp = {-t.q[1], t.q[0]};
  t.e_p = {d[0] - x[0], d[1] - x[1]};
  const Eigen::Vector2d v_hat(d[3] * std::cos(d[2]), d[3] * std::sin(d[2]));
  t.e_v = v_hat - v * t.q;
  t.a_ff = {d[5], d[6]};
  t.e_psi = d[2] - psi;
  t.e_omega = d[4] - x[4];
  t.omega_dot_ff = d[7];
  return t;
}

}  // namespace

SystemModel make_dubins_model(const DubinsParams& params) {
  SystemModel mdl;
  mdl.n = kDubinsStateDim;
  mdl.m = kDubinsControlDim;
  mdl.p = kDubinsParamDim;
  mdl.desired_dim = kDubinsDesiredDim;
  mdl.dt = params.dt;

  const double dt = params.dt;
  const double mass = params.mass;
  const double inertia = params.inertia;

  mdl.f = [dt, mass, inertia](const State& x, const Control& u) {
    const double psi = x[2];
    const double v = x[3];
    State next(kDubinsStateDim);
    next[0] = x[0] + dt * v * std::cos(psi);
    next[1] = x[1] + dt * v * std::sin(psi);
    next[2] = psi + dt * x[4];
    next[3] = v + dt * u[0] / mass;
    next[4] = x[4] + dt * u[1] / inertia;
    return next;
  };

  mdl.h = [mass, inertia](const State& x, const Vec& d, const ParamVector& th) {
    const ControllerTerms t = controller_terms(x, d);
    Control u(kDubinsControlDim);
    u[0] = mass * (th[0] * t.e_p + th[1] * t.e_v + t.a_ff).dot(t.q);
    u[1] = inertia * (th[2] * t.e_psi + th[3] * t.e_omega + t.omega_dot_ff);
    return u;
  };

  mdl.jac_f_x = [dt](const State& x, const Control&) {
    const double psi = x[2];
    const double v = x[3];
    Mat J = Mat::Identity(kDubinsStateDim, kDubinsStateDim);
    J(0, 2) = -dt * v * std::sin(psi);
    J(0, 3) = dt * std::cos(psi);
    J(1, 2) = dt * v * std::cos(psi);
    J(1, 3) = dt * std::sin(psi);
    J(2, 4) = dt;
    return J;
  };

  mdl.jac_f_u = [dt, mass, inertia](const State&, const Control&) {
    Mat J = Mat::Zero(kDubinsStateDim, kDubinsControlDim);
    J(3, 0) = dt / mass;
    J(4, 1) = dt / inertia;
    return J;
  };

  mdl.jac_h_x = [mass, inertia](const State& x, const Vec& d, const ParamVector& th) {
    const ControllerTerms t = controller_terms(x, d);
    Mat J = Mat::Zero(kDubinsControlDim, kDubinsStateDim);
    J(0, 0) = -mass * th[0] * t.q[0];
    J(0, 1) = -mass * th[0] * t.q[1];
    // the -v dq/dpsi term inside e_v is orthogonal to q, so only the q rotation survives
    J(0, 2) = mass * (th[0] * t.e_p + th[1] * t.e_v + t.a_ff).dot(t.q_perp);
    J(0, 3) = -mass * th[1];
    J(1, 2) = -inertia * th[2];
    J(1, 4) = -inertia * th[3];
    return J;
  };

  mdl.jac_h_theta = [mass, inertia](const State& x, const Vec& d, const ParamVector&) {
    const ControllerTerms t = controller_terms(x, d);
    Mat J = Mat::Zero(kDubinsControlDim, kDubinsParamDim);
    J(0, 0) = mass * t.e_p.dot(t.q);
    J(0, 1) = mass * t.e_v.dot(t.q);
    J(1, 2) = inertia * t.e_psi;
    J(1, 3) = inertia * t.e_omega;
    return J;
  };

  mdl.desired_state = [](const Vec& d) -> State { return d.head(kDubinsStateDim); };
  return mdl;
}

std::vector<Vec> dubins_circle_trajectory(const DubinsCircle& circle, double dt, int N) {
  const double omega_hat = circle.speed / circle.radius;
  std::vector<Vec> points;
  points.reserve(N + 1);
  for (int k = 0; k <= N; ++k) {
    const double phi = circle.phase + omega_hat * k * dt;
    const double psi_hat = phi + std::numbers::pi / 2.0;  // tangent heading, ccw
    Vec d(kDubinsDesiredDim);
    d[0] = circle.center_x + circle.radius * std::cos(phi);
    d[1] = circle.center_y + circle.radius * std::sin(phi);
    d[2] = psi_hat;
    d[3] = circle.speed;
    d[4] = omega_hat;
    d[5] = -circle.speed * omega_hat * std::sin(psi_hat);
    d[6] = circle.speed * omega_hat * std::cos(psi_hat);
    d[7] = 0.0;
    points.push_back(std::move(d));
  }
  return points;
}

State dubins_circle_initial_state(const DubinsCircle& circle, double v0, double omega0) {
  State x(kDubinsStateDim);
  x[0] = circle.center_x + circle.radius * std::cos(circle.phase);
  x[1] = circle.center_y + circle.radius * std::sin(circle.phase);
  x[2] = circle.phase + std::numbers::pi / 2.0;
  x[3] = v0;
  x[4] = omega0;
  return x;
}

PointSampler dubins_point_sampler() {
  return [](std::mt19937_64& rng, State& x, Control& u, Vec& d, ParamVector& theta) {
    std::uniform_real_distribution<double> pos(-5.0, 5.0);
    std::uniform_real_distribution<double> angle(-2.0, 2.0);
    std::uniform_real_distribution<double> speed(-2.0, 2.0);
    std::uniform_real_distribution<double> force(-3.0, 3.0);
    std::uniform_real_distribution<double> gain(0.5, 20.0);

    x.resize(kDubinsStateDim);
    x << pos(rng), pos(rng), angle(rng), speed(rng), speed(rng);
    u.resize(kDubinsControlDim);
    u << force(rng), force(rng);
    d.resize(kDubinsDesiredDim);
    d << pos(rng), pos(rng), angle(rng), speed(rng), speed(rng), force(rng), force(rng), force(rng);
    theta.resize(kDubinsParamDim);
    theta << gain(rng), gain(rng), gain(rng), gain(rng);
  };
}

}  // namespace looptune
