#include "looptune/systems/quadrotor.hpp"

#include <cmath>

#include "looptune/errors.hpp"

namespace looptune {

Eigen::Matrix3d hat(const Eigen::Vector3d& w) {
  Eigen::Matrix3d S;
  S << 0.0, -w.z(), w.y(),  //
      w.z(), 0.0, -w.x(),   //
      -w.y(), w.x(), 0.0;
  return S;
}

Eigen::Vector3d vee(const Eigen::Matrix3d& skew) {
  return {skew(2, 1), skew(0, 2), skew(1, 0)};
}

Eigen::Matrix3d quad_rotation(const State& x) {
  Eigen::Matrix3d R;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) R(r, c) = x[6 + 3 * r + c];
  return R;
}

void set_quad_rotation(State& x, const Eigen::Matrix3d& R) {
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) x[6 + 3 * r + c] = R(r, c);
}

double quad_yaw(const State& x) {
  const Eigen::Matrix3d R = quad_rotation(x);
  return std::atan2(R(1, 0), R(0, 0));
}

namespace {

const Eigen::Vector3d kE3(0.0, 0.0, 1.0);

State quad_step(const QuadParams& prm, const State& x, const Control& u, bool expmap) {
  const Eigen::Vector3d v = x.segment<3>(3);
  const Eigen::Vector3d Om = x.segment<3>(15);
  const Eigen::Matrix3d R = quad_rotation(x);

  State next(kQuadStateDim);
  next.segment<3>(0) = x.segment<3>(0) + prm.dt * v;
  next.segment<3>(3) = v + prm.dt * (prm.gravity * kE3 - (u[0] / prm.mass) * (R * kE3));

  Eigen::Matrix3d R_next;
  if (expmap) {
    const double angle = prm.dt * Om.norm();
    if (angle < 1e-12) {
      R_next = R;
    } else {
      R_next = R * Eigen::AngleAxisd(angle, Om.normalized()).toRotationMatrix();
    }
  } else {
    R_next = R * (Eigen::Matrix3d::Identity() + prm.dt * hat(Om));
  }
  set_quad_rotation(next, R_next);

  const Eigen::Vector3d M = u.segment<3>(1);
  next.segment<3>(15) =
      Om + prm.dt * prm.inertia.ldlt().solve(M - Om.cross(prm.inertia * Om)).eval();
  return next;
}

Control geometric_control(const QuadParams& prm, const State& x, const Vec& d,
                          const ParamVector& th) {
  const Eigen::Vector3d kp = th.segment<3>(0);
  const Eigen::Vector3d kv = th.segment<3>(3);
  const Eigen::Vector3d kR = th.segment<3>(6);
  const Eigen::Vector3d kOm = th.segment<3>(9);

  const Eigen::Vector3d e_p = x.segment<3>(0) - d.segment<3>(0);
  const Eigen::Vector3d e_v = x.segment<3>(3) - d.segment<3>(3);
  const Eigen::Vector3d a_hat = d.segment<3>(6);
  const Eigen::Vector3d Om = x.segment<3>(15);
  const Eigen::Matrix3d R = quad_rotation(x);

  // desired force along the R e3 axis; vdot = g e3 - (f/m) R e3
  const Eigen::Vector3d F_des =
      kp.cwiseProduct(e_p) + kv.cwiseProduct(e_v) + prm.mass * prm.gravity * kE3 - prm.mass * a_hat;
  const double F_norm = F_des.norm();
  if (F_norm < 1e-6) {
    throw DegenerateAttitudeError("desired acceleration cancels gravity: no thrust direction");
  }
  const double thrust = F_des.dot(R * kE3);

  const Eigen::Vector3d b3d = F_des / F_norm;
  const Eigen::Vector3d b1_ref(std::cos(d[9]), std::sin(d[9]), 0.0);
  Eigen::Vector3d b2d = b3d.cross(b1_ref);
  const double b2_norm = b2d.norm();
  if (b2_norm < 1e-9) {
    throw DegenerateAttitudeError("yaw reference parallel to the thrust axis");
  }
  b2d /= b2_norm;
  Eigen::Matrix3d Rd;
  Rd.col(0) = b2d.cross(b3d);
  Rd.col(1) = b2d;
  Rd.col(2) = b3d;

  const Eigen::Vector3d e_R = 0.5 * vee(Rd.transpose() * R - R.transpose() * Rd);
  const Eigen::Vector3d e_Om = Om;  // desired rate not supplied by the trajectory
  const Eigen::Vector3d M =
      -kR.cwiseProduct(e_R) - kOm.cwiseProduct(e_Om) + Om.cross(prm.inertia * Om);

  Control u(kQuadControlDim);
  u[0] = thrust;
  u.segment<3>(1) = M;
  return u;
}

}  // namespace

SystemModel make_quad_model(const QuadParams& params, double fd_step) {
  SystemModel mdl;
  mdl.n = kQuadStateDim;
  mdl.m = kQuadControlDim;
  mdl.p = kQuadParamDim;
  mdl.desired_dim = kQuadDesiredDim;
  mdl.dt = params.dt;

  mdl.f = [params](const State& x, const Control& u) { return quad_step(params, x, u, false); };
  mdl.h = [params](const State& x, const Vec& d, const ParamVector& th) {
    return geometric_control(params, x, d, th);
  };
  mdl.desired_state = [](const Vec& d) {
    State target = State::Zero(kQuadStateDim);
    target.segment<3>(0) = d.segment<3>(0);
    target.segment<3>(3) = d.segment<3>(3);
    target[6] = target[10] = target[14] = 1.0;  // identity attitude placeholder
    return target;
  };
  attach_fd_jacobians(mdl, fd_step);
  return mdl;
}

State quad_step_expmap(const QuadParams& params, const State& x, const Control& u) {
  return quad_step(params, x, u, true);
}

State quad_initial_state(const Vec& desired_point) {
  State x = State::Zero(kQuadStateDim);
  x.segment<3>(0) = desired_point.segment<3>(0);
  x.segment<3>(3) = desired_point.segment<3>(3);
  set_quad_rotation(x, Eigen::Matrix3d::Identity());
  return x;
}

State quad_hover_state(const Eigen::Vector3d& position) {
  State x = State::Zero(kQuadStateDim);
  x.segment<3>(0) = position;
  set_quad_rotation(x, Eigen::Matrix3d::Identity());
  return x;
}

PointSampler quad_point_sampler(const QuadParams& params) {
  return [params](std::mt19937_64& rng, State& x, Control& u, Vec& d, ParamVector& theta) {
    std::uniform_real_distribution<double> pos(-2.0, 2.0);
    std::uniform_real_distribution<double> vel(-1.5, 1.5);
    std::uniform_real_distribution<double> rate(-1.0, 1.0);
    std::uniform_real_distribution<double> tilt(0.0, 0.6);
    std::uniform_real_distribution<double> axis(-1.0, 1.0);
    std::uniform_real_distribution<double> accel(-3.0, 3.0);
    std::uniform_real_distribution<double> yaw(-0.8, 0.8);
    std::uniform_real_distribution<double> gain(0.5, 20.0);

    x = State::Zero(kQuadStateDim);
    for (int i = 0; i < 3; ++i) x[i] = pos(rng);
    for (int i = 3; i < 6; ++i) x[i] = vel(rng);
    Eigen::Vector3d ax(axis(rng), axis(rng), axis(rng));
    if (ax.norm() < 1e-6) ax = Eigen::Vector3d::UnitX();
    set_quad_rotation(x, Eigen::AngleAxisd(tilt(rng), ax.normalized()).toRotationMatrix());
    for (int i = 15; i < 18; ++i) x[i] = rate(rng);

    const double hover = params.mass * params.gravity;
    std::uniform_real_distribution<double> thrust(0.5 * hover, 1.5 * hover);
    std::uniform_real_distribution<double> moment(-0.05, 0.05);
    u.resize(kQuadControlDim);
    u << thrust(rng), moment(rng), moment(rng), moment(rng);

    d.resize(kQuadDesiredDim);
    for (int i = 0; i < 3; ++i) d[i] = pos(rng);
    for (int i = 3; i < 6; ++i) d[i] = vel(rng);
    for (int i = 6; i < 9; ++i) d[i] = accel(rng);
    d[9] = yaw(rng);

    theta.resize(kQuadParamDim);
    for (int i = 0; i < kQuadParamDim; ++i) theta[i] = gain(rng);
  };
}

}  // namespace looptune
