#include "looptune/estimation/ekf.hpp"

#include <cmath>
#include <numbers>

#include "looptune/errors.hpp"
#include "looptune/systems/quadrotor.hpp"

namespace looptune {

namespace {

// Error state: [dp (3), dv (3), da (3)] with R_true = R_hat exp(hat(da)).

double wrap_angle(double a) {
  while (a > std::numbers::pi) a -= 2.0 * std::numbers::pi;
  while (a < -std::numbers::pi) a += 2.0 * std::numbers::pi;
  return a;
}

double yaw_of(const Eigen::Matrix3d& R) { return std::atan2(R(1, 0), R(0, 0)); }

Eigen::Matrix3d exp_so3(const Eigen::Vector3d& w) {
  const double angle = w.norm();
  if (angle < 1e-12) return Eigen::Matrix3d::Identity() + hat(w);
  return Eigen::AngleAxisd(angle, w / angle).toRotationMatrix();
}

// d yaw(R exp(hat(delta))) / d delta at delta = 0, by central differences.
Eigen::RowVector3d yaw_jacobian(const Eigen::Matrix3d& R) {
  constexpr double eps = 1e-6;
  Eigen::RowVector3d J;
  for (int i = 0; i < 3; ++i) {
    Eigen::Vector3d dp = Eigen::Vector3d::Zero();
    dp[i] = eps;
    const double plus = yaw_of(R * exp_so3(dp));
    const double minus = yaw_of(R * exp_so3(-dp));
    J[i] = wrap_angle(plus - minus) / (2.0 * eps);
  }
  return J;
}

}  // namespace

EkfState ekf_init(const State& x0, const NoiseSpec& spec, double dt) {
  EkfState e;
  e.estimate = x0;
  e.covariance = Mat::Zero(9, 9);  // exact initialization

  e.process_noise = Mat::Zero(9, 9);
  const double qv = dt * spec.sigma_acc;
  const double qa = dt * spec.sigma_gyro;
  e.process_noise.block<3, 3>(3, 3) = qv * qv * Eigen::Matrix3d::Identity();
  e.process_noise.block<3, 3>(6, 6) = qa * qa * Eigen::Matrix3d::Identity();

  e.measurement_noise = Mat::Zero(4, 4);
  // 1e-14 floor keeps the innovation covariance invertible in the zero-noise case
  e.measurement_noise.block<3, 3>(0, 0) =
      (spec.sigma_pos * spec.sigma_pos + 1e-14) * Eigen::Matrix3d::Identity();
  e.measurement_noise(3, 3) = spec.sigma_yaw * spec.sigma_yaw + 1e-14;
  return e;
}

EkfState ekf_step(const EkfState& ekf, const Measurement& z, double dt) {
  EkfState out = ekf;

  // Predict: strapdown with accel/gyro inputs, mirroring the plant's Euler step.
  Eigen::Vector3d p = out.estimate.segment<3>(0);
  Eigen::Vector3d v = out.estimate.segment<3>(3);
  Eigen::Matrix3d R = quad_rotation(out.estimate);
  p += dt * v;
  v += dt * z.accel;
  R = R * (Eigen::Matrix3d::Identity() + dt * hat(z.gyro));

  Mat F = Mat::Identity(9, 9);
  F.block<3, 3>(0, 3) = dt * Eigen::Matrix3d::Identity();
  F.block<3, 3>(6, 6) = Eigen::Matrix3d::Identity() - dt * hat(z.gyro);
  Mat P = F * out.covariance * F.transpose() + out.process_noise;

  // Correct with position and yaw.
  Mat H = Mat::Zero(4, 9);
  H.block<3, 3>(0, 0) = Eigen::Matrix3d::Identity();
  H.block<1, 3>(3, 6) = yaw_jacobian(R);

  Vec innovation(4);
  innovation.segment<3>(0) = z.position - p;
  innovation[3] = wrap_angle(z.yaw - yaw_of(R));

  const Mat S = H * P * H.transpose() + out.measurement_noise;
  Eigen::LDLT<Mat> ldlt(S);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    throw FilterDivergenceError("innovation covariance is not positive definite");
  }
  const Mat K = ldlt.solve(H * P).transpose();  // P H^T S^{-1}
  const Vec dx = K * innovation;

  p += dx.segment<3>(0);
  v += dx.segment<3>(3);
  R = R * exp_so3(dx.segment<3>(6));

  const Mat IKH = Mat::Identity(9, 9) - K * H;
  P = IKH * P * IKH.transpose() + K * out.measurement_noise * K.transpose();  // Joseph form
  out.covariance = 0.5 * (P + P.transpose());

  out.estimate.segment<3>(0) = p;
  out.estimate.segment<3>(3) = v;
  set_quad_rotation(out.estimate, R);
  out.estimate.segment<3>(15) = z.gyro;  // rate passthrough for the controller
  return out;
}

}  // namespace looptune
