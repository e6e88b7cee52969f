#pragma once

#include "looptune/estimation/noise.hpp"
#include "looptune/types.hpp"

namespace looptune {

/// Error-state extended Kalman filter over [dp, dv, dattitude] (9 states).
/// Accelerometer and gyro drive the strapdown prediction (mirroring the
/// plant's Euler discretization); position and yaw are the measurements.
/// The angular-rate slot of the estimate carries the latest gyro sample.
struct EkfState {
  State estimate;          // 18-dim quadrotor state layout
  Mat covariance;          // 9x9, symmetric PSD
  Mat process_noise;       // 9x9 per-step
  Mat measurement_noise;   // 4x4: position (3) + yaw
};

EkfState ekf_init(const State& x0, const NoiseSpec& spec, double dt);

/// One predict + correct cycle. Throws FilterDivergenceError if the innovation
/// covariance cannot be factorized.
EkfState ekf_step(const EkfState& ekf, const Measurement& z, double dt);

}  // namespace looptune
