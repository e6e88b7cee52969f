#pragma once

#include <cstdint>
#include <random>

#include "looptune/types.hpp"

namespace looptune {

/// Zero-mean Gaussian sensor noise, per axis, independent channels.
struct NoiseSpec {
  double sigma_pos = 0.014;     // m
  double sigma_acc = 0.02;      // m/s^2
  double sigma_gyro = 1.4e-3;   // rad/s
  double sigma_yaw = 1.7e-3;    // rad
  std::uint64_t seed = 0;
};

struct Measurement {
  Eigen::Vector3d position;
  Eigen::Vector3d accel;  // world-frame acceleration of v
  Eigen::Vector3d gyro;   // body rates
  double yaw = 0.0;
};

/// truth + N(0, sigma^2) on every channel; state uses the quadrotor layout.
Measurement sample_measurements(const State& true_state, const Eigen::Vector3d& true_accel,
                                const NoiseSpec& spec, std::mt19937_64& rng);

}  // namespace looptune
