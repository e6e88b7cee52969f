#include "looptune/estimation/noise.hpp"

#include "looptune/systems/quadrotor.hpp"

namespace looptune {

Measurement sample_measurements(const State& true_state, const Eigen::Vector3d& true_accel,
                                const NoiseSpec& spec, std::mt19937_64& rng) {
  std::normal_distribution<double> unit(0.0, 1.0);
  const auto noise3 = [&](double sigma) {
    return Eigen::Vector3d(sigma * unit(rng), sigma * unit(rng), sigma * unit(rng));
  };

  Measurement z;
  z.position = true_state.segment<3>(0) + noise3(spec.sigma_pos);
  z.accel = true_accel + noise3(spec.sigma_acc);
  z.gyro = true_state.segment<3>(15) + noise3(spec.sigma_gyro);
  z.yaw = quad_yaw(true_state) + spec.sigma_yaw * unit(rng);
  return z;
}

}  // namespace looptune
