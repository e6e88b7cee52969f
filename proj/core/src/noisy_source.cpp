#include "looptune/estimation/noisy_source.hpp"

#include "looptune/errors.hpp"

namespace looptune {

NoisyLoopSource::NoisyLoopSource(const SystemModel& model, const std::vector<Vec>& desired_points,
                                 const ParamVector& theta, const State& x0, const NoiseSpec& spec)
    : model_(&model),
      desired_(&desired_points),
      theta_(theta),
      spec_(spec),
      x0_(x0),
      rng_(spec.seed),
      ekf_(ekf_init(x0, spec, model.dt)) {}

std::optional<State> NoisyLoopSource::operator()(int k, const State& /*propagated*/) {
  if (k == 0) {
    true_states_.assign(1, x0_);
    prev_estimate_ = x0_;  // filter initialized at the known initial state
    // IMU sample at t0 drives the first strapdown interval
    const Measurement z0 = sample_measurements(x0_, Eigen::Vector3d::Zero(), spec_, rng_);
    prev_gyro_ = z0.gyro;
    last_step_ = 0;
    return x0_;
  }
  if (k != last_step_ + 1) {
    throw std::logic_error("NoisyLoopSource: steps must be visited in order");
  }
  last_step_ = k;

  // Advance the true plant with the control the rollout applied (recomputed
  // from the previous estimate, which is what the controller saw).
  const Control u = model_->h(prev_estimate_, (*desired_)[k - 1], theta_);
  const State& x_prev = true_states_.back();
  State x_true = model_->f(x_prev, u);
  if (!x_true.allFinite() || x_true.norm() > 1e9) {
    throw DivergenceError("true state diverged", k);
  }

  const Eigen::Vector3d accel =
      (x_true.segment<3>(3) - x_prev.segment<3>(3)) / model_->dt;
  const Measurement z = sample_measurements(x_true, accel, spec_, rng_);

  // the strapdown interval ending at step k integrates the body rate from its
  // start; position/yaw corrections use the step-k readings
  Measurement step_bundle = z;
  step_bundle.gyro = prev_gyro_;
  ekf_ = ekf_step(ekf_, step_bundle, model_->dt);
  ekf_.estimate.segment<3>(15) = z.gyro;  // controller sees the current rate
  prev_gyro_ = z.gyro;

  true_states_.push_back(std::move(x_true));
  prev_estimate_ = ekf_.estimate;
  return prev_estimate_;
}

}  // namespace looptune
