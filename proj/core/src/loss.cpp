#include "looptune/loss.hpp"

#include <cmath>

#include "looptune/errors.hpp"

namespace looptune {

namespace {

void check_rollout(const Rollout& r, const LossConfig& cfg) {
  if (r.states.empty() || r.states.size() != r.desired.size() ||
      r.states.size() != r.controls.size() + 1) {
    throw DimensionError("rollout: need |states| = |desired| = |controls| + 1");
  }
  if (cfg.lambda < 0.0) throw DimensionError("loss: lambda must be nonnegative");
  if (cfg.tracked_indices.empty()) throw DimensionError("loss: tracked_indices empty");
  const int n = static_cast<int>(r.states.front().size());
  for (int i : cfg.tracked_indices) {
    if (i < 0 || i >= n) throw DimensionError("loss: tracked index out of range");
  }
}

double tracked_sq_error(const State& x, const State& xhat, const std::vector<int>& idx) {
  double s = 0.0;
  for (int i : idx) {
    const double e = x[i] - xhat[i];
    s += e * e;
  }
  return s;
}

}  // namespace

ParamVector project(const ParamVector& theta, const FeasibleSet& set) {
  if (theta.size() != set.lower.size()) {
    throw DimensionError("project: theta and lower bounds length mismatch");
  }
  if (set.upper && set.upper->size() != theta.size()) {
    throw DimensionError("project: theta and upper bounds length mismatch");
  }
  ParamVector out = theta.cwiseMax(set.lower);
  if (set.upper) out = out.cwiseMin(*set.upper);
  return out;
}

double tracking_sse(const Rollout& r, const LossConfig& cfg) {
  check_rollout(r, cfg);
  double value = 0.0;
  for (std::size_t k = 0; k < r.states.size(); ++k) {
    value += tracked_sq_error(r.states[k], r.desired[k], cfg.tracked_indices);
  }
  return value;
}

double loss(const Rollout& r, const LossConfig& cfg) {
  double value = tracking_sse(r, cfg);
  if (cfg.lambda != 0.0) {
    for (const Control& u : r.controls) value += cfg.lambda * u.squaredNorm();
  }
  return value;
}

double rmse(const Rollout& r, const LossConfig& cfg) {
  return std::sqrt(tracking_sse(r, cfg) / static_cast<double>(r.states.size()));
}

}  // namespace looptune
