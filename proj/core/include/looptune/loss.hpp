#pragma once

#include "looptune/types.hpp"

namespace looptune {

/// Euclidean projection onto the box: entrywise clamp into [lower, upper].
ParamVector project(const ParamVector& theta, const FeasibleSet& set);

/// Quadratic tuning objective: sum of squared tracked state errors over
/// k = 0..N plus lambda times the sum of squared controls over k = 0..N-1.
double loss(const Rollout& rollout, const LossConfig& cfg);

/// Tracking half of the loss only (no control term).
double tracking_sse(const Rollout& rollout, const LossConfig& cfg);

/// sqrt of the mean squared tracked error over the N+1 states. Reporting only;
/// shares minimizers with the tracking part of loss().
double rmse(const Rollout& rollout, const LossConfig& cfg);

}  // namespace looptune
