#pragma once

#include <stdexcept>
#include <string>

namespace looptune {

struct DimensionError : std::invalid_argument {
  explicit DimensionError(const std::string& what) : std::invalid_argument(what) {}
};

/// A rollout or sensitivity recursion produced a non-finite or exploding value.
struct DivergenceError : std::runtime_error {
  DivergenceError(const std::string& what, int step_index)
      : std::runtime_error(what + " at step " + std::to_string(step_index)), step(step_index) {}
  int step;
};

/// Desired acceleration leaves the controller without a usable thrust direction.
struct DegenerateAttitudeError : std::runtime_error {
  explicit DegenerateAttitudeError(const std::string& what) : std::runtime_error(what) {}
};

/// EKF innovation covariance could not be factorized.
struct FilterDivergenceError : std::runtime_error {
  explicit FilterDivergenceError(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct IoError : std::runtime_error {
  IoError(const std::string& what, const std::string& path_arg)
      : std::runtime_error(what + ": " + path_arg), path(path_arg) {}
  std::string path;
};

}  // namespace looptune
