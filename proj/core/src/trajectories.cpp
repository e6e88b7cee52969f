#include "looptune/systems/trajectories.hpp"

#include <cmath>

#include "looptune/errors.hpp"
#include "looptune/systems/quadrotor.hpp"

namespace looptune {

std::string to_string(TrajectoryKind kind) {
  switch (kind) {
    case TrajectoryKind::dubins_circle: return "dubins_circle";
    case TrajectoryKind::circle3d: return "circle3d";
    case TrajectoryKind::figure8: return "figure8";
  }
  return "unknown";
}

TrajectoryKind trajectory_from_string(const std::string& name) {
  if (name == "dubins_circle") return TrajectoryKind::dubins_circle;
  if (name == "circle3d") return TrajectoryKind::circle3d;
  if (name == "figure8") return TrajectoryKind::figure8;
  throw ConfigError("unknown trajectory: " + name);
}

namespace {

Vec quad_point(const Eigen::Vector3d& p, const Eigen::Vector3d& v, const Eigen::Vector3d& a) {
  Vec d(kQuadDesiredDim);
  d.segment<3>(0) = p;
  d.segment<3>(3) = v;
  d.segment<3>(6) = a;
  d[9] = 0.0;
  return d;
}

std::vector<Vec> circle3d(double dt, int N) {
  std::vector<Vec> pts;
  pts.reserve(N + 1);
  for (int k = 0; k <= N; ++k) {
    const double t = k * dt;
    pts.push_back(quad_point({2.0 * (1.0 - std::cos(t)), 2.0 * std::sin(t), 0.1 * std::sin(t)},
                             {2.0 * std::sin(t), 2.0 * std::cos(t), 0.1 * std::cos(t)},
                             {2.0 * std::cos(t), -2.0 * std::sin(t), -0.1 * std::sin(t)}));
  }
  return pts;
}

std::vector<Vec> figure8(double dt, int N) {
  std::vector<Vec> pts;
  pts.reserve(N + 1);
  for (int k = 0; k <= N; ++k) {
    const double t = k * dt;
    pts.push_back(quad_point(
        {std::sin(2.0 * t), std::sin(4.0 * t), std::sin(t)},
        {2.0 * std::cos(2.0 * t), 4.0 * std::cos(4.0 * t), std::cos(t)},
        {-4.0 * std::sin(2.0 * t), -16.0 * std::sin(4.0 * t), -std::sin(t)}));
  }
  return pts;
}

}  // namespace

std::vector<Vec> make_trajectory(TrajectoryKind kind, double dt, int N) {
  if (dt <= 0.0 || N < 1) throw ConfigError("make_trajectory: need dt > 0 and N >= 1");
  switch (kind) {
    case TrajectoryKind::dubins_circle: return dubins_circle_trajectory(DubinsCircle{}, dt, N);
    case TrajectoryKind::circle3d: return circle3d(dt, N);
    case TrajectoryKind::figure8: return figure8(dt, N);
  }
  throw ConfigError("make_trajectory: unknown kind");
}

std::vector<Vec> quad_hover_trajectory(const Eigen::Vector3d& position, int N) {
  std::vector<Vec> pts(N + 1,
                       quad_point(position, Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero()));
  return pts;
}

}  // namespace looptune
