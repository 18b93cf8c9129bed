#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "aislenav/core.hpp"
#include "aislenav/localization/motion.hpp"

namespace aislenav::fusion {

/// Neither sensor has any confidence this tick; the controller must stop.
class NoEstimate : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline double fuse_yaw(const YawEstimate& vision, const YawEstimate& laser) {
  if (vision.source != YawSource::vision || laser.source != YawSource::laser)
    throw std::invalid_argument("fuse_yaw: expected one vision and one laser estimate");
  for (const auto* e : {&vision, &laser}) {
    if (!(e->reliability >= 0.0 && e->reliability <= 1.0))
      throw std::invalid_argument("fuse_yaw: reliability outside [0, 1]");
    if (!(std::abs(e->angle) <= kPi / 2))
      throw std::invalid_argument("fuse_yaw: yaw estimate outside [-pi/2, pi/2]");
  }
  const double rs = vision.reliability + laser.reliability;
  if (!(rs > 0.0)) throw NoEstimate("fuse_yaw: both reliabilities are zero");
  if (vision.reliability == 0.0) return normalize_angle(laser.angle);
  if (laser.reliability == 0.0) return normalize_angle(vision.angle);
  return normalize_angle((vision.angle * vision.reliability + laser.angle * laser.reliability) / rs);
}

struct GlobalPath {
  Point2 start;
  Point2 end;

  GlobalPath(Point2 s, Point2 e) : start(s), end(e) {
    if (s == e) throw DegenerateGeometry("GlobalPath: start equals end");
  }

  double length() const { return distance(start, end); }
  Point2 direction() const { return (1.0 / length()) * (end - start); }

  /// Arc length of the orthogonal projection of p, clamped to [0, length].
  double project(Point2 p) const { return std::clamp(dot(p - start, direction()), 0.0, length()); }
  Point2 at(double s) const { return start + std::clamp(s, 0.0, length()) * direction(); }
};

struct ControllerGains {
  double k_yaw = 1.5;
  double v_cruise = 0.4;
  double lookahead = 1.0;

  void validate() const {
    if (!(k_yaw > 0.0 && v_cruise > 0.0 && lookahead > 0.0))
      throw std::invalid_argument("ControllerGains: all gains must be > 0");
  }
};

inline Point2 local_target(const GlobalPath& path, const Pose2D& robot, double lookahead) {
  if (!(lookahead > 0.0)) throw std::invalid_argument("local_target: lookahead must be > 0");
  return path.at(path.project(robot.position()) + lookahead);
}

inline MotionCommand steering_command(double fused_yaw, const ControllerGains& gains, bool at_goal, double dt = 0.1) {
  if (at_goal) return {0.0, 0.0, dt};
  return {gains.v_cruise * std::max(0.0, std::cos(fused_yaw)), -gains.k_yaw * fused_yaw, dt};
}

}  // namespace aislenav::fusion
