#pragma once

#include <cmath>
#include <stdexcept>

#include "aislenav/core.hpp"

namespace aislenav {

struct MotionCommand {
  double v = 0.0;      // m/s
  double omega = 0.0;  // rad/s
  double dt = 0.1;     // s

  void validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("MotionCommand: dt must be > 0");
    if (!std::isfinite(v) || !std::isfinite(omega)) throw std::invalid_argument("MotionCommand: non-finite v/omega");
  }
};

struct MotionNoise {
  double sigma_v = 0.0;
  double sigma_omega = 0.0;
  double sigma_xy = 0.0;
  double sigma_theta = 0.0;

  void validate() const {
    if (!(sigma_v >= 0.0 && sigma_omega >= 0.0 && sigma_xy >= 0.0 && sigma_theta >= 0.0))
      throw std::invalid_argument("MotionNoise: standard deviations must be >= 0");
  }
};

/// Exact constant-velocity unicycle integration over dt.
inline Pose2D unicycle_step(const Pose2D& p, double v, double omega, double dt) {
  const double th = p.theta();
  const double dth = omega * dt;
  double dx, dy;
  if (std::abs(dth) < 1e-9) {
    // second-order expansion around omega = 0
    const double mid = th + 0.5 * dth;
    dx = v * dt * std::cos(mid);
    dy = v * dt * std::sin(mid);
  } else {
    const double r = v / omega;
    dx = r * (std::sin(th + dth) - std::sin(th));
    dy = r * (std::cos(th) - std::cos(th + dth));
  }
  return Pose2D(p.x + dx, p.y + dy, th + dth);
}

/// Noise-free truth propagation; the same integrator the particle filter uses.
inline Pose2D step_kinematics(const Pose2D& pose, const MotionCommand& cmd) {
  cmd.validate();
  return unicycle_step(pose, cmd.v, cmd.omega, cmd.dt);
}

}  // namespace aislenav
