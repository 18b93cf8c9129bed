#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>

#include "aislenav/core.hpp"

namespace aislenav::vision {

/// Forward-looking pinhole camera rigidly mounted on the robot, pitched down,
/// no roll. Ground points are in the robot frame (x forward, y left), meters.
struct PinholeCamera {
  int width = 320;
  int height = 240;
  double hfov = deg2rad(100.0);
  double mount_height = 0.8;
  double pitch = deg2rad(25.0);  // positive looks down

  void validate() const {
    if (width < 3 || height < 3) throw std::invalid_argument("camera: image must be at least 3x3");
    if (!(hfov > 0.0 && hfov < kPi)) throw std::invalid_argument("camera: hfov must be in (0, pi)");
    if (!(mount_height > 0.0)) throw std::invalid_argument("camera: mount height must be > 0");
    if (!(pitch > -kPi / 2 && pitch < kPi / 2)) throw std::invalid_argument("camera: pitch must be in (-pi/2, pi/2)");
  }

  double focal() const { return 0.5 * width / std::tan(0.5 * hfov); }
  double cu() const { return 0.5 * (width - 1); }
  double cv() const { return 0.5 * (height - 1); }

  /// Pixel of a ground point, or nullopt when it is behind the image plane.
  std::optional<Point2> project_ground(Point2 g) const {
    const double s = std::sin(pitch), c = std::cos(pitch);
    // Point relative to the optical centre, robot axes (fwd, left, up).
    const double X = g.x, Y = g.y, Z = -mount_height;
    const double depth = X * c - Z * s;
    if (depth <= 1e-9) return std::nullopt;
    const double xc = -Y;
    const double yc = -X * s - Z * c;
    const double f = focal();
    return Point2{cu() + f * xc / depth, cv() + f * yc / depth};
  }

  /// Ground point seen through pixel (u, v) (fractional pixels allowed), or
  /// nullopt at and above the horizon.
  std::optional<Point2> ground_of_pixel(double u, double v) const {
    const double s = std::sin(pitch), c = std::cos(pitch);
    const double f = focal();
    const double a = (u - cu()) / f, b = (v - cv()) / f;
    // ray = optical axis + a * right + b * down
    const double rx = c - b * s;
    const double ry = -a;
    const double rz = -s - b * c;
    if (rz >= -1e-12) return std::nullopt;
    const double t = mount_height / -rz;
    return Point2{t * rx, t * ry};
  }

  /// Row of the horizon (may lie outside the image).
  double horizon_row() const { return cv() - focal() * std::tan(pitch); }
};

/// Ground rectangle ahead of the robot that the bird's-eye view rectifies.
struct BirdsEyeWindow {
  double near = 2.0;        // m ahead
  double far = 5.0;         // m ahead
  double half_width = 2.5;  // m either side
  double resolution = 0.05; // m per output pixel

  int out_width() const { return static_cast<int>(std::lround(2.0 * half_width / resolution)) + 1; }
  int out_height() const { return static_cast<int>(std::lround((far - near) / resolution)) + 1; }

  void validate() const {
    if (!(near > 0.0) || !(far > near) || !(half_width > 0.0) || !(resolution > 0.0))
      throw std::invalid_argument("bird's-eye window: need 0 < near < far, half_width > 0, resolution > 0");
  }
};

}  // namespace aislenav::vision
