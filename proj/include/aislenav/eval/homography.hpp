#pragma once

#include <array>
#include <cmath>

#include <Eigen/Dense>

#include "aislenav/core.hpp"
#include "aislenav/vision/birds_eye.hpp"

namespace aislenav::eval {

class DegenerateCamera : public DegenerateGeometry {
 public:
  using DegenerateGeometry::DegenerateGeometry;
};

/// The pixel maps to a point at infinity on the ground plane.
class HorizonError : public DegenerateGeometry {
 public:
  using DegenerateGeometry::DegenerateGeometry;
};

inline void check_intrinsics(const Eigen::Matrix3d& K) {
  if (!K.allFinite()) throw DegenerateCamera("K has non-finite entries");
  if (K(1, 0) != 0.0 || K(2, 0) != 0.0 || K(2, 1) != 0.0) throw DegenerateCamera("K must be upper-triangular");
  if (!(K(0, 0) > 0.0 && K(1, 1) > 0.0 && K(2, 2) > 0.0)) throw DegenerateCamera("K must have a positive diagonal");
}

inline void check_rotation(const Eigen::Matrix3d& R) {
  if (!R.allFinite()) throw DegenerateCamera("R has non-finite entries");
  if (!((R.transpose() * R - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() <= 1e-9))
    throw DegenerateCamera("R is not orthonormal");
  if (!(std::abs(R.determinant() - 1.0) <= 1e-9)) throw DegenerateCamera("R is not a proper rotation");
}

/// Ground plane (z = 0) to image: H = K [r1 r2 t].
inline Eigen::Matrix3d homography_from_camera(const Eigen::Matrix3d& K, const Eigen::Matrix3d& R,
                                              const Eigen::Vector3d& t) {
  check_intrinsics(K);
  check_rotation(R);
  if (!t.allFinite()) throw DegenerateCamera("t has non-finite entries");
  Eigen::Matrix3d M;
  M.col(0) = R.col(0);
  M.col(1) = R.col(1);
  M.col(2) = t;
  const Eigen::Matrix3d H = K * M;
  const double scale = H.cwiseAbs().maxCoeff();
  if (!(scale > 0.0) || std::abs(H.determinant()) <= 1e-12 * scale * scale * scale)
    throw DegenerateCamera("homography is singular (camera centre on the ground plane)");
  return H;
}

struct CameraModel {
  Eigen::Matrix3d K = Eigen::Matrix3d::Identity();
  Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
  Eigen::Vector3d t{0.0, 0.0, 1.0};
  Eigen::Matrix3d H = Eigen::Matrix3d::Identity();

  static CameraModel make(const Eigen::Matrix3d& K, const Eigen::Matrix3d& R, const Eigen::Vector3d& t) {
    return {K, R, t, homography_from_camera(K, R, t)};
  }
};

inline Point2 pixel_to_ground(const Eigen::Matrix3d& H, Point2 px) {
  const Eigen::Vector3d g = H.partialPivLu().solve(Eigen::Vector3d(px.x, px.y, 1.0));
  if (!g.allFinite()) throw DegenerateCamera("pixel_to_ground: homography is singular");
  if (std::abs(g.z()) <= 1e-15 * g.head<2>().norm() || g.z() == 0.0)
    throw HorizonError("pixel_to_ground: pixel lies on the horizon");
  return {g.x() / g.z(), g.y() / g.z()};
}

inline Point2 ground_to_pixel(const Eigen::Matrix3d& H, Point2 g) {
  const Eigen::Vector3d p = H * Eigen::Vector3d(g.x, g.y, 1.0);
  if (std::abs(p.z()) <= 1e-15 * p.head<2>().norm() || p.z() == 0.0)
    throw HorizonError("ground_to_pixel: point maps to infinity");
  return {p.x() / p.z(), p.y() / p.z()};
}

/// Corner order: the first two corners are the front edge of the marker.
inline Pose2D marker_pose_from_corners(const Eigen::Matrix3d& H, const std::array<Point2, 4>& corners) {
  vision::Quad q{};
  for (std::size_t i = 0; i < 4; ++i) q[i] = pixel_to_ground(H, corners[i]);
  if (vision::has_collinear_triple(q) || !vision::is_convex(q))
    throw DegenerateGeometry("marker corners do not form a convex quadrilateral");
  const Point2 c = 0.25 * (q[0] + q[1] + q[2] + q[3]);
  const Point2 front = 0.5 * (q[0] + q[1]);
  const Point2 d = front - c;
  return Pose2D(c.x, c.y, std::atan2(d.y, d.x));
}

/// Ground corners of a square marker of side s centred on the pose, front edge first.
inline std::array<Point2, 4> marker_corners(const Pose2D& pose, double side) {
  const double h = 0.5 * side, c = std::cos(pose.theta()), s = std::sin(pose.theta());
  const Point2 local[4] = {{h, h}, {h, -h}, {-h, -h}, {-h, h}};
  std::array<Point2, 4> out;
  for (std::size_t i = 0; i < 4; ++i)
    out[i] = {pose.x + c * local[i].x - s * local[i].y, pose.y + s * local[i].x + c * local[i].y};
  return out;
}

}  // namespace aislenav::eval
