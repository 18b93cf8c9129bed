#pragma once

#include <array>
#include <cmath>
#include <optional>

#include <Eigen/Dense>

#include "aislenav/core.hpp"

namespace aislenav::vision {

using Quad = std::array<Point2, 4>;

/// True when any three of the four points are (nearly) collinear.
inline bool has_collinear_triple(const Quad& q, double tol = 1e-9) {
  for (int skip = 0; skip < 4; ++skip) {
    Point2 p[3];
    int k = 0;
    for (int i = 0; i < 4; ++i)
      if (i != skip) p[k++] = q[static_cast<std::size_t>(i)];
    const double scale = std::max({norm(p[1] - p[0]), norm(p[2] - p[0]), 1.0});
    if (std::abs(cross(p[1] - p[0], p[2] - p[0])) <= tol * scale * scale) return true;
  }
  return false;
}

inline bool is_convex(const Quad& q) {
  int sign = 0;
  for (int i = 0; i < 4; ++i) {
    const Point2 a = q[static_cast<std::size_t>(i)];
    const Point2 b = q[static_cast<std::size_t>((i + 1) % 4)];
    const Point2 c = q[static_cast<std::size_t>((i + 2) % 4)];
    const double z = cross(b - a, c - b);
    const int s = z > 0 ? 1 : (z < 0 ? -1 : 0);
    if (s == 0) return false;
    if (sign == 0) sign = s;
    if (s != sign) return false;
  }
  return true;
}

/// Projective map sending src[i] to dst[i] (h33 = 1), from the 8x8 linear system
/// of the four correspondences.
inline Eigen::Matrix3d homography_from_correspondences(const Quad& src, const Quad& dst) {
  if (has_collinear_triple(src) || has_collinear_triple(dst))
    throw DegenerateGeometry("homography: three collinear corners");
  Eigen::Matrix<double, 8, 8> A;
  Eigen::Matrix<double, 8, 1> b;
  for (int i = 0; i < 4; ++i) {
    const double x = src[static_cast<std::size_t>(i)].x, y = src[static_cast<std::size_t>(i)].y;
    const double u = dst[static_cast<std::size_t>(i)].x, v = dst[static_cast<std::size_t>(i)].y;
    A.row(2 * i) << x, y, 1, 0, 0, 0, -u * x, -u * y;
    A.row(2 * i + 1) << 0, 0, 0, x, y, 1, -v * x, -v * y;
    b(2 * i) = u;
    b(2 * i + 1) = v;
  }
  Eigen::FullPivLU<Eigen::Matrix<double, 8, 8>> lu(A);
  if (!lu.isInvertible()) throw DegenerateGeometry("homography: singular correspondence system");
  const Eigen::Matrix<double, 8, 1> h = lu.solve(b);
  Eigen::Matrix3d H;
  H << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), 1.0;
  return H;
}

inline std::optional<Point2> apply_homography(const Eigen::Matrix3d& H, Point2 p) {
  const Eigen::Vector3d q = H * Eigen::Vector3d(p.x, p.y, 1.0);
  if (std::abs(q.z()) < 1e-12) return std::nullopt;
  return Point2{q.x() / q.z(), q.y() / q.z()};
}

/// Maps an image line through H. Both sample points must be finite after mapping.
inline std::optional<LineParam> map_line(const Eigen::Matrix3d& H, const LineParam& line, Point2 a, Point2 b) {
  const Point2 d = line.direction();
  // Project the sample hints onto the line so the mapped points lie on it.
  const Point2 f = line.foot();
  const Point2 pa = f + dot(a - f, d) * d;
  const Point2 pb = f + dot(b - f, d) * d;
  const auto ma = apply_homography(H, pa);
  const auto mb = apply_homography(H, pb);
  if (!ma || !mb || distance(*ma, *mb) < 1e-9) return std::nullopt;
  return LineParam::through(*ma, *mb);
}

struct BirdsEyeView {
  GrayImage image;
  Eigen::Matrix3d src_to_out;  // source pixel -> output pixel
};

/// Rectifies `quad` (corners in order: those that land on the output's
/// top-left, top-right, bottom-right, bottom-left) onto an out_w x out_h raster.
/// Nearest-neighbour sampling; samples outside the source are 0.
inline BirdsEyeView birds_eye_transform(const GrayImage& img, const Quad& quad, int out_w, int out_h) {
  if (out_w < 2 || out_h < 2) throw std::invalid_argument("birds_eye_transform: output must be at least 2x2");
  const Quad rect{Point2{0.0, 0.0}, Point2{out_w - 1.0, 0.0}, Point2{out_w - 1.0, out_h - 1.0},
                  Point2{0.0, out_h - 1.0}};
  const Eigen::Matrix3d fwd = homography_from_correspondences(quad, rect);
  const Eigen::Matrix3d inv = fwd.inverse();
  GrayImage out(out_w, out_h, 0);
  for (int v = 0; v < out_h; ++v)
    for (int u = 0; u < out_w; ++u) {
      const Eigen::Vector3d s = inv * Eigen::Vector3d(u, v, 1.0);
      if (std::abs(s.z()) < 1e-12) continue;
      const double su = s.x() / s.z(), sv = s.y() / s.z();
      if (!std::isfinite(su) || !std::isfinite(sv)) continue;
      const long iu = std::lround(su), iv = std::lround(sv);
      if (iu < 0 || iv < 0 || iu >= img.width() || iv >= img.height()) continue;
      out.at(u, v) = img.at(static_cast<int>(iu), static_cast<int>(iv));
    }
  return {std::move(out), fwd};
}

}  // namespace aislenav::vision
