#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "aislenav/core.hpp"

namespace aislenav::localization {

namespace detail {

/// 1-D squared distance transform (Felzenszwalb & Huttenlocher lower envelope).
inline void edt_1d(const std::vector<double>& f, std::vector<double>& d, std::vector<int>& v, std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  constexpr double inf = std::numeric_limits<double>::infinity();
  int k = 0;
  v[0] = 0;
  z[0] = -inf;
  z[1] = inf;
  for (int q = 1; q < n; ++q) {
    if (f[static_cast<std::size_t>(q)] == inf) continue;
    if (f[static_cast<std::size_t>(v[static_cast<std::size_t>(k)])] == inf) {
      v[static_cast<std::size_t>(k)] = q;
      continue;
    }
    double s;
    for (;;) {
      const int p = v[static_cast<std::size_t>(k)];
      s = ((f[static_cast<std::size_t>(q)] + double(q) * q) - (f[static_cast<std::size_t>(p)] + double(p) * p)) /
          (2.0 * (q - p));
      if (s <= z[static_cast<std::size_t>(k)] && k > 0) {
        --k;
        continue;
      }
      break;
    }
    ++k;
    v[static_cast<std::size_t>(k)] = q;
    z[static_cast<std::size_t>(k)] = s;
    z[static_cast<std::size_t>(k + 1)] = inf;
  }
  if (f[static_cast<std::size_t>(v[0])] == inf) {
    std::fill(d.begin(), d.end(), inf);
    return;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[static_cast<std::size_t>(k + 1)] < q) ++k;
    const int p = v[static_cast<std::size_t>(k)];
    d[static_cast<std::size_t>(q)] = double(q - p) * (q - p) + f[static_cast<std::size_t>(p)];
  }
}

}  // namespace detail

/// Distance from any point to the nearest occupied cell, precomputed on cell
/// centres and bilinearly interpolated. Straight walls are reproduced exactly.
class LikelihoodField {
 public:
  LikelihoodField() = default;
  explicit LikelihoodField(const OccupancyGrid& grid)
      : res_(grid.resolution()), origin_(grid.origin()), w_(grid.width()), h_(grid.height()) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    const std::size_t n = static_cast<std::size_t>(w_) * static_cast<std::size_t>(h_);
    std::vector<double> sq(n);
    for (int r = 0; r < h_; ++r)
      for (int c = 0; c < w_; ++c) sq[idx(c, r)] = grid.occupied(c, r) ? 0.0 : inf;

    const int m = std::max(w_, h_);
    std::vector<double> f(static_cast<std::size_t>(m)), d(static_cast<std::size_t>(m)), z(static_cast<std::size_t>(m) + 1);
    std::vector<int> v(static_cast<std::size_t>(m));
    // columns
    f.resize(static_cast<std::size_t>(h_));
    d.resize(static_cast<std::size_t>(h_));
    for (int c = 0; c < w_; ++c) {
      for (int r = 0; r < h_; ++r) f[static_cast<std::size_t>(r)] = sq[idx(c, r)];
      detail::edt_1d(f, d, v, z);
      for (int r = 0; r < h_; ++r) sq[idx(c, r)] = d[static_cast<std::size_t>(r)];
    }
    // rows
    f.resize(static_cast<std::size_t>(w_));
    d.resize(static_cast<std::size_t>(w_));
    for (int r = 0; r < h_; ++r) {
      for (int c = 0; c < w_; ++c) f[static_cast<std::size_t>(c)] = sq[idx(c, r)];
      detail::edt_1d(f, d, v, z);
      for (int c = 0; c < w_; ++c) sq[idx(c, r)] = d[static_cast<std::size_t>(c)];
    }
    dist_.resize(n);
    for (std::size_t i = 0; i < n; ++i) dist_[i] = std::sqrt(sq[i]) * res_;
  }

  /// Meters from p to the nearest occupied cell boundary; `outside` beyond the grid.
  double distance(Point2 p, double outside = 1e3) const {
    const double gx = (p.x - origin_.x) / res_ - 0.5;
    const double gy = (p.y - origin_.y) / res_ - 0.5;
    if (!(gx >= -0.5 && gy >= -0.5 && gx <= w_ - 0.5 && gy <= h_ - 0.5)) return outside;
    const double cx = std::clamp(gx, 0.0, w_ - 1.0), cy = std::clamp(gy, 0.0, h_ - 1.0);
    const int c0 = std::min(static_cast<int>(cx), w_ - 1), r0 = std::min(static_cast<int>(cy), h_ - 1);
    const int c1 = std::min(c0 + 1, w_ - 1), r1 = std::min(r0 + 1, h_ - 1);
    const double fx = cx - c0, fy = cy - r0;
    const double d = (1 - fx) * (1 - fy) * dist_[idx(c0, r0)] + fx * (1 - fy) * dist_[idx(c1, r0)] +
                     (1 - fx) * fy * dist_[idx(c0, r1)] + fx * fy * dist_[idx(c1, r1)];
    if (!std::isfinite(d)) return outside;
    return std::max(0.0, d - 0.5 * res_);
  }

 private:
  std::size_t idx(int c, int r) const { return static_cast<std::size_t>(r) * static_cast<std::size_t>(w_) + static_cast<std::size_t>(c); }

  double res_ = 1.0;
  Point2 origin_{};
  int w_ = 0, h_ = 0;
  std::vector<double> dist_;
};

}  // namespace aislenav::localization
