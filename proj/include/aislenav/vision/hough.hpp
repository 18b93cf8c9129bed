#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "aislenav/core.hpp"

namespace aislenav::vision {

struct HoughParams {
  double rho_resolution = 1.0;            // pixels per bin
  double theta_resolution = kPi / 180.0;  // radians per bin
  int accumulator_threshold = 30;         // votes
  int suppression_radius = 2;             // bins, in both rho and theta

  void validate() const {
    if (!(rho_resolution > 0.0) || !(theta_resolution > 0.0) || accumulator_threshold <= 0)
      throw std::invalid_argument("HoughParams: resolutions and threshold must be > 0");
    if (suppression_radius < 1) throw std::invalid_argument("HoughParams: suppression_radius must be >= 1");
  }

  /// Default resolutions with a vote threshold of a quarter of the image height.
  static HoughParams for_image_height(int height, double ratio = 0.25) {
    HoughParams p;
    p.accumulator_threshold = std::max(1, static_cast<int>(std::lround(ratio * height)));
    return p;
  }
};

struct HoughLine {
  LineParam line;
  int votes = 0;
};

/// Standard (rho, theta) Hough accumulation over every nonzero pixel, peak
/// suppression over a (2r+1)^2 bin window (theta wraps onto itself with rho mirrored), sorted by votes.
inline std::vector<HoughLine> hough_lines(const GrayImage& edges, const HoughParams& p = {}) {
  p.validate();
  const int W = edges.width(), H = edges.height();
  const int n_theta = std::max(1, static_cast<int>(std::lround(kPi / p.theta_resolution)));
  const double dtheta = kPi / n_theta;
  const double max_rho = std::hypot(W, H);
  const int half_rho = static_cast<int>(std::ceil(max_rho / p.rho_resolution));
  const int n_rho = 2 * half_rho + 1;

  std::vector<double> cs(static_cast<std::size_t>(n_theta)), sn(static_cast<std::size_t>(n_theta));
  for (int t = 0; t < n_theta; ++t) {
    cs[static_cast<std::size_t>(t)] = std::cos(t * dtheta);
    sn[static_cast<std::size_t>(t)] = std::sin(t * dtheta);
  }

  std::vector<int> acc(static_cast<std::size_t>(n_theta) * n_rho, 0);
  auto cell = [&](int t, int r) -> int& { return acc[static_cast<std::size_t>(t) * n_rho + r]; };

  bool any = false;
  for (int v = 0; v < H; ++v)
    for (int u = 0; u < W; ++u) {
      if (edges.at(u, v) == 0) continue;
      any = true;
      for (int t = 0; t < n_theta; ++t) {
        const double rho = u * cs[static_cast<std::size_t>(t)] + v * sn[static_cast<std::size_t>(t)];
        const int r = static_cast<int>(std::lround(rho / p.rho_resolution)) + half_rho;
        ++cell(t, r);
      }
    }
  if (!any) return {};

  // Neighbour lookup with theta wrap-around: theta = -1 bin is theta = pi - 1 bin
  // with the sign of rho flipped.
  auto votes_at = [&](int t, int r) -> int {
    if (t < 0) {
      t += n_theta;
      r = n_rho - 1 - r;
    } else if (t >= n_theta) {
      t -= n_theta;
      r = n_rho - 1 - r;
    }
    if (r < 0 || r >= n_rho) return 0;
    return cell(t, r);
  };

  std::vector<HoughLine> out;
  for (int t = 0; t < n_theta; ++t)
    for (int r = 0; r < n_rho; ++r) {
      const int c = cell(t, r);
      if (c < p.accumulator_threshold) continue;
      bool peak = true;
      const int k = p.suppression_radius;
      for (int dt = -k; dt <= k && peak; ++dt)
        for (int dr = -k; dr <= k; ++dr) {
          if (dt == 0 && dr == 0) continue;
          const int n = votes_at(t + dt, r + dr);
          // Earlier neighbours in scan order must be strictly lower, later ones
          // may tie, so a plateau yields a single peak.
          const bool earlier = dt < 0 || (dt == 0 && dr < 0);
          if (earlier ? n >= c : n > c) {
            peak = false;
            break;
          }
        }
      if (peak) out.push_back({LineParam((r - half_rho) * p.rho_resolution, t * dtheta), c});
    }
  std::stable_sort(out.begin(), out.end(), [](const HoughLine& a, const HoughLine& b) { return a.votes > b.votes; });
  return out;
}

/// Total-least-squares refit of a line to the edge pixels within `band` px of it.
/// Returns the input line when fewer than two pixels support it.
inline LineParam refine_line(const GrayImage& edges, const LineParam& line, double band = 2.0, int iterations = 2) {
  LineParam cur = line;
  for (int it = 0; it < iterations; ++it) {
    double n = 0, su = 0, sv = 0, suu = 0, svv = 0, suv = 0;
    for (int v = 0; v < edges.height(); ++v)
      for (int u = 0; u < edges.width(); ++u) {
        if (edges.at(u, v) == 0) continue;
        if (std::abs(cur.signed_distance({double(u), double(v)})) > band) continue;
        n += 1;
        su += u;
        sv += v;
        suu += double(u) * u;
        svv += double(v) * v;
        suv += double(u) * v;
      }
    if (n < 2) return cur;
    const double mu = su / n, mv = sv / n;
    const double cuu = suu / n - mu * mu, cvv = svv / n - mv * mv, cuv = suv / n - mu * mv;
    // Normal = eigenvector of the smallest eigenvalue of the scatter matrix.
    const double phi = 0.5 * std::atan2(2.0 * cuv, cuu - cvv);  // principal direction
    const Point2 dir{std::cos(phi), std::sin(phi)};
    const Point2 mean{mu, mv};
    cur = LineParam::through(mean, mean + dir);
  }
  return cur;
}

}  // namespace aislenav::vision
