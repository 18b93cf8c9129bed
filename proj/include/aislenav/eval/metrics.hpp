#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "aislenav/core.hpp"

namespace aislenav::eval {

struct MetricsSummary {
  double rmse = 0.0;
  double mae = 0.0;
  double mdev = 0.0;
};

inline MetricsSummary deviation_metrics(std::span<const double> dev) {
  if (dev.empty()) throw std::invalid_argument("deviation_metrics: empty sequence");
  double s2 = 0.0, s1 = 0.0, mx = 0.0;
  for (double d : dev) {
    s2 += d * d;
    s1 += std::abs(d);
    mx = std::max(mx, std::abs(d));
  }
  const double n = static_cast<double>(dev.size());
  MetricsSummary m{std::sqrt(s2 / n), s1 / n, mx};
  // rounding can break the power-mean ordering in the last ulp
  m.rmse = std::min(m.rmse, m.mdev);
  m.mae = std::min(m.mae, m.rmse);
  return m;
}

/// Signed perpendicular distances of the positions from a world-frame line.
inline std::vector<double> lateral_deviations(std::span<const Point2> positions, const LineParam& reference) {
  std::vector<double> d;
  d.reserve(positions.size());
  for (const auto& p : positions) d.push_back(reference.signed_distance(p));
  return d;
}

inline MetricsSummary lateral_metrics(std::span<const Point2> positions, const LineParam& reference) {
  if (positions.empty()) throw std::invalid_argument("lateral_metrics: empty record");
  const auto d = lateral_deviations(positions, reference);
  return deviation_metrics(d);
}

}  // namespace aislenav::eval
