#pragma once

#include <cstdint>
#include <vector>

#include "aislenav/core.hpp"
#include "aislenav/reliability.hpp"

namespace aislenav::vision {

/// Per-row extent of white corridor pixels.
struct WidthProfile {
  std::vector<double> d;  // one entry per image row, 0 for rows without white
  std::vector<bool> valid;
  int valid_rows = 0;
};

/// White where a pixel lies between the two edges on its row (inclusive) and is
/// at least `intensity_threshold` bright.
inline GrayImage corridor_mask(const GrayImage& img, const LineParam& left, const LineParam& right,
                               int intensity_threshold) {
  GrayImage mask(img.width(), img.height(), 0);
  for (int v = 0; v < img.height(); ++v) {
    const auto ul = left.u_at(v);
    const auto ur = right.u_at(v);
    if (!ul || !ur) continue;
    const double lo = std::min(*ul, *ur), hi = std::max(*ul, *ur);
    const int u0 = std::max(0, static_cast<int>(std::ceil(lo - 1e-9)));
    const int u1 = std::min(img.width() - 1, static_cast<int>(std::floor(hi + 1e-9)));
    for (int u = u0; u <= u1; ++u)
      if (img.at(u, v) >= intensity_threshold) mask.at(u, v) = 255;
  }
  return mask;
}

inline WidthProfile row_width_profile(const GrayImage& mask) {
  WidthProfile p;
  p.d.assign(static_cast<std::size_t>(mask.height()), 0.0);
  p.valid.assign(static_cast<std::size_t>(mask.height()), false);
  for (int v = 0; v < mask.height(); ++v) {
    int lo = -1, hi = -1;
    for (int u = 0; u < mask.width(); ++u)
      if (mask.at(u, v) != 0) {
        if (lo < 0) lo = u;
        hi = u;
      }
    if (lo >= 0) {
      p.d[static_cast<std::size_t>(v)] = hi - lo;
      p.valid[static_cast<std::size_t>(v)] = true;
      ++p.valid_rows;
    }
  }
  return p;
}

/// Fraction of rows holding white pixels whose white run starts and ends
/// within `tolerance` px of the left and right edge lines.
inline double edge_support(const GrayImage& mask, const LineParam& left, const LineParam& right, double tolerance) {
  int rows = 0, supported = 0;
  for (int v = 0; v < mask.height(); ++v) {
    int lo = -1, hi = -1;
    for (int u = 0; u < mask.width(); ++u)
      if (mask.at(u, v) != 0) {
        if (lo < 0) lo = u;
        hi = u;
      }
    if (lo < 0) continue;
    ++rows;
    const auto ul = left.u_at(v), ur = right.u_at(v);
    if (!ul || !ur) continue;
    const double a = std::clamp(std::min(*ul, *ur), 0.0, mask.width() - 1.0);
    const double b = std::clamp(std::max(*ul, *ur), 0.0, mask.width() - 1.0);
    if (std::abs(lo - a) <= tolerance && std::abs(hi - b) <= tolerance) ++supported;
  }
  return rows == 0 ? 0.0 : double(supported) / rows;
}

/// Sum of squared deviations of d over the valid rows (no division by the count).
inline double width_scatter(const WidthProfile& p) {
  if (p.valid_rows < 2) throw ExtractionFailure("width profile has fewer than two valid rows");
  double mean = 0.0;
  for (std::size_t j = 0; j < p.d.size(); ++j)
    if (p.valid[j]) mean += p.d[j];
  mean /= p.valid_rows;
  double s = 0.0;
  for (std::size_t j = 0; j < p.d.size(); ++j)
    if (p.valid[j]) s += (p.d[j] - mean) * (p.d[j] - mean);
  return s;
}

inline double visual_reliability(const WidthProfile& p, const ReliabilityCalibration& calib) {
  if (!(calib.stat_max > calib.stat_min)) throw CalibrationError("visual_reliability: stat_max must exceed stat_min");
  return normalized_reliability(width_scatter(p), calib);
}

}  // namespace aislenav::vision
