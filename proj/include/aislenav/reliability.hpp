#pragma once

// Linear min/max normalization of an error statistic into a reliability in
// [0, 1]. Larger statistics mean a less trustworthy sensor, so the score is
// one minus the normalized statistic.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

#include "aislenav/core.hpp"

namespace aislenav {

struct ReliabilityCalibration {
  double stat_min = 0.0;
  double stat_max = 1.0;
};

inline double normalized_reliability(double stat, const ReliabilityCalibration& c) {
  if (!(c.stat_max > c.stat_min)) throw CalibrationError("reliability calibration needs stat_max > stat_min");
  if (std::isnan(stat)) throw std::invalid_argument("reliability statistic is NaN");
  const double n = std::clamp((stat - c.stat_min) / (c.stat_max - c.stat_min), 0.0, 1.0);
  return 1.0 - n;
}

/// Per-run calibration of the normalization range. With a fixed calibration the
/// window is ignored. Otherwise the first `window` observations set
/// [stat_min, stat_max]; they are scored 1 while the window fills, on the
/// assumption that a run starts under nominal conditions.
class ReliabilityCalibrator {
 public:
  explicit ReliabilityCalibrator(int window, std::optional<ReliabilityCalibration> fixed = std::nullopt)
      : window_(window), fixed_(fixed) {
    if (window < 1 && !fixed) throw std::invalid_argument("ReliabilityCalibrator: window must be >= 1");
    if (fixed && !(fixed->stat_max > fixed->stat_min))
      throw CalibrationError("ReliabilityCalibrator: fixed calibration needs stat_max > stat_min");
  }

  double score(double stat) {
    if (fixed_) return normalized_reliability(stat, *fixed_);
    if (seen_ < window_) {
      lo_ = std::min(lo_, stat);
      hi_ = std::max(hi_, stat);
      ++seen_;
      return 1.0;
    }
    return normalized_reliability(stat, calibration());
  }

  bool calibrated() const { return fixed_.has_value() || seen_ >= window_; }

  /// The range in use. A window whose observations never varied is widened by
  /// a relative epsilon so the normalization stays defined.
  ReliabilityCalibration calibration() const {
    if (fixed_) return *fixed_;
    if (seen_ == 0) throw CalibrationError("ReliabilityCalibrator: no observations yet");
    ReliabilityCalibration c{lo_, hi_};
    if (!(c.stat_max > c.stat_min)) c.stat_max = c.stat_min + std::max(1e-9, 1e-6 * std::abs(c.stat_min));
    return c;
  }

 private:
  int window_;
  std::optional<ReliabilityCalibration> fixed_;
  int seen_ = 0;
  double lo_ = std::numeric_limits<double>::infinity();
  double hi_ = -std::numeric_limits<double>::infinity();
};

}  // namespace aislenav
