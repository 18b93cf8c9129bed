#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "aislenav/core.hpp"

namespace aislenav::vision {

/// Raised when the image mean sits at 0 or 255, where the exponent is undefined.
class DegenerateExposure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exponent that maps the image mean onto mid-gray: lg(0.5) / lg(mean / 255).
inline double adaptive_gamma(const GrayImage& img) {
  if (img.empty()) throw std::invalid_argument("adaptive_gamma: empty image");
  const double mean = img.mean();
  if (mean <= 0.0 || mean >= 255.0)
    throw DegenerateExposure("adaptive_gamma: image mean is " + std::to_string(mean) +
                             "; needs to be strictly inside (0, 255)");
  return std::log10(0.5) / std::log10(mean / 255.0);
}

/// Power-law remap on normalized intensity: out = round(255 * (in/255)^gamma).
inline GrayImage gamma_correct(const GrayImage& img, double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw std::invalid_argument("gamma_correct: gamma must be > 0");
  std::array<std::uint8_t, 256> lut{};
  for (int i = 0; i < 256; ++i) {
    const double out = std::round(255.0 * std::pow(i / 255.0, gamma));
    lut[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(std::clamp(out, 0.0, 255.0));
  }
  GrayImage out = img;
  for (auto& p : out.pixels()) p = lut[p];
  return out;
}

}  // namespace aislenav::vision
