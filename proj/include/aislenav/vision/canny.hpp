#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "aislenav/core.hpp"

namespace aislenav::vision {

/// Gradient magnitudes are raw 3x3 Sobel responses (L2). Defaults suit the
/// synthetic corridor frames: strong floor/cage contrast, no sensor noise.
struct CannyParams {
  double gaussian_sigma = 1.4;
  double low_threshold = 40.0;
  double high_threshold = 100.0;

  void validate() const {
    if (!(gaussian_sigma > 0.0)) throw std::invalid_argument("CannyParams: gaussian_sigma must be > 0");
    if (!(low_threshold > 0.0) || !(low_threshold <= high_threshold) || high_threshold > 255.0)
      throw std::invalid_argument("CannyParams: need 0 < low <= high <= 255");
  }
};

namespace detail {

class FloatImage {
 public:
  FloatImage(int w, int h) : w_(w), h_(h), d_(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0.0f) {}
  int width() const { return w_; }
  int height() const { return h_; }
  float& operator()(int u, int v) { return d_[static_cast<std::size_t>(v) * w_ + u]; }
  float operator()(int u, int v) const { return d_[static_cast<std::size_t>(v) * w_ + u]; }
  float clamped(int u, int v) const {
    return (*this)(std::clamp(u, 0, w_ - 1), std::clamp(v, 0, h_ - 1));
  }

 private:
  int w_, h_;
  std::vector<float> d_;
};

inline FloatImage gaussian_blur(const GrayImage& img, double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<float> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double w = std::exp(-0.5 * i * i / (sigma * sigma));
    k[static_cast<std::size_t>(i + radius)] = static_cast<float>(w);
    sum += w;
  }
  for (auto& w : k) w = static_cast<float>(w / sum);

  const int W = img.width(), H = img.height();
  FloatImage tmp(W, H), out(W, H);
  for (int v = 0; v < H; ++v)
    for (int u = 0; u < W; ++u) {
      float acc = 0.0f;
      for (int i = -radius; i <= radius; ++i)
        acc += k[static_cast<std::size_t>(i + radius)] * img.at(std::clamp(u + i, 0, W - 1), v);
      tmp(u, v) = acc;
    }
  for (int v = 0; v < H; ++v)
    for (int u = 0; u < W; ++u) {
      float acc = 0.0f;
      for (int i = -radius; i <= radius; ++i)
        acc += k[static_cast<std::size_t>(i + radius)] * tmp(u, std::clamp(v + i, 0, H - 1));
      out(u, v) = acc;
    }
  return out;
}

}  // namespace detail

/// Binary (0/255) edge map: Gaussian smoothing, Sobel gradients, non-maximum
/// suppression along the gradient direction quantized to 4 sectors, then
/// double-threshold hysteresis with 8-connected linking.
inline GrayImage canny_edges(const GrayImage& img, const CannyParams& p = {}) {
  p.validate();
  const int W = img.width(), H = img.height();
  if (W < 3 || H < 3) throw std::invalid_argument("canny_edges: image must be at least 3x3");

  const detail::FloatImage s = detail::gaussian_blur(img, p.gaussian_sigma);
  detail::FloatImage gx(W, H), gy(W, H), mag(W, H);
  for (int v = 0; v < H; ++v)
    for (int u = 0; u < W; ++u) {
      const float a = s.clamped(u - 1, v - 1), b = s.clamped(u, v - 1), c = s.clamped(u + 1, v - 1);
      const float d = s.clamped(u - 1, v), f = s.clamped(u + 1, v);
      const float g = s.clamped(u - 1, v + 1), h = s.clamped(u, v + 1), i = s.clamped(u + 1, v + 1);
      const float dx = (c + 2 * f + i) - (a + 2 * d + g);
      const float dy = (g + 2 * h + i) - (a + 2 * b + c);
      gx(u, v) = dx;
      gy(u, v) = dy;
      mag(u, v) = std::sqrt(dx * dx + dy * dy);
    }

  // 0 = none, 1 = weak, 2 = strong. The 1-px border never carries an edge.
  std::vector<std::uint8_t> cls(static_cast<std::size_t>(W) * H, 0);
  constexpr float kTan22 = 0.41421356f;
  for (int v = 1; v < H - 1; ++v)
    for (int u = 1; u < W - 1; ++u) {
      const float m = mag(u, v);
      if (m < p.low_threshold) continue;
      const float ax = std::abs(gx(u, v)), ay = std::abs(gy(u, v));
      float before, after;
      if (ay <= kTan22 * ax) {  // gradient ~horizontal
        before = mag(u - 1, v);
        after = mag(u + 1, v);
      } else if (ax <= kTan22 * ay) {  // ~vertical
        before = mag(u, v - 1);
        after = mag(u, v + 1);
      } else if ((gx(u, v) > 0) == (gy(u, v) > 0)) {  // along the main diagonal
        before = mag(u - 1, v - 1);
        after = mag(u + 1, v + 1);
      } else {
        before = mag(u + 1, v - 1);
        after = mag(u - 1, v + 1);
      }
      // Asymmetric comparison keeps exactly one pixel on a plateau pair.
      if (m > before && m >= after) cls[static_cast<std::size_t>(v) * W + u] = m >= p.high_threshold ? 2 : 1;
    }

  GrayImage out(W, H, 0);
  std::vector<int> stack;
  for (int v = 0; v < H; ++v)
    for (int u = 0; u < W; ++u)
      if (cls[static_cast<std::size_t>(v) * W + u] == 2) {
        out.at(u, v) = 255;
        stack.push_back(v * W + u);
      }
  while (!stack.empty()) {
    const int idx = stack.back();
    stack.pop_back();
    const int u0 = idx % W, v0 = idx / W;
    for (int dv = -1; dv <= 1; ++dv)
      for (int du = -1; du <= 1; ++du) {
        const int u = u0 + du, v = v0 + dv;
        if (!out.contains(u, v) || out.at(u, v) != 0) continue;
        if (cls[static_cast<std::size_t>(v) * W + u] == 1) {
          out.at(u, v) = 255;
          stack.push_back(v * W + u);
        }
      }
  }
  return out;
}

}  // namespace aislenav::vision
