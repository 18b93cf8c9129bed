#pragma once

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "aislenav/core.hpp"
#include "aislenav/fusion/fusion.hpp"
#include "aislenav/localization/particle_filter.hpp"
#include "aislenav/simworld/config.hpp"

namespace aislenav::sim {

/// Corridor along +x from x = 0 to length, walls at y = 0 and y = width. The
/// left wall (robot heading +x) is the one at y = width.
struct World {
  ScenarioConfig cfg;
  OccupancyGrid grid;
  localization::LikelihoodField field;
  double x_lo = 0, x_hi = 0, y_lo = 0, y_hi = 0;  // free-space bounds (wall faces)
  LineParam truth_line;                           // world frame (x, y)
  double truth_y = 0;
  fusion::GlobalPath path{{0, 0}, {1, 0}};
  Pose2D start;
  std::vector<double> glare_tan;  // tan(skew) per glare zone

  double free_width() const { return y_hi - y_lo; }
  bool in_free_space(Point2 p) const { return p.x > x_lo && p.x < x_hi && p.y > y_lo && p.y < y_hi; }
  /// Signed lateral offset of p from the truth navigation line, positive to the left.
  double lateral_offset(Point2 p) const { return p.y - truth_y; }
};

inline World build_world(const ScenarioConfig& cfg) {
  validate(cfg);
  World w;
  w.cfg = cfg;
  const double res = cfg.grid_resolution;
  const int cols = static_cast<int>(std::lround(cfg.corridor_length / res));
  const int rows = static_cast<int>(std::lround(cfg.corridor_width / res));
  if (std::abs(cols * res - cfg.corridor_length) > 1e-6 * cfg.corridor_length)
    throw ConfigError("corridor.length", "must be a whole number of grid cells");
  if (std::abs(rows * res - cfg.corridor_width) > 1e-6 * cfg.corridor_width)
    throw ConfigError("corridor.width", "must be a whole number of grid cells");
  w.grid = OccupancyGrid(res, {0.0, 0.0}, cols, rows);
  for (int c = 0; c < cols; ++c) {
    w.grid.set_occupied(c, 0);
    w.grid.set_occupied(c, rows - 1);
  }
  for (int r = 0; r < rows; ++r) {
    w.grid.set_occupied(0, r);
    w.grid.set_occupied(cols - 1, r);
  }
  w.field = localization::LikelihoodField(w.grid);
  for (const auto& z : cfg.glare_zones) w.glare_tan.push_back(std::tan(z.skew));
  w.x_lo = res;
  w.x_hi = cols * res - res;
  w.y_lo = res;
  w.y_hi = rows * res - res;

  const double third = w.free_width() / 3.0;
  w.truth_y = cfg.side == vision::NavSide::left ? w.y_hi - third : w.y_lo + third;
  w.truth_line = LineParam(w.truth_y, kPi / 2);

  const double a = w.x_lo + cfg.path_margin, b = w.x_hi - cfg.path_margin;
  if (!(b > a)) throw ConfigError("corridor.path_margin", "leaves no path inside the corridor");
  w.path = fusion::GlobalPath({a, w.truth_y}, {b, w.truth_y});
  w.start = Pose2D(a, w.truth_y, 0.0);
  return w;
}

// ---------------------------------------------------------------------------
// Lidar
// ---------------------------------------------------------------------------

/// Distance along a ray to the first occupied cell (grid traversal), or
/// infinity when the ray leaves the grid or exceeds max_range.
inline double raycast(const OccupancyGrid& grid, Point2 o, double angle, double max_range) {
  const double res = grid.resolution();
  const double dx = std::cos(angle), dy = std::sin(angle);
  double gx = (o.x - grid.origin().x) / res, gy = (o.y - grid.origin().y) / res;
  int cx = static_cast<int>(std::floor(gx)), cy = static_cast<int>(std::floor(gy));
  if (!grid.in_bounds(cx, cy)) return std::numeric_limits<double>::infinity();
  if (grid.occupied(cx, cy)) return 0.0;
  const int sx = dx > 0 ? 1 : -1, sy = dy > 0 ? 1 : -1;
  constexpr double inf = std::numeric_limits<double>::infinity();
  const double tdx = dx != 0 ? std::abs(1.0 / dx) : inf;
  const double tdy = dy != 0 ? std::abs(1.0 / dy) : inf;
  double tx = dx > 0 ? (cx + 1 - gx) * tdx : dx < 0 ? (gx - cx) * tdx : inf;
  double ty = dy > 0 ? (cy + 1 - gy) * tdy : dy < 0 ? (gy - cy) * tdy : inf;
  const double tmax = max_range / res;
  for (;;) {
    double t;
    if (tx < ty) {
      t = tx;
      cx += sx;
      tx += tdx;
    } else {
      t = ty;
      cy += sy;
      ty += tdy;
    }
    if (t > tmax) return inf;
    if (!grid.in_bounds(cx, cy)) return inf;
    if (grid.occupied(cx, cy)) return t * res;
  }
}

/// Does the segment a-b pass through the patch rectangle?
inline bool segment_crosses(const WaterPatch& w, Point2 a, Point2 b) {
  double t0 = 0.0, t1 = 1.0;
  const double d[2] = {b.x - a.x, b.y - a.y};
  const double p0[2] = {a.x, a.y};
  const double lo[2] = {w.x_min, w.y_min}, hi[2] = {w.x_max, w.y_max};
  for (int k = 0; k < 2; ++k) {
    if (d[k] == 0.0) {
      if (p0[k] < lo[k] || p0[k] > hi[k]) return false;
      continue;
    }
    double ta = (lo[k] - p0[k]) / d[k], tb = (hi[k] - p0[k]) / d[k];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return false;
  }
  return true;
}

inline std::vector<double> beam_angles(const LidarConfig& l) {
  std::vector<double> a(static_cast<std::size_t>(l.beams));
  if (l.beams == 1) {
    a[0] = 0.0;
    return a;
  }
  for (int i = 0; i < l.beams; ++i) a[static_cast<std::size_t>(i)] = -0.5 * l.span + l.span * i / (l.beams - 1);
  return a;
}

inline localization::LidarScan simulate_lidar(const World& w, const Pose2D& pose, std::mt19937_64& rng) {
  if (!w.in_free_space(pose.position())) throw std::invalid_argument("simulate_lidar: pose outside free space");
  const LidarConfig& L = w.cfg.lidar;
  localization::LidarScan scan;
  scan.max_range = L.max_range;
  scan.angles = beam_angles(L);
  scan.ranges.resize(scan.angles.size());
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t i = 0; i < scan.angles.size(); ++i) {
    const double a = pose.theta() + scan.angles[i];
    double r = raycast(w.grid, pose.position(), a, L.max_range);
    const double base = g(rng);
    if (!std::isfinite(r)) {
      scan.ranges[i] = localization::LidarScan::no_return;
      continue;
    }
    const Point2 hit{pose.x + r * std::cos(a), pose.y + r * std::sin(a)};
    double bias = 0.0, var = L.noise_std * L.noise_std;
    bool drop = false;
    for (const auto& p : w.cfg.water_patches) {
      if (!segment_crosses(p, pose.position(), hit)) continue;
      bias += p.range_bias;
      var += p.noise_std * p.noise_std;
      if (u(rng) < p.dropout) drop = true;
    }
    r += bias + std::sqrt(var) * base;
    if (drop || r > L.max_range) {
      scan.ranges[i] = localization::LidarScan::no_return;
      continue;
    }
    scan.ranges[i] = std::max(r, 1e-3);
  }
  return scan;
}

// ---------------------------------------------------------------------------
// Camera
// ---------------------------------------------------------------------------

/// Combined gain of the zones covering g, and whether any of them clips hard.
struct GlareHit {
  double gain = 1.0;
  bool saturate = false;
};

inline GlareHit glare_at(const World& w, Point2 g, bool on_floor) {
  GlareHit h;
  const double mid = 0.5 * w.cfg.corridor_width;
  const double y = std::clamp(g.y, 0.0, w.cfg.corridor_width);
  for (std::size_t i = 0; i < w.cfg.glare_zones.size(); ++i) {
    const GlareZone& z = w.cfg.glare_zones[i];
    if (!on_floor && !z.walls) continue;
    if ((z.y_min && y < *z.y_min) || (z.y_max && y > *z.y_max)) continue;
    const double s = g.x - (y - mid) * w.glare_tan[i];
    if (s < z.start || s > z.end) continue;
    h.gain *= z.gain;
    h.saturate = h.saturate || z.saturate;
  }
  return h;
}

/// Radiance of a world ground point seen from `dist` meters away.
inline double shade_ground(const World& w, Point2 g, double dist) {
  const RenderConfig& rc = w.cfg.render;
  const bool floor = g.x >= w.x_lo && g.x <= w.x_hi && g.y >= w.y_lo && g.y <= w.y_hi;
  const double dim = std::max(rc.min_brightness, 1.0 - rc.falloff * dist);
  double I = (floor ? rc.floor_intensity : rc.wall_intensity) * dim;
  if (!w.cfg.glare_zones.empty()) {
    const GlareHit h = glare_at(w, g, floor);
    I *= h.gain;
    if (I > 191.0 && !h.saturate) I = 255.0 - 64.0 * std::exp(-(I - 191.0) / 64.0);  // soft knee
  }
  return std::min(I, 255.0);
}

/// Radiance along the ray through fractional pixel (u, v).
inline double shade(const World& w, const Pose2D& pose, double u, double v) {
  const RenderConfig& rc = w.cfg.render;
  const auto gr = w.cfg.vision.camera.ground_of_pixel(u, v);
  if (!gr) return rc.wall_intensity * rc.min_brightness;
  const double c = std::cos(pose.theta()), s = std::sin(pose.theta());
  return shade_ground(w, {pose.x + c * gr->x - s * gr->y, pose.y + s * gr->x + c * gr->y}, norm(*gr));
}

inline GrayImage render_camera(const World& w, const Pose2D& pose, std::mt19937_64* noise_rng = nullptr) {
  if (!w.in_free_space(pose.position())) throw std::invalid_argument("render_camera: pose outside free space");
  const auto& cam = w.cfg.vision.camera;
  const int ss = w.cfg.render.supersample;
  GrayImage img(cam.width, cam.height);
  std::normal_distribution<double> g(0.0, w.cfg.render.noise_std > 0 ? w.cfg.render.noise_std : 1.0);
  for (int v = 0; v < cam.height; ++v)
    for (int u = 0; u < cam.width; ++u) {
      double acc = 0.0;
      for (int j = 0; j < ss; ++j)
        for (int i = 0; i < ss; ++i)
          acc += shade(w, pose, u - 0.5 + (i + 0.5) / ss, v - 0.5 + (j + 0.5) / ss);
      double I = acc / (ss * ss);
      if (noise_rng && w.cfg.render.noise_std > 0) I += g(*noise_rng);
      img.at(u, v) = static_cast<std::uint8_t>(std::clamp(std::lround(I), 0L, 255L));
    }
  return img;
}

}  // namespace aislenav::sim
