#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "aislenav/core.hpp"
#include "aislenav/fusion/fusion.hpp"
#include "aislenav/localization/motion.hpp"
#include "aislenav/localization/particle_filter.hpp"
#include "aislenav/reliability.hpp"
#include "aislenav/vision/pipeline.hpp"

namespace aislenav::sim {

/// Invalid or unreadable scenario configuration; `field()` names the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

enum class NavMode { fused, vision, laser };

inline const char* to_string(NavMode m) {
  switch (m) {
    case NavMode::fused: return "fused";
    case NavMode::vision: return "vision";
    case NavMode::laser: return "laser";
  }
  return "?";
}

inline NavMode parse_nav_mode(const std::string& s) {
  if (s == "fused") return NavMode::fused;
  if (s == "vision") return NavMode::vision;
  if (s == "laser") return NavMode::laser;
  throw std::invalid_argument("unknown mode '" + s + "' (expected fused, vision or laser)");
}

/// Lit band of ground. With y clamped to the corridor, points satisfying
/// start <= x - (y - width/2) tan(skew) <= end and y_min <= y <= y_max have
/// their intensity multiplied by `gain`. The wall strip is lit too when
/// `walls` is set.
struct GlareZone {
  double start = 0.0;
  double end = 0.0;
  double gain = 1.0;
  bool saturate = true;
  double skew = 0.0;  // rad
  bool walls = false;
  std::optional<double> y_min, y_max;
};

struct WaterPatch {
  double x_min = 0.0, x_max = 0.0, y_min = 0.0, y_max = 0.0;
  double range_bias = 0.0;  // m
  double noise_std = 0.0;   // m, added in quadrature to the base noise
  double dropout = 0.0;     // probability
};

struct RenderConfig {
  int floor_intensity = 180;
  int wall_intensity = 40;
  double falloff = 0.04;        // brightness lost per meter of ground distance
  double min_brightness = 0.3;  // floor of the dimming factor
  int supersample = 2;
  double noise_std = 0.0;  // intensity levels
};

struct LidarConfig {
  int beams = 181;
  double span = deg2rad(270.0);
  double max_range = 25.0;
  double noise_std = 0.01;
};

struct ParticleConfig {
  int count = 500;
  double init_spread_xy = 0.1;
  double init_spread_theta = deg2rad(3.0);
  localization::ObservationModel model{0.1, 0.05, 30, 0.3};
  bool model_sigma_set = false;  // otherwise 2 x grid resolution
  MotionNoise noise{0.02, 0.02, 0.005, 0.005};
  double resample_ratio = 0.5;
};

/// Overhead evaluation camera; adds tracker columns to the trajectory.
struct TrackerConfig {
  std::array<double, 9> K{};
  std::array<double, 9> R{};
  std::array<double, 3> t{};
  double marker_size = 0.3;
};

struct ScenarioConfig {
  double corridor_length = 20.0;
  double corridor_width = 3.0;
  double grid_resolution = 0.05;
  double path_margin = 1.0;
  std::vector<GlareZone> glare_zones;
  std::vector<WaterPatch> water_patches;
  vision::VisionConfig vision;  // camera geometry lives in vision.camera
  std::optional<ReliabilityCalibration> vision_calibration;
  std::optional<ReliabilityCalibration> laser_calibration;
  RenderConfig render;
  LidarConfig lidar;
  ParticleConfig particles;
  fusion::ControllerGains gains;
  double goal_tolerance = 0.1;
  int calibration_window = 30;
  std::uint64_t seed = 1;
  vision::NavSide side = vision::NavSide::left;
  NavMode mode = NavMode::fused;
  int duration = 600;  // steps
  double dt = 0.1;
  std::optional<TrackerConfig> tracker;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& field, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size() || !std::isfinite(d)) throw std::invalid_argument("");
    return d;
  } catch (const std::exception&) {
    throw ConfigError(field, "expected a number, got '" + v + "'");
  }
}

inline long long parse_int(const std::string& field, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long long d = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return d;
  } catch (const std::exception&) {
    throw ConfigError(field, "expected an integer, got '" + v + "'");
  }
}

inline std::uint64_t parse_u64(const std::string& field, const std::string& v) {
  try {
    std::size_t pos = 0;
    if (!v.empty() && v[0] == '-') throw std::invalid_argument("");
    const unsigned long long d = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return d;
  } catch (const std::exception&) {
    throw ConfigError(field, "expected a non-negative integer, got '" + v + "'");
  }
}

inline bool parse_bool(const std::string& field, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(field, "expected true or false, got '" + v + "'");
}

template <std::size_t N>
std::array<double, N> parse_doubles(const std::string& field, const std::string& v) {
  std::istringstream in(v);
  std::array<double, N> out{};
  std::string tok;
  std::size_t i = 0;
  while (in >> tok) {
    if (i == N) throw ConfigError(field, "expected " + std::to_string(N) + " numbers");
    out[i++] = parse_double(field, tok);
  }
  if (i != N) throw ConfigError(field, "expected " + std::to_string(N) + " numbers");
  return out;
}

struct Section {
  std::string name;
  int line = 0;
  std::vector<std::pair<std::string, std::string>> entries;
};

inline std::vector<Section> split_sections(std::istream& in) {
  std::vector<Section> out;
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto hash = raw.find_first_of("#;");
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("", "line " + std::to_string(lineno) + ": malformed section header");
      out.push_back({trim(line.substr(1, line.size() - 2)), lineno, {}});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("", "line " + std::to_string(lineno) + ": expected key = value");
    if (out.empty()) throw ConfigError("", "line " + std::to_string(lineno) + ": key outside any section");
    out.back().entries.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return out;
}

}  // namespace detail

/// Reads the INI-style scenario format. Unknown sections and keys are errors.
inline ScenarioConfig parse_scenario(std::istream& in) {
  using namespace detail;
  ScenarioConfig c;
  std::optional<double> vmin, vmax, lmin, lmax;
  bool seen_tracker = false;

  for (const Section& sec : split_sections(in)) {
    using Handler = std::function<void(const std::string&)>;
    std::map<std::string, Handler> h;
    const std::string& s = sec.name;
    GlareZone* gz = nullptr;
    WaterPatch* wp = nullptr;
    auto num = [&](double& dst) { return [&dst, &s](const std::string& v) { dst = parse_double(s, v); }; };
    auto deg = [&](double& dst) { return [&dst, &s](const std::string& v) { dst = deg2rad(parse_double(s, v)); }; };
    auto integer = [&](int& dst) {
      return [&dst, &s](const std::string& v) { dst = static_cast<int>(parse_int(s, v)); };
    };

    if (s == "scenario") {
      h["seed"] = [&](const std::string& v) { c.seed = parse_u64("scenario.seed", v); };
      h["duration"] = integer(c.duration);
      h["dt"] = num(c.dt);
      h["mode"] = [&](const std::string& v) {
        try { c.mode = parse_nav_mode(v); } catch (const std::invalid_argument& e) { throw ConfigError("scenario.mode", e.what()); }
      };
      h["side"] = [&](const std::string& v) {
        try { c.side = vision::parse_nav_side(v); } catch (const std::invalid_argument& e) { throw ConfigError("scenario.side", e.what()); }
      };
      h["calibration_window"] = integer(c.calibration_window);
    } else if (s == "corridor") {
      h["length"] = num(c.corridor_length);
      h["width"] = num(c.corridor_width);
      h["resolution"] = num(c.grid_resolution);
      h["path_margin"] = num(c.path_margin);
    } else if (s == "camera") {
      h["width"] = integer(c.vision.camera.width);
      h["height"] = integer(c.vision.camera.height);
      h["hfov_deg"] = deg(c.vision.camera.hfov);
      h["mount_height"] = num(c.vision.camera.mount_height);
      h["pitch_deg"] = deg(c.vision.camera.pitch);
      h["floor_intensity"] = integer(c.render.floor_intensity);
      h["wall_intensity"] = integer(c.render.wall_intensity);
      h["falloff"] = num(c.render.falloff);
      h["min_brightness"] = num(c.render.min_brightness);
      h["supersample"] = integer(c.render.supersample);
      h["noise_std"] = num(c.render.noise_std);
    } else if (s == "vision") {
      h["canny_sigma"] = num(c.vision.canny.gaussian_sigma);
      h["canny_low"] = num(c.vision.canny.low_threshold);
      h["canny_high"] = num(c.vision.canny.high_threshold);
      h["rho_resolution"] = num(c.vision.rho_resolution);
      h["theta_resolution_deg"] = deg(c.vision.theta_resolution);
      h["hough_threshold_ratio"] = num(c.vision.hough_threshold_ratio);
      h["hough_suppression_radius"] = integer(c.vision.hough_suppression_radius);
      h["horizontal_exclusion_deg"] = deg(c.vision.horizontal_exclusion);
      h["refine_edges"] = [&](const std::string& v) { c.vision.refine_edges = parse_bool("vision.refine_edges", v); };
      h["window_near"] = num(c.vision.window.near);
      h["window_far"] = num(c.vision.window.far);
      h["window_half_width"] = num(c.vision.window.half_width);
      h["window_resolution"] = num(c.vision.window.resolution);
      h["intensity_threshold"] = integer(c.vision.intensity_threshold);
      h["min_mask_coverage"] = num(c.vision.min_mask_coverage);
      h["min_edge_support"] = num(c.vision.min_edge_support);
      h["edge_support_tolerance"] = num(c.vision.edge_support_tolerance);
    } else if (s == "reliability") {
      h["vision_min"] = [&](const std::string& v) { vmin = parse_double("reliability.vision_min", v); };
      h["vision_max"] = [&](const std::string& v) { vmax = parse_double("reliability.vision_max", v); };
      h["laser_min"] = [&](const std::string& v) { lmin = parse_double("reliability.laser_min", v); };
      h["laser_max"] = [&](const std::string& v) { lmax = parse_double("reliability.laser_max", v); };
    } else if (s == "lidar") {
      h["beams"] = integer(c.lidar.beams);
      h["span_deg"] = deg(c.lidar.span);
      h["max_range"] = num(c.lidar.max_range);
      h["noise_std"] = num(c.lidar.noise_std);
    } else if (s == "particles") {
      h["count"] = integer(c.particles.count);
      h["init_spread_xy"] = num(c.particles.init_spread_xy);
      h["init_spread_theta_deg"] = deg(c.particles.init_spread_theta);
      h["hit_sigma"] = [&](const std::string& v) {
        c.particles.model.sigma = parse_double("particles.hit_sigma", v);
        c.particles.model_sigma_set = true;
      };
      h["uniform_weight"] = num(c.particles.model.uniform_weight);
      h["max_beams"] = integer(c.particles.model.max_beams);
      h["min_ess_ratio"] = num(c.particles.model.min_ess_ratio);
      h["sigma_v"] = num(c.particles.noise.sigma_v);
      h["sigma_omega"] = num(c.particles.noise.sigma_omega);
      h["sigma_xy"] = num(c.particles.noise.sigma_xy);
      h["sigma_theta"] = num(c.particles.noise.sigma_theta);
      h["resample_ratio"] = num(c.particles.resample_ratio);
    } else if (s == "controller") {
      h["k_yaw"] = num(c.gains.k_yaw);
      h["v_cruise"] = num(c.gains.v_cruise);
      h["lookahead"] = num(c.gains.lookahead);
      h["goal_tolerance"] = num(c.goal_tolerance);
    } else if (s == "glare") {
      gz = &c.glare_zones.emplace_back();
      h["start"] = num(gz->start);
      h["end"] = num(gz->end);
      h["gain"] = num(gz->gain);
      h["saturate"] = [gz](const std::string& v) { gz->saturate = parse_bool("glare.saturate", v); };
      h["skew_deg"] = deg(gz->skew);
      h["walls"] = [gz](const std::string& v) { gz->walls = parse_bool("glare.walls", v); };
      h["y_min"] = [gz](const std::string& v) { gz->y_min = parse_double("glare.y_min", v); };
      h["y_max"] = [gz](const std::string& v) { gz->y_max = parse_double("glare.y_max", v); };
    } else if (s == "water") {
      wp = &c.water_patches.emplace_back();
      h["x_min"] = num(wp->x_min);
      h["x_max"] = num(wp->x_max);
      h["y_min"] = num(wp->y_min);
      h["y_max"] = num(wp->y_max);
      h["range_bias"] = num(wp->range_bias);
      h["noise_std"] = num(wp->noise_std);
      h["dropout"] = num(wp->dropout);
    } else if (s == "tracker") {
      if (seen_tracker) throw ConfigError("tracker", "section given twice");
      seen_tracker = true;
      c.tracker.emplace();
      TrackerConfig& t = *c.tracker;
      h["K"] = [&t](const std::string& v) { t.K = parse_doubles<9>("tracker.K", v); };
      h["R"] = [&t](const std::string& v) { t.R = parse_doubles<9>("tracker.R", v); };
      h["t"] = [&t](const std::string& v) { t.t = parse_doubles<3>("tracker.t", v); };
      h["marker_size"] = num(t.marker_size);
    } else {
      throw ConfigError(s, "unknown section (line " + std::to_string(sec.line) + ")");
    }

    for (const auto& [key, value] : sec.entries) {
      const auto it = h.find(key);
      if (it == h.end()) throw ConfigError(s + "." + key, "unknown key");
      try {
        it->second(value);
      } catch (const ConfigError& e) {
        if (e.field() == s) throw ConfigError(s + "." + key, std::string(e.what()).substr(s.size() + 2));
        throw;
      }
    }
  }

  if (vmin || vmax) {
    if (!vmin || !vmax) throw ConfigError("reliability.vision_min", "vision_min and vision_max go together");
    c.vision_calibration = ReliabilityCalibration{*vmin, *vmax};
  }
  if (lmin || lmax) {
    if (!lmin || !lmax) throw ConfigError("reliability.laser_min", "laser_min and laser_max go together");
    c.laser_calibration = ReliabilityCalibration{*lmin, *lmax};
  }
  c.vision.side = c.side;
  return c;
}

inline ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file '" + path + "'");
  return parse_scenario(in);
}

/// Checks every documented invariant except the ones that need the built
/// world. Throws ConfigError naming the field.
inline void validate(const ScenarioConfig& c) {
  auto need = [](bool ok, const char* field, const char* what) {
    if (!ok) throw ConfigError(field, what);
  };
  need(c.corridor_length > 0, "corridor.length", "must be > 0");
  need(c.corridor_width > 0, "corridor.width", "must be > 0");
  need(c.grid_resolution > 0, "corridor.resolution", "must be > 0");
  need(c.corridor_width >= 4 * c.grid_resolution, "corridor.width", "must span at least four grid cells");
  need(c.path_margin >= 0 && 2 * c.path_margin < c.corridor_length - 2 * c.grid_resolution, "corridor.path_margin",
       "leaves no path inside the corridor");
  need(c.duration >= 0, "scenario.duration", "must be >= 0");
  need(c.dt > 0, "scenario.dt", "must be > 0");
  need(c.calibration_window >= 1, "scenario.calibration_window", "must be >= 1");
  need(c.vision.camera.width >= 3 && c.vision.camera.height >= 3, "camera.width", "image must be at least 3x3");
  need(c.vision.camera.hfov > 0 && c.vision.camera.hfov < kPi, "camera.hfov_deg", "must be in (0, 180)");
  need(c.vision.camera.mount_height > 0, "camera.mount_height", "must be > 0");
  need(c.vision.camera.pitch > 0 && c.vision.camera.pitch < kPi / 2, "camera.pitch_deg", "must be in (0, 90)");
  need(c.render.floor_intensity >= 0 && c.render.floor_intensity <= 255, "camera.floor_intensity", "must be in [0, 255]");
  need(c.render.wall_intensity >= 0 && c.render.wall_intensity <= 255, "camera.wall_intensity", "must be in [0, 255]");
  need(c.render.falloff >= 0, "camera.falloff", "must be >= 0");
  need(c.render.min_brightness > 0 && c.render.min_brightness <= 1, "camera.min_brightness", "must be in (0, 1]");
  need(c.render.supersample >= 1 && c.render.supersample <= 8, "camera.supersample", "must be in [1, 8]");
  need(c.render.noise_std >= 0, "camera.noise_std", "must be >= 0");
  need(c.vision.canny.gaussian_sigma > 0, "vision.canny_sigma", "must be > 0");
  need(c.vision.canny.low_threshold >= 0 && c.vision.canny.high_threshold >= c.vision.canny.low_threshold, "vision.canny_high",
       "need 0 <= canny_low <= canny_high");
  need(c.vision.rho_resolution > 0, "vision.rho_resolution", "must be > 0");
  need(c.vision.theta_resolution > 0, "vision.theta_resolution_deg", "must be > 0");
  need(c.vision.hough_threshold_ratio > 0, "vision.hough_threshold_ratio", "must be > 0");
  need(c.vision.hough_suppression_radius >= 1, "vision.hough_suppression_radius", "must be >= 1");
  need(c.vision.horizontal_exclusion >= 0 && c.vision.horizontal_exclusion < kPi / 2, "vision.horizontal_exclusion_deg",
       "must be in [0, 90)");
  need(c.vision.window.near > 0 && c.vision.window.far > c.vision.window.near, "vision.window_far",
       "need 0 < window_near < window_far");
  need(c.vision.window.half_width > 0, "vision.window_half_width", "must be > 0");
  need(c.vision.window.resolution > 0, "vision.window_resolution", "must be > 0");
  need(c.vision.min_mask_coverage >= 0 && c.vision.min_mask_coverage <= 1, "vision.min_mask_coverage",
       "must be in [0, 1]");
  need(c.vision.min_edge_support >= 0 && c.vision.min_edge_support <= 1, "vision.min_edge_support",
       "must be in [0, 1]");
  need(c.vision.edge_support_tolerance >= 0, "vision.edge_support_tolerance", "must be >= 0");
  need(c.vision.intensity_threshold >= 0 && c.vision.intensity_threshold <= 255, "vision.intensity_threshold",
       "must be in [0, 255]");
  if (c.vision_calibration)
    need(c.vision_calibration->stat_max > c.vision_calibration->stat_min, "reliability.vision_max",
         "must exceed vision_min");
  if (c.laser_calibration)
    need(c.laser_calibration->stat_max > c.laser_calibration->stat_min, "reliability.laser_max",
         "must exceed laser_min");
  need(c.lidar.beams >= 1, "lidar.beams", "must be >= 1");
  need(c.lidar.span >= 0 && c.lidar.span <= kTwoPi, "lidar.span_deg", "must be in [0, 360]");
  need(c.lidar.max_range > 0, "lidar.max_range", "must be > 0");
  need(c.lidar.noise_std >= 0, "lidar.noise_std", "must be >= 0");
  need(c.particles.count >= 1, "particles.count", "must be >= 1");
  need(c.particles.init_spread_xy >= 0, "particles.init_spread_xy", "must be >= 0");
  need(c.particles.init_spread_theta >= 0, "particles.init_spread_theta_deg", "must be >= 0");
  need(c.particles.model.sigma > 0, "particles.hit_sigma", "must be > 0");
  need(c.particles.model.uniform_weight >= 0 && c.particles.model.uniform_weight <= 1, "particles.uniform_weight",
       "must be in [0, 1]");
  need(c.particles.model.min_ess_ratio >= 0 && c.particles.model.min_ess_ratio <= 1, "particles.min_ess_ratio",
       "must be in [0, 1]");
  need(c.particles.model.max_beams >= 1, "particles.max_beams", "must be >= 1");
  need(c.particles.noise.sigma_v >= 0, "particles.sigma_v", "must be >= 0");
  need(c.particles.noise.sigma_omega >= 0, "particles.sigma_omega", "must be >= 0");
  need(c.particles.noise.sigma_xy >= 0, "particles.sigma_xy", "must be >= 0");
  need(c.particles.noise.sigma_theta >= 0, "particles.sigma_theta", "must be >= 0");
  need(c.particles.resample_ratio >= 0 && c.particles.resample_ratio <= 1, "particles.resample_ratio",
       "must be in [0, 1]");
  need(c.gains.k_yaw > 0, "controller.k_yaw", "must be > 0");
  need(c.gains.v_cruise > 0, "controller.v_cruise", "must be > 0");
  need(c.gains.lookahead > 0, "controller.lookahead", "must be > 0");
  need(c.goal_tolerance > 0, "controller.goal_tolerance", "must be > 0");

  for (const auto& g : c.glare_zones) {
    need(g.start >= 0 && g.end > g.start && g.end <= c.corridor_length, "glare.start",
         "zone must satisfy 0 <= start < end <= corridor length");
    need(g.gain > 0, "glare.gain", "must be > 0");
    need(std::abs(g.skew) < deg2rad(85.0), "glare.skew_deg", "must be within +-85");
    const double lo = g.y_min.value_or(0.0), hi = g.y_max.value_or(c.corridor_width);
    need(lo >= 0 && hi <= c.corridor_width && hi > lo, "glare.y_min", "need 0 <= y_min < y_max <= corridor width");
  }
  for (const auto& w : c.water_patches) {
    need(w.x_min >= 0 && w.x_max > w.x_min && w.x_max <= c.corridor_length, "water.x_min",
         "patch must lie inside the corridor along x");
    need(w.y_min >= 0 && w.y_max > w.y_min && w.y_max <= c.corridor_width, "water.y_min",
         "patch must lie inside the corridor along y");
    need(w.noise_std >= 0, "water.noise_std", "must be >= 0");
    need(w.dropout >= 0 && w.dropout <= 1, "water.dropout", "must be in [0, 1]");
  }
  if (c.tracker) need(c.tracker->marker_size > 0, "tracker.marker_size", "must be > 0");
}

}  // namespace aislenav::sim
