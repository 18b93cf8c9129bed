#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "aislenav/eval/metrics.hpp"
#include "aislenav/simworld/scenario.hpp"

namespace aislenav::eval {

inline MetricsSummary lateral_metrics(const sim::TrajectoryRecord& record, const LineParam& reference) {
  if (record.rows.empty()) throw std::invalid_argument("lateral_metrics: empty record");
  const auto p = record.true_positions();
  return lateral_metrics(std::span<const Point2>(p), reference);
}

struct RunSummary {
  sim::NavMode mode = sim::NavMode::fused;
  MetricsSummary lateral;
  double mean_r_vision = 0.0;
  double mean_r_laser = 0.0;
  double max_localization_error = 0.0;  // m
  std::size_t steps = 0;
  bool reached_goal = false;
  bool collided = false;
};

inline RunSummary summarize(const sim::TrajectoryRecord& record, const LineParam& reference) {
  RunSummary s;
  s.mode = record.mode;
  s.lateral = lateral_metrics(record, reference);
  for (const auto& r : record.rows) {
    s.mean_r_vision += r.r_vision;
    s.mean_r_laser += r.r_laser;
    s.max_localization_error = std::max(s.max_localization_error, distance(r.truth.position(), r.estimate.position()));
  }
  s.steps = record.rows.size();
  s.mean_r_vision /= static_cast<double>(s.steps);
  s.mean_r_laser /= static_cast<double>(s.steps);
  s.reached_goal = record.reached_goal;
  s.collided = record.collided;
  return s;
}

namespace detail {

inline std::string fmt(const char* f, double x) {
  if (std::isnan(x)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

inline std::string deg(double rad) { return fmt("%.2f", rad2deg(rad)); }
inline std::string m(double x) { return fmt("%.6f", x); }

}  // namespace detail

inline std::vector<std::string> csv_header(bool with_tracker) {
  std::vector<std::string> h = {"time_s",        "true_x_m",      "true_y_m",     "true_theta_deg", "est_x_m",
                                "est_y_m",       "est_theta_deg", "lateral_dev_m", "phi_vision_deg", "r_vision",
                                "phi_laser_deg", "r_laser",       "phi_fusion_deg", "cmd_v_mps",     "cmd_omega_dps"};
  if (with_tracker) {
    h.push_back("tracker_x_m");
    h.push_back("tracker_y_m");
  }
  return h;
}

/// One line per step. Lengths in m, speeds in m/s, angles in degrees.
inline void write_csv(std::ostream& os, const sim::TrajectoryRecord& record, const LineParam& reference) {
  bool with_tracker = false;
  for (const auto& r : record.rows) with_tracker = with_tracker || r.tracker.has_value();
  const auto h = csv_header(with_tracker);
  for (std::size_t i = 0; i < h.size(); ++i) os << (i ? "," : "") << h[i];
  os << '\n';
  using detail::deg, detail::fmt, detail::m;
  for (const auto& r : record.rows) {
    os << fmt("%.3f", r.time) << ',' << m(r.truth.x) << ',' << m(r.truth.y) << ',' << deg(r.truth.theta()) << ','
       << m(r.estimate.x) << ',' << m(r.estimate.y) << ',' << deg(r.estimate.theta()) << ','
       << m(reference.signed_distance(r.truth.position())) << ',' << deg(r.phi_vision) << ','
       << fmt("%.4f", r.r_vision) << ',' << deg(r.phi_laser) << ',' << fmt("%.4f", r.r_laser) << ','
       << deg(r.phi_fusion) << ',' << fmt("%.4f", r.command.v) << ',' << deg(r.command.omega);
    if (with_tracker) {
      if (r.tracker)
        os << ',' << m(r.tracker->x) << ',' << m(r.tracker->y);
      else
        os << ",nan,nan";
    }
    os << '\n';
  }
}

inline void write_summary(std::ostream& os, const RunSummary& s) {
  using detail::fmt;
  os << "mode            " << sim::to_string(s.mode) << '\n'
     << "steps           " << s.steps << '\n'
     << "reached_goal    " << (s.reached_goal ? "yes" : "no") << '\n'
     << "collided        " << (s.collided ? "yes" : "no") << '\n'
     << "rmse_m          " << fmt("%.4f", s.lateral.rmse) << '\n'
     << "mae_m           " << fmt("%.4f", s.lateral.mae) << '\n'
     << "mdev_m          " << fmt("%.4f", s.lateral.mdev) << '\n'
     << "mean_r_vision   " << fmt("%.3f", s.mean_r_vision) << '\n'
     << "mean_r_laser    " << fmt("%.3f", s.mean_r_laser) << '\n'
     << "max_loc_error_m " << fmt("%.4f", s.max_localization_error) << '\n';
}

/// The mode the fused run is compared against in a published pairing: vision
/// under strong light, laser on a waterlogged floor.
inline std::optional<sim::NavMode> paired_mode(const sim::ScenarioConfig& cfg) {
  const bool glare = !cfg.glare_zones.empty(), water = !cfg.water_patches.empty();
  if (glare && !water) return sim::NavMode::vision;
  if (water && !glare) return sim::NavMode::laser;
  return std::nullopt;
}

/// Table of lateral deviation metrics, one row per mode in the given order.
inline void write_comparison(std::ostream& os, const std::vector<RunSummary>& rows,
                             std::optional<sim::NavMode> paired) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-8s %9s %9s %9s %8s %8s %6s\n", "mode", "rmse_m", "mae_m", "mdev_m", "mean_Rv",
                "mean_Rl", "goal");
  os << buf;
  const bool has_fused = std::any_of(rows.begin(), rows.end(), [](const RunSummary& r) {
    return r.mode == sim::NavMode::fused;
  });
  for (const auto& r : rows) {
    std::string note;
    if (paired && has_fused && (r.mode == sim::NavMode::fused || r.mode == *paired))
      note = *paired == sim::NavMode::vision ? "[pair: fused vs vision, strong light]"
                                             : "[pair: fused vs laser, waterlogged floor]";
    std::snprintf(buf, sizeof buf, "%-8s %9.4f %9.4f %9.4f %8.3f %8.3f %6s", sim::to_string(r.mode), r.lateral.rmse,
                  r.lateral.mae, r.lateral.mdev, r.mean_r_vision, r.mean_r_laser, r.reached_goal ? "yes" : "no");
    os << buf << (note.empty() ? "" : "  " + note) << '\n';
  }
}

}  // namespace aislenav::eval
