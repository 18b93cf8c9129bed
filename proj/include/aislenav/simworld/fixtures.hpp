#pragma once

#include <string>
#include <vector>

#include "aislenav/simworld/world.hpp"

namespace aislenav::sim {

/// Noise-free default scene used for the golden frames.
inline ScenarioConfig fixture_config() {
  ScenarioConfig c;
  c.render.noise_std = 0.0;
  return c;
}

struct GoldenFrame {
  std::string name;  // file name, .pgm
  double yaw = 0.0;  // rad, robot heading relative to the corridor axis
};

inline std::vector<GoldenFrame> golden_frames() {
  return {{"aligned_centered.pgm", 0.0}, {"yawed_5deg.pgm", deg2rad(5.0)}};
}

/// The robot sits halfway along the corridor on its centre line.
inline GrayImage render_golden(const World& w, const GoldenFrame& f) {
  return render_camera(w, Pose2D(0.5 * w.cfg.corridor_length, 0.5 * w.cfg.corridor_width, f.yaw));
}

}  // namespace aislenav::sim
