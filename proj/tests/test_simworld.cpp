#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <gtest/gtest.h>

#include "aislenav/eval/report.hpp"
#include "aislenav/simworld/fixtures.hpp"
#include "aislenav/simworld/scenario.hpp"

using namespace aislenav;
using namespace aislenav::sim;

namespace {

ScenarioConfig preset(const std::string& name) {
  std::ifstream in(std::string(AISLENAV_SOURCE_DIR) + "/presets/" + name + ".cfg");
  return parse_scenario(in);
}

ScenarioConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_scenario(in);
}

/// Runs are cached so properties that share a scenario do not repeat it.
const TrajectoryRecord& cached_run(const std::string& name, NavMode mode) {
  static std::map<std::pair<std::string, NavMode>, TrajectoryRecord> cache;
  const auto key = std::make_pair(name, mode);
  auto it = cache.find(key);
  if (it == cache.end()) {
    ScenarioConfig cfg = preset(name);
    cfg.mode = mode;
    it = cache.emplace(key, run_scenario(cfg)).first;
  }
  return it->second;
}

double lateral_rmse(const std::string& name, NavMode mode) {
  return eval::lateral_metrics(cached_run(name, mode), build_world(preset(name)).truth_line).rmse;
}

ScenarioConfig quiet() {
  ScenarioConfig c = fixture_config();
  c.lidar.noise_std = 0.0;
  return c;
}

std::string field_of(const std::string& text) {
  try {
    build_world(parse(text));
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

}  // namespace

TEST(Config, PresetsParse) {
  for (const char* name : {"nominal", "glare", "water"}) {
    const ScenarioConfig c = preset(name);
    EXPECT_NO_THROW(build_world(c)) << name;
    EXPECT_EQ(c.corridor_length, 20.0);
    EXPECT_EQ(c.seed, 7u);
  }
  EXPECT_EQ(preset("glare").glare_zones.size(), 5u);
  EXPECT_EQ(preset("water").water_patches.size(), 2u);
}

TEST(Config, Defaults) {
  const ScenarioConfig c = parse("[scenario]\nseed = 3\n");
  EXPECT_EQ(c.seed, 3u);
  EXPECT_EQ(c.corridor_length, 20.0);
  EXPECT_EQ(c.corridor_width, 3.0);
  EXPECT_EQ(c.dt, 0.1);
  EXPECT_FALSE(c.vision_calibration);
  EXPECT_EQ(parse("").particles.count, 500);
}

TEST(Config, ErrorsNameTheField) {
  EXPECT_EQ(field_of("[corridor]\nlenght = 20\n"), "corridor.lenght");
  EXPECT_EQ(field_of("[corridor]\nlength = abc\n"), "corridor.length");
  EXPECT_EQ(field_of("[corridor]\nlength = -4\n"), "corridor.length");
  EXPECT_EQ(field_of("[bogus]\n"), "bogus");
  EXPECT_EQ(field_of("[scenario]\nmode = hybrid\n"), "scenario.mode");
  EXPECT_EQ(field_of("[water]\nx_min = 18\nx_max = 25\ny_min = 0\ny_max = 1\n"), "water.x_min");
  EXPECT_EQ(field_of("[water]\nx_min = 1\nx_max = 2\ny_min = 0\ny_max = 1\ndropout = 1.5\n"), "water.dropout");
  EXPECT_EQ(field_of("[glare]\nstart = 5\nend = 4\n"), "glare.start");
  EXPECT_EQ(field_of("[reliability]\nvision_min = 1\n"), "reliability.vision_min");
  EXPECT_EQ(field_of("[corridor]\nresolution = 0.07\n"), "corridor.length");
  EXPECT_THROW(parse("[corridor]\nlength 20\n"), ConfigError);
  EXPECT_THROW(parse("length = 20\n"), ConfigError);
}

TEST(BuildWorld, GridAndBorders) {
  const World w = build_world(ScenarioConfig{});
  EXPECT_EQ(w.grid.width(), 400);
  EXPECT_EQ(w.grid.height(), 60);
  for (int c = 0; c < 400; ++c) {
    EXPECT_TRUE(w.grid.occupied(c, 0));
    EXPECT_TRUE(w.grid.occupied(c, 59));
  }
  for (int r = 0; r < 60; ++r) {
    EXPECT_TRUE(w.grid.occupied(0, r));
    EXPECT_TRUE(w.grid.occupied(399, r));
  }
  EXPECT_EQ(w.grid.occupied_count(), 2u * 400 + 2u * 58);
}

TEST(BuildWorld, NavigationLineAtOneThird) {
  ScenarioConfig c;
  const World l = build_world(c);
  // the left wall is at +y when heading along +x
  EXPECT_NEAR(l.y_hi - l.truth_y, l.free_width() / 3.0, 1e-12);
  EXPECT_NEAR(l.truth_line.signed_distance({7.0, l.truth_y}), 0.0, 1e-12);
  c.side = vision::NavSide::right;
  const World r = build_world(c);
  EXPECT_NEAR(r.truth_y - r.y_lo, r.free_width() / 3.0, 1e-12);
}

TEST(Kinematics, MatchesClosedForm) {
  const Pose2D a = step_kinematics(Pose2D(0, 0, 0), {1.0, 0.0, 1.0});
  EXPECT_NEAR(a.x, 1.0, 1e-12);
  EXPECT_NEAR(a.y, 0.0, 1e-12);
  const Pose2D b = step_kinematics(Pose2D(0, 0, 0), {0.0, kPi / 2, 1.0});
  EXPECT_NEAR(b.x, 0.0, 1e-12);
  EXPECT_NEAR(b.theta(), kPi / 2, 1e-12);
  const Pose2D c = step_kinematics(Pose2D(0, 0, 0), {1.0, kPi / 2, 1.0});
  EXPECT_NEAR(c.x, 2 / kPi, 1e-12);
  EXPECT_NEAR(c.y, 2 / kPi, 1e-12);
  EXPECT_NEAR(c.theta(), kPi / 2, 1e-12);
  EXPECT_THROW(step_kinematics(Pose2D{}, {1.0, 0.0, -0.1}), std::invalid_argument);
}

TEST(Lidar, GeometryWithoutNoise) {
  const World w = build_world(quiet());
  std::mt19937_64 rng(1);
  const Pose2D centre(5.0, 0.5 * w.cfg.corridor_width, 0.0);
  const auto scan = simulate_lidar(w, centre, rng);
  ASSERT_EQ(scan.size(), 181u);
  // beam 150 points at +90 deg, beam 90 straight ahead
  EXPECT_NEAR(scan.angles[150], kPi / 2, 1e-12);
  EXPECT_NEAR(scan.ranges[150], 0.5 * w.free_width(), 1e-9);
  EXPECT_NEAR(scan.ranges[30], 0.5 * w.free_width(), 1e-9);
  EXPECT_EQ(scan.angles[90], 0.0);
  EXPECT_NEAR(scan.ranges[90], w.x_hi - 5.0, 1e-9);
  EXPECT_THROW(simulate_lidar(w, Pose2D(-1, 1, 0), rng), std::invalid_argument);
}

TEST(Lidar, WaterDropout) {
  ScenarioConfig c = quiet();
  c.water_patches.push_back({6.0, 8.0, 0.0, 3.0, 0.0, 0.0, 1.0});
  const World w = build_world(c);
  std::mt19937_64 rng(1);
  const auto scan = simulate_lidar(w, Pose2D(5.0, 1.5, 0.0), rng);
  EXPECT_FALSE(scan.has_return(90));
  EXPECT_TRUE(scan.has_return(150));
  EXPECT_NEAR(scan.ranges[150], 1.45, 1e-9);
}

TEST(Lidar, WaterBias) {
  ScenarioConfig c = quiet();
  c.water_patches.push_back({6.0, 8.0, 0.0, 3.0, 0.25, 0.0, 0.0});
  const World w = build_world(c);
  std::mt19937_64 rng(1);
  const auto scan = simulate_lidar(w, Pose2D(5.0, 1.5, 0.0), rng);
  EXPECT_NEAR(scan.ranges[90], w.x_hi - 5.0 + 0.25, 1e-9);
  EXPECT_NEAR(scan.ranges[150], 1.45, 1e-9);
}

TEST(Render, CentredFrameIsMirrorSymmetric) {
  const World w = build_world(fixture_config());
  const GrayImage img = render_camera(w, Pose2D(10.0, 0.5 * w.cfg.corridor_width, 0.0));
  for (int v = 0; v < img.height(); ++v)
    for (int u = 0; u < img.width() / 2; ++u)
      ASSERT_LE(std::abs(int(img.at(u, v)) - int(img.at(img.width() - 1 - u, v))), 1) << u << "," << v;
  EXPECT_THROW(render_camera(w, Pose2D(10.0, 5.0, 0.0)), std::invalid_argument);
}

TEST(Render, YawedRobotGivesPositiveYaw) {
  const ScenarioConfig cfg = fixture_config();
  const World w = build_world(cfg);
  vision::VisionConfig v = cfg.vision;
  v.calibration = {0.0, 150.0};
  const YawEstimate e = vision::visual_yaw_pipeline(render_camera(w, Pose2D(10.0, 1.5, deg2rad(5.0))), v);
  EXPECT_NEAR(rad2deg(e.angle), 5.0, 1.0);
}

TEST(Render, SaturatingGlareWashesOutRows) {
  ScenarioConfig c = fixture_config();
  c.glare_zones.push_back({5.0, 8.0, 10.0, true, 0.0, true, std::nullopt, std::nullopt});
  const World w = build_world(c);
  const Pose2D pose(5.0, 1.5, 0.0);
  const GrayImage img = render_camera(w, pose);
  const auto& cam = c.vision.camera;
  int affected = 0, saturated = 0;
  for (int v = 0; v < cam.height; ++v) {
    bool inside = true;
    for (int u = 0; u < cam.width && inside; ++u) {
      const auto g = cam.ground_of_pixel(u, v);
      inside = g && pose.x + g->x >= 5.0 && pose.x + g->x <= 8.0;
    }
    if (!inside) continue;
    ++affected;
    const auto row = img.row(v);
    saturated += std::all_of(row.begin(), row.end(), [](std::uint8_t p) { return p == 255; });
  }
  ASSERT_GT(affected, 20);
  EXPECT_GE(saturated, 0.9 * affected);
}

TEST(Scenario, ZeroDurationRecordsStartOnly) {
  ScenarioConfig c = preset("nominal");
  c.duration = 0;
  const auto rec = run_scenario(c);
  ASSERT_EQ(rec.rows.size(), 1u);
  EXPECT_EQ(rec.rows[0].time, 0.0);
  EXPECT_EQ(rec.rows[0].truth, build_world(c).start);
  EXPECT_EQ(rec.rows[0].command.v, 0.0);
  EXPECT_EQ(rec.rows[0].command.omega, 0.0);
}

TEST(Scenario, ShortRunHasOneRowPerStep) {
  ScenarioConfig c = preset("nominal");
  c.duration = 40;
  const auto rec = run_scenario(c);
  ASSERT_EQ(rec.rows.size(), 41u);
  for (std::size_t i = 1; i < rec.rows.size(); ++i) EXPECT_GT(rec.rows[i].time, rec.rows[i - 1].time);
  EXPECT_GT(rec.rows.back().truth.x, rec.rows.front().truth.x);
}

TEST(Scenario, Deterministic) {
  ScenarioConfig c = preset("glare");
  c.duration = 60;
  const World w = build_world(c);
  std::ostringstream a, b;
  eval::write_csv(a, run_scenario(c), w.truth_line);
  eval::write_csv(b, run_scenario(c), w.truth_line);
  EXPECT_EQ(a.str(), b.str());
  c.seed += 1;
  std::ostringstream d;
  eval::write_csv(d, run_scenario(c), w.truth_line);
  EXPECT_NE(a.str(), d.str());
}

TEST(Scenario, NominalCompletesAccurately) {
  const auto& rec = cached_run("nominal", NavMode::fused);
  EXPECT_TRUE(rec.reached_goal);
  EXPECT_FALSE(rec.collided);
  EXPECT_GE(rec.rows.back().truth.x, 18.0);
  EXPECT_LT(lateral_rmse("nominal", NavMode::fused), 0.05);
}

TEST(Scenario, LocalizerTracksTruth) {
  const auto& rec = cached_run("nominal", NavMode::fused);
  const double res = preset("nominal").grid_resolution;
  std::size_t first = 0;
  while (first < rec.rows.size() &&
         distance(rec.rows[first].truth.position(), rec.rows[first].estimate.position()) >= 3 * res)
    ++first;
  ASSERT_LT(first, 30u) << "the localizer never settled";
  std::size_t good = 0;
  for (std::size_t i = first; i < rec.rows.size(); ++i)
    good += distance(rec.rows[i].truth.position(), rec.rows[i].estimate.position()) < 3 * res;
  EXPECT_GE(double(good), 0.95 * double(rec.rows.size() - first));
}

TEST(Scenario, GlareHurtsVisionOnly) {
  const auto n = eval::summarize(cached_run("nominal", NavMode::fused), build_world(preset("nominal")).truth_line);
  const auto g = eval::summarize(cached_run("glare", NavMode::fused), build_world(preset("glare")).truth_line);
  EXPECT_LT(std::abs(g.mean_r_laser - n.mean_r_laser), 0.1);
  EXPECT_GT(n.mean_r_vision - g.mean_r_vision, 0.3);
  EXPECT_GT(lateral_rmse("glare", NavMode::vision), lateral_rmse("glare", NavMode::fused));
}

TEST(Scenario, WaterHurtsLaserOnly) {
  const auto n = eval::summarize(cached_run("nominal", NavMode::fused), build_world(preset("nominal")).truth_line);
  const auto w = eval::summarize(cached_run("water", NavMode::fused), build_world(preset("water")).truth_line);
  EXPECT_LT(std::abs(w.mean_r_vision - n.mean_r_vision), 0.1);
  EXPECT_GT(n.mean_r_laser - w.mean_r_laser, 0.3);
}
