#include <cmath>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "aislenav/eval/report.hpp"
#include "aislenav/fusion/fusion.hpp"
#include "aislenav/simworld/scenario.hpp"

using namespace aislenav;
using namespace aislenav::fusion;

namespace {

YawEstimate vis(double a, double r) { return {a, r, YawSource::vision}; }
YawEstimate las(double a, double r) { return {a, r, YawSource::laser}; }

sim::ScenarioConfig nominal() {
  std::ifstream in(std::string(AISLENAV_SOURCE_DIR) + "/presets/nominal.cfg");
  return sim::parse_scenario(in);
}

}  // namespace

TEST(FuseYaw, WaterloggedFloorReading) {
  const double f = fuse_yaw(vis(deg2rad(3.50), 0.84), las(deg2rad(2.64), 0.16));
  EXPECT_NEAR(rad2deg(f), 3.36, 0.01);
  EXPECT_NEAR(f, 0.058643, 1e-4);
}

TEST(FuseYaw, DegenerateWeights) {
  EXPECT_NEAR(fuse_yaw(vis(0.2, 0.5), las(-0.1, 0.5)), 0.05, 1e-15);
  EXPECT_EQ(fuse_yaw(vis(0.7, 0.0), las(-0.3, 0.4)), -0.3);
  EXPECT_EQ(fuse_yaw(vis(0.7, 0.2), las(-0.3, 0.0)), 0.7);
  EXPECT_THROW(fuse_yaw(vis(0.1, 0.0), las(0.2, 0.0)), NoEstimate);
}

TEST(FuseYaw, RejectsBadInput) {
  EXPECT_THROW(fuse_yaw(las(0.1, 0.5), las(0.2, 0.5)), std::invalid_argument);
  EXPECT_THROW(fuse_yaw(vis(0.1, 1.5), las(0.2, 0.5)), std::invalid_argument);
  EXPECT_THROW(fuse_yaw(vis(2.0, 0.5), las(0.2, 0.5)), std::invalid_argument);
}

TEST(FuseYaw, ConvexCombinationAndScaleInvariance) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> ang(-kPi / 2, kPi / 2), rel(0.0, 1.0), scale(0.01, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double a = ang(rng), b = ang(rng), ra = rel(rng), rb = rel(rng);
    if (ra + rb == 0.0) continue;
    const double f = fuse_yaw(vis(a, ra), las(b, rb));
    EXPECT_GE(f, std::min(a, b) - 1e-15);
    EXPECT_LE(f, std::max(a, b) + 1e-15);
    const double c = scale(rng);
    EXPECT_NEAR(fuse_yaw(vis(a, c * ra), las(b, c * rb)), f, 1e-12);
  }
}

TEST(LocalTarget, Examples) {
  const GlobalPath p({0, 0}, {10, 0});
  const Point2 on = local_target(p, Pose2D(3, 0, 0), 1.5);
  EXPECT_DOUBLE_EQ(on.x, 4.5);
  EXPECT_DOUBLE_EQ(on.y, 0.0);
  const Point2 past = local_target(p, Pose2D(12, 0.5, 0), 1.0);
  EXPECT_DOUBLE_EQ(past.x, 10.0);
  EXPECT_DOUBLE_EQ(past.y, 0.0);
  const Point2 off = local_target(p, Pose2D(4, 1, 0), 2.0);
  EXPECT_DOUBLE_EQ(off.x, 6.0);
  EXPECT_DOUBLE_EQ(off.y, 0.0);
  EXPECT_THROW(local_target(p, Pose2D{}, 0.0), std::invalid_argument);
  EXPECT_THROW(GlobalPath({1, 1}, {1, 1}), DegenerateGeometry);
}

TEST(LocalTarget, SlantedPath) {
  const GlobalPath p({1, 1}, {4, 5});
  // the robot projects onto arc length 2.5 (the point (2.5, 3)); two more metres along (0.6, 0.8)
  const Point2 t = local_target(p, Pose2D(2.5 + 0.8, 3 - 0.6, 0), 2.0);
  EXPECT_NEAR(t.x, 3.7, 1e-12);
  EXPECT_NEAR(t.y, 4.6, 1e-12);
}

TEST(SteeringCommand, Examples) {
  const ControllerGains g{2.0, 0.4, 1.0};
  const MotionCommand straight = steering_command(0.0, g, false);
  EXPECT_EQ(straight.v, 0.4);
  EXPECT_EQ(straight.omega, 0.0);
  const MotionCommand turn = steering_command(0.1, g, false);
  EXPECT_DOUBLE_EQ(turn.omega, -0.2);
  EXPECT_DOUBLE_EQ(turn.v, 0.4 * std::cos(0.1));
  const MotionCommand stop = steering_command(0.3, g, true);
  EXPECT_EQ(stop.v, 0.0);
  EXPECT_EQ(stop.omega, 0.0);
  EXPECT_EQ(steering_command(2.0, g, false).v, 0.0);
  EXPECT_THROW((ControllerGains{0.0, 0.4, 1.0}.validate()), std::invalid_argument);
}

TEST(ClosedLoop, NominalCorridorFused) {
  const sim::ScenarioConfig cfg = nominal();
  ASSERT_EQ(cfg.corridor_length, 20.0);
  const sim::World w = sim::build_world(cfg);
  const auto rec = sim::run_scenario(cfg);
  EXPECT_TRUE(rec.reached_goal);
  EXPECT_FALSE(rec.collided);
  EXPECT_LT(eval::lateral_metrics(rec, w.truth_line).rmse, 0.05);
}

TEST(ClosedLoop, SingleSensorRunsComplete) {
  for (sim::NavMode mode : {sim::NavMode::vision, sim::NavMode::laser}) {
    sim::ScenarioConfig cfg = nominal();
    cfg.mode = mode;
    const auto rec = sim::run_scenario(cfg);
    EXPECT_TRUE(rec.reached_goal) << sim::to_string(mode);
    EXPECT_FALSE(rec.collided) << sim::to_string(mode);
  }
}
