#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "aislenav/localization/particle_filter.hpp"
#include "aislenav/simworld/world.hpp"

using namespace aislenav;
using namespace aislenav::localization;

namespace {

ParticleSet from_poses(const std::vector<Pose2D>& poses, const std::vector<double>& weights, std::uint64_t seed = 1) {
  std::vector<Particle> ps;
  for (std::size_t i = 0; i < poses.size(); ++i) ps.push_back({poses[i], weights[i]});
  return ParticleSet(std::move(ps), seed);
}

ParticleSet on_x_axis(const std::vector<double>& xs, const std::vector<double>& weights) {
  std::vector<Pose2D> poses;
  for (double x : xs) poses.emplace_back(x, 0.0, 0.0);
  return from_poses(poses, weights);
}

/// 2 m x 2 m room at 0.05 m cells with a wall column at x in [1.50, 1.55).
OccupancyGrid wall_grid() {
  OccupancyGrid g(0.05, {0.0, 0.0}, 40, 40);
  for (int r = 0; r < 40; ++r) g.set_occupied(30, r);
  return g;
}

}  // namespace

TEST(Predict, ClosedFormExamples) {
  const MotionNoise none;
  auto step = [&](double v, double w) {
    ParticleSet s = ParticleSet::at(Pose2D(0, 0, 0), 1, 1);
    predict(s, {v, w, 1.0}, none);
    return s.particles()[0].pose;
  };
  const Pose2D a = step(1.0, 0.0);
  EXPECT_NEAR(a.x, 1.0, 1e-12);
  EXPECT_NEAR(a.y, 0.0, 1e-12);
  EXPECT_NEAR(a.theta(), 0.0, 1e-12);
  const Pose2D b = step(0.0, kPi / 2);
  EXPECT_NEAR(b.x, 0.0, 1e-12);
  EXPECT_NEAR(b.y, 0.0, 1e-12);
  EXPECT_NEAR(b.theta(), kPi / 2, 1e-12);
  const Pose2D c = step(1.0, kPi / 2);
  EXPECT_NEAR(c.x, 2.0 / kPi, 1e-12);
  EXPECT_NEAR(c.y, 2.0 / kPi, 1e-12);
  EXPECT_NEAR(c.theta(), kPi / 2, 1e-12);
}

TEST(Predict, NoiseFreeMatchesArcGeometry) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> pos(-5, 5), ang(-kPi, kPi), vel(-2, 2), rate(-3, 3), dt(0.01, 2);
  for (int i = 0; i < 100; ++i) {
    const Pose2D p0(pos(rng), pos(rng), ang(rng));
    double w = rate(rng);
    if (i % 10 == 0) w = 0.0;
    const MotionCommand cmd{vel(rng), w, dt(rng)};
    ParticleSet s = ParticleSet::at(p0, 2, 3);
    predict(s, cmd, {});
    const Pose2D& got = s.particles()[0].pose;
    EXPECT_EQ(got.x, s.particles()[1].pose.x);
    // independent oracle: rotate about the instantaneous centre of curvature
    double ex, ey;
    if (w == 0.0) {
      ex = p0.x + cmd.v * cmd.dt * std::cos(p0.theta());
      ey = p0.y + cmd.v * cmd.dt * std::sin(p0.theta());
    } else {
      const double r = cmd.v / w;
      const double icx = p0.x - r * std::sin(p0.theta()), icy = p0.y + r * std::cos(p0.theta());
      const double a = w * cmd.dt;
      ex = icx + std::cos(a) * (p0.x - icx) - std::sin(a) * (p0.y - icy);
      ey = icy + std::sin(a) * (p0.x - icx) + std::cos(a) * (p0.y - icy);
    }
    EXPECT_NEAR(got.x, ex, 1e-12);
    EXPECT_NEAR(got.y, ey, 1e-12);
    EXPECT_NEAR(std::remainder(got.theta() - (p0.theta() + w * cmd.dt), kTwoPi), 0.0, 1e-12);
  }
}

TEST(Predict, RejectsBadInput) {
  ParticleSet s = ParticleSet::at(Pose2D{}, 3, 1);
  EXPECT_THROW(predict(s, {1.0, 0.0, 0.0}, {}), std::invalid_argument);
  EXPECT_THROW(predict(s, {1.0, 0.0, 0.1}, {-0.1, 0, 0, 0}), std::invalid_argument);
}

TEST(Predict, SeededNoiseIsReproducible) {
  const MotionNoise n{0.1, 0.1, 0.02, 0.02};
  ParticleSet a = ParticleSet::at(Pose2D{}, 50, 77), b = ParticleSet::at(Pose2D{}, 50, 77);
  predict(a, {0.5, 0.2, 0.1}, n);
  predict(b, {0.5, 0.2, 0.1}, n);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a.particles()[i].pose, b.particles()[i].pose);
}

TEST(LikelihoodField, DistanceToStraightWall) {
  const LikelihoodField f(wall_grid());
  EXPECT_NEAR(f.distance({1.0, 1.0}), 0.5, 1e-9);
  EXPECT_NEAR(f.distance({1.2, 0.33}), 0.3, 1e-9);
  EXPECT_NEAR(f.distance({1.9, 1.0}), 0.35, 1e-9);
  EXPECT_EQ(f.distance({1.52, 1.0}), 0.0);
  EXPECT_EQ(f.distance({-1.0, 1.0}, 7.0), 7.0);
}

TEST(WeightUpdate, SingleParticleNormalizes) {
  const LikelihoodField f(wall_grid());
  ParticleSet s = ParticleSet::at(Pose2D(0.3, 1.0, 0.0), 1, 1);
  LidarScan scan{{0.0}, {0.4}, 5.0};
  weight_update(s, scan, f, ObservationModel::for_resolution(0.05));
  EXPECT_DOUBLE_EQ(s.particles()[0].weight, 1.0);
}

TEST(WeightUpdate, TruePoseWins) {
  OccupancyGrid g(0.05, {0.0, 0.0}, 80, 40);
  for (int r = 0; r < 40; ++r) g.set_occupied(60, r);
  const LikelihoodField f(g);
  // one beam straight ahead onto the wall face at x = 3; the second hypothesis sits 1 m short
  const LidarScan scan{{0.0}, {1.0}, 5.0};
  ParticleSet s = from_poses({Pose2D(2.0, 1.0, 0.0), Pose2D(1.0, 1.0, 0.0)}, {0.5, 0.5});
  weight_update(s, scan, f, ObservationModel::for_resolution(0.05));
  // endpoint distances 0 and 1 m under the Gaussian-plus-uniform mixture
  const double sigma = 0.1, norm = 1.0 / (std::sqrt(2 * kPi) * sigma), uni = 0.05 / 5.0;
  const double l0 = 0.95 * norm + uni, l1 = 0.95 * norm * std::exp(-1.0 / (2 * sigma * sigma)) + uni;
  EXPECT_NEAR(s.particles()[0].weight, l0 / (l0 + l1), 1e-9);
  EXPECT_GT(s.particles()[0].weight, 0.9);
}

TEST(WeightUpdate, IdenticalParticlesShareWeight) {
  const LikelihoodField f(wall_grid());
  ParticleSet s = ParticleSet::at(Pose2D(0.7, 0.4, 0.2), 8, 1);
  weight_update(s, {{-0.5, 0.0, 0.5}, {1.0, 0.8, LidarScan::no_return}, 5.0}, f, ObservationModel::for_resolution(0.05));
  for (const auto& p : s.particles()) EXPECT_DOUBLE_EQ(p.weight, 1.0 / 8);
}

TEST(WeightUpdate, UnderflowFallsBackToUniform) {
  const LikelihoodField f(wall_grid());
  ParticleSet s = on_x_axis({0.2, 0.4}, {0.5, 0.5});
  LidarScan scan{std::vector<double>(30, 0.0), std::vector<double>(30, 4.0), 5.0};
  ObservationModel m{1e-3, 0.0, 30};
  weight_update(s, scan, f, m);
  EXPECT_TRUE(s.degenerate());
  EXPECT_EQ(s.particles()[0].weight, 0.5);
  EXPECT_EQ(s.particles()[1].weight, 0.5);
}

TEST(WeightUpdate, WeightsStayNormalized) {
  const LikelihoodField f(wall_grid());
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> xy(0.1, 1.4), th(-kPi, kPi), r(0.1, 3.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Pose2D> poses;
    for (int i = 0; i < 100; ++i) poses.emplace_back(xy(rng), xy(rng), th(rng));
    ParticleSet s = from_poses(poses, std::vector<double>(100, 0.01), trial);
    LidarScan scan;
    scan.max_range = 3.0;
    for (int i = 0; i < 61; ++i) {
      scan.angles.push_back(-kPi / 2 + i * kPi / 60);
      scan.ranges.push_back(r(rng));
    }
    weight_update(s, scan, f, ObservationModel::for_resolution(0.05));
    double sum = 0.0;
    for (const auto& p : s.particles()) {
      EXPECT_TRUE(std::isfinite(p.weight));
      EXPECT_GE(p.weight, 0.0);
      sum += p.weight;
    }
    EXPECT_NEAR(sum, 1.0, 1e-9);
    const double n = effective_count(s);
    EXPECT_GE(n, 1.0 - 1e-9);
    EXPECT_LE(n, 100.0 + 1e-9);
  }
}

TEST(WeightUpdate, TemperingKeepsEffectiveCount) {
  const LikelihoodField f(wall_grid());
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> xy(0.1, 1.4), th(-0.5, 0.5);
  std::vector<Pose2D> poses;
  for (int i = 0; i < 400; ++i) poses.emplace_back(xy(rng), xy(rng), th(rng));
  poses[0] = Pose2D(0.5, 1.0, 0.0);
  LidarScan scan;
  scan.max_range = 5.0;
  for (int i = -5; i <= 5; ++i) {
    scan.angles.push_back(0.05 * i);
    scan.ranges.push_back(1.0 / std::cos(0.05 * i));
  }
  ObservationModel full = ObservationModel::for_resolution(0.05);
  full.min_ess_ratio = 0.0;
  ParticleSet a = from_poses(poses, std::vector<double>(400, 1.0 / 400));
  weight_update(a, scan, f, full);
  EXPECT_EQ(a.last_tempering(), 1.0);
  ASSERT_LT(effective_count(a), 0.3 * 400);

  ParticleSet b = from_poses(poses, std::vector<double>(400, 1.0 / 400));
  weight_update(b, scan, f, ObservationModel::for_resolution(0.05));
  EXPECT_GT(b.last_tempering(), 0.0);
  EXPECT_LT(b.last_tempering(), 1.0);
  EXPECT_GE(effective_count(b), 0.3 * 400 - 1e-6);
  EXPECT_LT(effective_count(b), 0.3 * 400 + 1.0);
  // tempering keeps the ranking of the hypotheses
  for (std::size_t i = 1; i < 400; ++i)
    EXPECT_EQ(a.particles()[i].weight < a.particles()[0].weight, b.particles()[i].weight < b.particles()[0].weight);
}

TEST(Roughen, ScalesWithSpread) {
  ParticleSet same = ParticleSet::at(Pose2D(1, 2, 0.3), 50, 4);
  roughen(same, 0.5);
  for (const auto& p : same.particles()) EXPECT_EQ(p.pose, Pose2D(1, 2, 0.3));

  ParticleSet cloud = ParticleSet::gaussian(Pose2D(0, 0, 0), 1.0, 0.2, 4000, 9);
  const auto before = cloud.particles();
  roughen(cloud, 0.0);
  for (std::size_t i = 0; i < before.size(); ++i) EXPECT_EQ(cloud.particles()[i].pose, before[i].pose);
  roughen(cloud, 0.5);
  double dx2 = 0.0;
  for (std::size_t i = 0; i < before.size(); ++i) dx2 += std::pow(cloud.particles()[i].pose.x - before[i].pose.x, 2);
  EXPECT_NEAR(std::sqrt(dx2 / double(before.size())), 0.5, 0.05);
  EXPECT_THROW(roughen(cloud, -1.0), std::invalid_argument);
  EXPECT_NEAR(default_roughening(500), 0.398, 1e-3);
}

TEST(WeightUpdate, RejectsInvalidScan) {
  const LikelihoodField f(wall_grid());
  ParticleSet s = ParticleSet::at(Pose2D(0.5, 0.5, 0), 2, 1);
  EXPECT_THROW(weight_update(s, {{0.0}, {9.0}, 5.0}, f, {}), std::invalid_argument);
  EXPECT_THROW(weight_update(s, {{0.0, 1.0}, {1.0}, 5.0}, f, {}), std::invalid_argument);
  EXPECT_THROW(weight_update(s, {{}, {}, 5.0}, f, {}), std::invalid_argument);
}

TEST(DecimateBeams, SymmetricAndBounded) {
  EXPECT_EQ(decimate_beams(5, 30), (std::vector<std::size_t>{0, 1, 2, 3, 4}));
  const auto b = decimate_beams(181, 30);
  EXPECT_LE(b.size(), 30u);
  EXPECT_EQ(b.front(), 0u);
  EXPECT_EQ(b.back(), 180u);
  for (std::size_t i = 0; i < b.size(); ++i) EXPECT_EQ(b[i] + b[b.size() - 1 - i], 180u);
  EXPECT_EQ(decimate_beams(181, 1), (std::vector<std::size_t>{90}));
}

TEST(EffectiveCount, Examples) {
  EXPECT_DOUBLE_EQ(effective_count(on_x_axis({0, 1, 2, 3, 4}, std::vector<double>(5, 0.2))), 5.0);
  EXPECT_DOUBLE_EQ(effective_count(on_x_axis({0, 1, 2}, {1, 0, 0})), 1.0);
  EXPECT_DOUBLE_EQ(effective_count(on_x_axis({0, 1, 2, 3}, {0.5, 0.5, 0, 0})), 2.0);
}

TEST(Resample, Examples) {
  ParticleSet u = on_x_axis({0, 1, 2, 3}, {0.25, 0.25, 0.25, 0.25});
  resample(u);
  for (int i = 0; i < 4; ++i) EXPECT_EQ(u.particles()[static_cast<std::size_t>(i)].pose.x, i);

  ParticleSet one = on_x_axis({7, 8, 9}, {1, 0, 0});
  resample(one);
  for (const auto& p : one.particles()) {
    EXPECT_EQ(p.pose.x, 7.0);
    EXPECT_DOUBLE_EQ(p.weight, 1.0 / 3);
  }

  ParticleSet q = on_x_axis({0, 1, 2, 3}, {0.75, 0.25, 0, 0});
  resample(q);
  int zeros = 0, ones = 0;
  for (const auto& p : q.particles()) (p.pose.x == 0.0 ? zeros : ones)++;
  EXPECT_EQ(zeros, 3);
  EXPECT_EQ(ones, 1);

  ParticleSet dead = on_x_axis({0, 1}, {0, 0});
  EXPECT_THROW(resample(dead), std::invalid_argument);
}

TEST(Resample, PreservesSizeAndMean) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> x(-10, 10), w(0, 1);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 200;
    std::vector<double> xs(n), ws(n);
    double sw = 0;
    for (std::size_t i = 0; i < n; ++i) {
      xs[i] = x(rng);
      ws[i] = std::pow(w(rng), 3);
      sw += ws[i];
    }
    double mean = 0, var = 0;
    for (std::size_t i = 0; i < n; ++i) mean += ws[i] / sw * xs[i];
    for (std::size_t i = 0; i < n; ++i) var += ws[i] / sw * (xs[i] - mean) * (xs[i] - mean);
    ParticleSet s = on_x_axis(xs, ws);
    resample(s);
    ASSERT_EQ(s.size(), n);
    double m2 = 0;
    for (const auto& p : s.particles()) m2 += p.pose.x / double(n);
    // systematic resampling is never noisier than multinomial draws
    EXPECT_LE(std::abs(m2 - mean), 3.0 * std::sqrt(var / double(n))) << "trial " << trial;
  }
}

TEST(EstimatePose, Examples) {
  const Pose2D a = estimate_pose(from_poses({Pose2D(1.5, -2, 0.3)}, {1.0}));
  EXPECT_DOUBLE_EQ(a.x, 1.5);
  EXPECT_DOUBLE_EQ(a.y, -2.0);
  EXPECT_NEAR(a.theta(), 0.3, 1e-15);
  const Pose2D b = estimate_pose(from_poses({Pose2D(0, 0, 0), Pose2D(2, 0, 0)}, {0.5, 0.5}));
  EXPECT_DOUBLE_EQ(b.x, 1.0);
  EXPECT_DOUBLE_EQ(b.y, 0.0);
  EXPECT_EQ(b.theta(), 0.0);
  const Pose2D c = estimate_pose(from_poses({Pose2D(0, 0, kPi / 2), Pose2D(0, 0, 0)}, {0.5, 0.5}));
  EXPECT_NEAR(c.theta(), kPi / 4, 1e-15);
  EXPECT_THROW(estimate_pose(from_poses({Pose2D(0, 0, 0), Pose2D(0, 0, kPi)}, {0.5, 0.5})), DegenerateGeometry);
}

TEST(ErrorEllipse, Examples) {
  const ErrorEllipse z = error_ellipse(ParticleSet::at(Pose2D(3, 4, 1), 10, 1));
  EXPECT_EQ(z.sigma_major, 0.0);
  EXPECT_EQ(z.sigma_minor, 0.0);
  EXPECT_EQ(z.orientation, 0.0);

  const ErrorEllipse x = error_ellipse(on_x_axis({-1, 1}, {0.5, 0.5}));
  EXPECT_DOUBLE_EQ(x.sigma_major, 1.0);
  EXPECT_DOUBLE_EQ(x.sigma_minor, 0.0);
  EXPECT_DOUBLE_EQ(x.orientation, 0.0);

  const ErrorEllipse iso = error_ellipse(ParticleSet::gaussian(Pose2D(0, 0, 0), 0.5, 0.1, 5000, 21));
  EXPECT_NEAR(iso.sigma_major, 0.5, 0.03);
  EXPECT_NEAR(iso.sigma_minor / iso.sigma_major, 1.0, 0.1);

  const ErrorEllipse diag = error_ellipse(from_poses({Pose2D(-1, -1, 0), Pose2D(1, 1, 0)}, {0.5, 0.5}));
  EXPECT_NEAR(diag.sigma_major, std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(diag.orientation, kPi / 4, 1e-12);
  EXPECT_GE(diag.sigma_major, diag.sigma_minor);

  EXPECT_THROW(error_ellipse(ParticleSet::at(Pose2D{}, 1, 1)), std::invalid_argument);
}

TEST(LaserYaw, Examples) {
  EXPECT_EQ(laser_yaw(Pose2D(0, 0, 0), {1, 0}), 0.0);
  EXPECT_NEAR(laser_yaw(Pose2D(0, 0, kPi / 2), {1, 1}), kPi / 4, 1e-15);
  EXPECT_NEAR(laser_yaw(Pose2D(0, 0, 0), {0, 1}), -kPi / 2, 1e-15);
  EXPECT_THROW(laser_yaw(Pose2D(2, 3, 0), {2, 3}), DegenerateGeometry);
}

TEST(LaserYaw, InvariantUnderCommonRotation) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-5, 5), a(-kPi, kPi);
  for (int i = 0; i < 20; ++i) {
    const Pose2D r(u(rng), u(rng), a(rng));
    const Point2 t{u(rng), u(rng)};
    const double base = laser_yaw(r, t), d = a(rng);
    const Point2 rel = t - r.position();
    const Point2 rot{r.x + std::cos(d) * rel.x - std::sin(d) * rel.y, r.y + std::sin(d) * rel.x + std::cos(d) * rel.y};
    const double moved = laser_yaw(Pose2D(r.x, r.y, r.theta() + d), rot);
    EXPECT_NEAR(std::remainder(moved - base, kTwoPi), 0.0, 1e-9);
  }
}

TEST(LocalizationRmse, Examples) {
  const std::vector<Pose2D> a = {Pose2D(1, 2, 0), Pose2D(3, 4, 1)};
  EXPECT_EQ(localization_rmse(a, a), 0.0);
  const std::vector<Pose2D> zero = {Pose2D(0, 0, 0), Pose2D(0, 0, 0)}, t = {Pose2D(3, 4, 0), Pose2D(3, 4, 0)};
  EXPECT_DOUBLE_EQ(localization_rmse(zero, t), 5.0);
  const std::vector<Pose2D> e1 = {Pose2D(1, 0, 0)}, t1 = {Pose2D(0, 0, 2)};
  EXPECT_DOUBLE_EQ(localization_rmse(e1, t1), 1.0);
  EXPECT_THROW(localization_rmse(e1, a), std::invalid_argument);
}

TEST(LaserReliability, Examples) {
  const ReliabilityCalibration c{0.02, 0.1};
  EXPECT_EQ(laser_reliability(0.02, c), 1.0);
  EXPECT_EQ(laser_reliability(0.1, c), 0.0);
  EXPECT_NEAR(laser_reliability(0.06, c), 0.5, 1e-12);
  EXPECT_THROW(laser_reliability(0.05, {0.1, 0.1}), CalibrationError);
}

TEST(ParticleFilter, ConvergesFromUniformInit) {
  sim::ScenarioConfig cfg;
  cfg.corridor_length = 6.0;
  cfg.corridor_width = 3.0;
  cfg.lidar.noise_std = 0.0;
  const sim::World w = sim::build_world(cfg);
  const ObservationModel model = ObservationModel::for_resolution(cfg.grid_resolution);
  const MotionCommand cmd{0.3, 0.0, 0.1};
  const MotionNoise noise = cfg.particles.noise;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    ParticleSet pf = ParticleSet::uniform_free(w.grid, 0.0, 0.3, 500, seed);
    std::mt19937_64 lidar_rng(seed + 100);
    Pose2D truth(1.5, 1.2, 0.05);
    double err = 0.0;
    for (int k = 0; k < 30; ++k) {
      if (k > 0) {
        predict(pf, cmd, noise);
        truth = step_kinematics(truth, cmd);
      }
      const Correction c = correct(pf, sim::simulate_lidar(w, truth, lidar_rng), w.field, model);
      err = distance(c.estimate.position(), truth.position());
    }
    EXPECT_LT(err, 2.0 * cfg.grid_resolution) << "seed " << seed;
  }
}
