#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "aislenav/core.hpp"
#include "aislenav/eval/homography.hpp"
#include "aislenav/fusion/fusion.hpp"
#include "aislenav/localization/particle_filter.hpp"
#include "aislenav/reliability.hpp"
#include "aislenav/simworld/world.hpp"
#include "aislenav/vision/pipeline.hpp"

namespace aislenav::sim {

struct TrajectoryRow {
  double time = 0.0;
  Pose2D truth;
  Pose2D estimate;
  double phi_vision = 0.0;
  double r_vision = 0.0;
  double phi_laser = 0.0;
  double r_laser = 0.0;
  double phi_fusion = 0.0;  // NaN when neither sensor had any weight
  double vision_stat = std::numeric_limits<double>::quiet_NaN();  // width scatter, px^2
  double laser_stat = std::numeric_limits<double>::quiet_NaN();   // error-ellipse major axis, m
  MotionCommand command;
  std::optional<Point2> tracker;
};

struct TrajectoryRecord {
  NavMode mode = NavMode::fused;
  std::vector<TrajectoryRow> rows;
  bool reached_goal = false;
  bool collided = false;  // the robot reached a wall and the run was cut short

  std::vector<Point2> true_positions() const {
    std::vector<Point2> p;
    p.reserve(rows.size());
    for (const auto& r : rows) p.push_back(r.truth.position());
    return p;
  }
};

/// Independent, reproducible generator streams for each noise source.
struct RunStreams {
  std::mt19937_64 lidar, camera, particles;

  explicit RunStreams(std::uint64_t seed)
      : lidar(stream(seed, 1)), camera(stream(seed, 2)), particles(stream(seed, 3)) {}

  static std::mt19937_64 stream(std::uint64_t seed, std::uint32_t id) {
    std::seed_seq s{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), id};
    return std::mt19937_64(s);
  }
  std::uint64_t particle_seed() { return particles(); }
};

/// Camera rays are fixed in the robot frame, so their ground hits are
/// precomputed once per run.
class GroundRaster {
 public:
  explicit GroundRaster(const World& w) : w_(&w) {
    const auto& cam = w.cfg.vision.camera;
    ss_ = w.cfg.render.supersample;
    hits_.reserve(static_cast<std::size_t>(cam.width) * cam.height * ss_ * ss_);
    for (int v = 0; v < cam.height; ++v)
      for (int u = 0; u < cam.width; ++u)
        for (int j = 0; j < ss_; ++j)
          for (int i = 0; i < ss_; ++i)
            hits_.push_back(cam.ground_of_pixel(u - 0.5 + (i + 0.5) / ss_, v - 0.5 + (j + 0.5) / ss_));
  }

  GrayImage render(const Pose2D& pose, std::mt19937_64* noise_rng) const {
    const World& w = *w_;
    if (!w.in_free_space(pose.position())) throw std::invalid_argument("render_camera: pose outside free space");
    const auto& cam = w.cfg.vision.camera;
    const RenderConfig& rc = w.cfg.render;
    const double c = std::cos(pose.theta()), s = std::sin(pose.theta());
    GrayImage img(cam.width, cam.height);
    std::normal_distribution<double> g(0.0, rc.noise_std > 0 ? rc.noise_std : 1.0);
    std::size_t k = 0;
    const int n = ss_ * ss_;
    for (int v = 0; v < cam.height; ++v)
      for (int u = 0; u < cam.width; ++u) {
        double acc = 0.0;
        for (int q = 0; q < n; ++q, ++k) {
          const auto& gr = hits_[k];
          if (!gr) {
            acc += rc.wall_intensity * rc.min_brightness;
            continue;
          }
          const Point2 p{pose.x + c * gr->x - s * gr->y, pose.y + s * gr->x + c * gr->y};
          acc += shade_ground(w, p, norm(*gr));
        }
        double I = acc / n;
        if (noise_rng && rc.noise_std > 0) I += g(*noise_rng);
        img.at(u, v) = static_cast<std::uint8_t>(std::clamp(std::lround(I), 0L, 255L));
      }
    return img;
  }

 private:
  const World* w_;
  int ss_ = 1;
  std::vector<std::optional<Point2>> hits_;
};

/// Called once per step with the rendered frame and the vision intermediates.
using FrameObserver = std::function<void(int step, const GrayImage& frame, const vision::VisionTrace& trace)>;

inline TrajectoryRecord run_scenario(const ScenarioConfig& cfg, const FrameObserver& observer = {}) {
  const World world = build_world(cfg);
  const double res = cfg.grid_resolution;
  RunStreams streams(cfg.seed);
  const GroundRaster raster(world);

  vision::VisionConfig vcfg = cfg.vision;
  vcfg.side = cfg.side;
  ReliabilityCalibrator vision_cal(cfg.calibration_window, cfg.vision_calibration);
  ReliabilityCalibrator laser_cal(cfg.calibration_window, cfg.laser_calibration);

  localization::ObservationModel model = cfg.particles.model;
  if (!cfg.particles.model_sigma_set) model.sigma = 2.0 * res;
  localization::ParticleSet pf = localization::ParticleSet::gaussian(
      world.start, cfg.particles.init_spread_xy, cfg.particles.init_spread_theta,
      static_cast<std::size_t>(cfg.particles.count), streams.particle_seed());

  std::optional<eval::CameraModel> tracker;
  if (cfg.tracker) {
    Eigen::Matrix3d K, R;
    for (int i = 0; i < 9; ++i) {
      K(i / 3, i % 3) = cfg.tracker->K[static_cast<std::size_t>(i)];
      R(i / 3, i % 3) = cfg.tracker->R[static_cast<std::size_t>(i)];
    }
    const Eigen::Vector3d t(cfg.tracker->t[0], cfg.tracker->t[1], cfg.tracker->t[2]);
    try {
      tracker = eval::CameraModel::make(K, R, t);
    } catch (const DegenerateGeometry& e) {
      throw ConfigError("tracker", e.what());
    }
  }

  TrajectoryRecord rec;
  rec.mode = cfg.mode;
  rec.rows.reserve(static_cast<std::size_t>(cfg.duration) + 1);
  Pose2D truth = world.start;
  MotionCommand last{0.0, 0.0, cfg.dt};

  for (int k = 0; k <= cfg.duration; ++k) {
    TrajectoryRow row;
    row.time = k * cfg.dt;
    row.truth = truth;

    // vision
    const GrayImage frame = raster.render(truth, &streams.camera);
    YawEstimate ev = YawEstimate::failed(YawSource::vision);
    vision::VisionTrace trace;
    try {
      const auto m = vision::measure_visual(frame, vcfg, observer ? &trace : nullptr);
      ev.angle = m.angle;
      row.vision_stat = m.width_scatter;
      ev.reliability = vision_cal.score(m.width_scatter);
    } catch (const std::exception& e) {
      trace.failure = e.what();
    }
    if (observer) observer(k, frame, trace);

    // laser
    const auto scan = simulate_lidar(world, truth, streams.lidar);
    if (k > 0) localization::predict(pf, last, cfg.particles.noise);
    const auto corr = localization::correct(pf, scan, world.field, model, cfg.particles.resample_ratio);
    const auto& ellipse = corr.ellipse;
    const Pose2D est = corr.estimate;
    YawEstimate el = YawEstimate::failed(YawSource::laser);
    try {
      const Point2 target = fusion::local_target(world.path, est, cfg.gains.lookahead);
      el.angle = localization::laser_yaw(est, target);
      row.laser_stat = ellipse.sigma_major;
      el.reliability = laser_cal.score(ellipse.sigma_major);
    } catch (const std::exception&) {
    }
    row.estimate = est;
    row.phi_vision = ev.angle;
    row.r_vision = ev.reliability;
    row.phi_laser = el.angle;
    row.r_laser = el.reliability;

    // ablation: a single-sensor run trusts its sensor unconditionally
    YawEstimate fv = ev, fl = el;
    if (cfg.mode == NavMode::vision) {
      fv.reliability = 1.0;
      fl.reliability = 0.0;
    } else if (cfg.mode == NavMode::laser) {
      fv.reliability = 0.0;
      fl.reliability = 1.0;
    }

    const bool at_goal = world.path.project(est.position()) >= world.path.length() - cfg.goal_tolerance;
    const bool last_row = k == cfg.duration || at_goal;
    MotionCommand cmd{0.0, 0.0, cfg.dt};
    try {
      row.phi_fusion = fusion::fuse_yaw(fv, fl);
      if (!last_row) cmd = fusion::steering_command(row.phi_fusion, cfg.gains, false, cfg.dt);
    } catch (const fusion::NoEstimate&) {
      row.phi_fusion = std::numeric_limits<double>::quiet_NaN();
    }
    row.command = cmd;

    if (tracker) {
      std::array<Point2, 4> px;
      const auto corners = eval::marker_corners(truth, cfg.tracker->marker_size);
      for (std::size_t i = 0; i < 4; ++i) px[i] = eval::ground_to_pixel(tracker->H, corners[i]);
      row.tracker = eval::marker_pose_from_corners(tracker->H, px).position();
    }

    rec.rows.push_back(row);
    if (at_goal) rec.reached_goal = true;
    if (last_row) break;
    const Pose2D next = step_kinematics(truth, cmd);
    if (!world.in_free_space(next.position())) {
      rec.collided = true;
      break;
    }
    truth = next;
    last = cmd;
  }
  return rec;
}

}  // namespace aislenav::sim
