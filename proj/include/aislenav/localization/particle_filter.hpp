#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "aislenav/core.hpp"
#include "aislenav/localization/likelihood_field.hpp"
#include "aislenav/localization/motion.hpp"
#include "aislenav/reliability.hpp"

namespace aislenav::localization {

struct LidarScan {
  static constexpr double no_return = std::numeric_limits<double>::infinity();

  std::vector<double> angles;  // rad, relative to heading
  std::vector<double> ranges;  // m, or no_return
  double max_range = 0.0;

  std::size_t size() const { return ranges.size(); }
  bool has_return(std::size_t i) const { return std::isfinite(ranges[i]); }

  void validate() const {
    if (angles.size() != ranges.size()) throw std::invalid_argument("LidarScan: angles and ranges differ in length");
    if (!(max_range > 0.0)) throw std::invalid_argument("LidarScan: max_range must be > 0");
    for (double r : ranges)
      if (r != no_return && !(r > 0.0 && r <= max_range))
        throw std::invalid_argument("LidarScan: range outside (0, max_range]");
  }
};

struct Particle {
  Pose2D pose;
  double weight = 1.0;
};

struct ObservationModel {
  double sigma = 0.1;            // m; 2 x grid resolution by default
  double uniform_weight = 0.05;  // mixing weight of the uniform component
  int max_beams = 30;
  // The likelihood is raised to the largest power <= 1 that keeps the effective
  // sample size at or above this fraction of the set. 0 applies it in full.
  double min_ess_ratio = 0.3;

  static ObservationModel for_resolution(double res) { return {2.0 * res, 0.05, 30, 0.3}; }

  void validate() const {
    if (!(sigma > 0.0)) throw std::invalid_argument("ObservationModel: sigma must be > 0");
    if (!(uniform_weight >= 0.0 && uniform_weight <= 1.0))
      throw std::invalid_argument("ObservationModel: uniform_weight must be in [0, 1]");
    if (max_beams < 1) throw std::invalid_argument("ObservationModel: max_beams must be >= 1");
    if (!(min_ess_ratio >= 0.0 && min_ess_ratio <= 1.0))
      throw std::invalid_argument("ObservationModel: min_ess_ratio must be in [0, 1]");
  }
};

struct ErrorEllipse {
  double sigma_major = 0.0;
  double sigma_minor = 0.0;
  double orientation = 0.0;
};

/// Beam indices used for weighting: evenly spaced and symmetric about the
/// middle of the scan, at most `max_beams` of them.
inline std::vector<std::size_t> decimate_beams(std::size_t n, int max_beams) {
  std::vector<std::size_t> out;
  if (n == 0) return out;
  std::size_t k = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, max_beams)));
  if (k < n && k % 2 == 0 && n % 2 == 1) --k;  // keep the centre beam
  if (k == 1) {
    out.push_back(n / 2);
    return out;
  }
  for (std::size_t i = 0; i < k; ++i)
    out.push_back(static_cast<std::size_t>(std::llround(double(i) * double(n - 1) / double(k - 1))));
  return out;
}

class ParticleSet {
 public:
  ParticleSet(std::vector<Particle> particles, std::uint64_t seed) : particles_(std::move(particles)), rng_(seed) {
    if (particles_.empty()) throw std::invalid_argument("ParticleSet: at least one particle required");
  }

  /// Equal-weight particles at one pose.
  static ParticleSet at(const Pose2D& pose, std::size_t n, std::uint64_t seed) {
    return ParticleSet(std::vector<Particle>(n, Particle{pose, 1.0 / double(n)}), seed);
  }

  /// Gaussian cloud around a pose.
  static ParticleSet gaussian(const Pose2D& mean, double sigma_xy, double sigma_theta, std::size_t n,
                              std::uint64_t seed) {
    ParticleSet s = at(mean, n, seed);
    std::normal_distribution<double> g(0.0, 1.0);
    for (auto& p : s.particles_) {
      const double dx = g(s.rng_), dy = g(s.rng_), dt = g(s.rng_);
      p.pose = Pose2D(mean.x + sigma_xy * dx, mean.y + sigma_xy * dy, mean.theta() + sigma_theta * dt);
    }
    return s;
  }

  /// Uniform over the free cells of a grid, headings uniform in
  /// [heading - spread, heading + spread].
  static ParticleSet uniform_free(const OccupancyGrid& grid, double heading, double spread, std::size_t n,
                                  std::uint64_t seed) {
    ParticleSet s = at(Pose2D{}, n, seed);
    const double x0 = grid.origin().x, y0 = grid.origin().y;
    const double x1 = x0 + grid.width() * grid.resolution(), y1 = y0 + grid.height() * grid.resolution();
    std::uniform_real_distribution<double> ux(x0, x1), uy(y0, y1), ut(-spread, spread);
    for (auto& p : s.particles_) {
      Point2 q;
      int guard = 0;
      do {
        q = {ux(s.rng_), uy(s.rng_)};
        if (++guard > 100000) throw std::invalid_argument("uniform_free: grid has no free cells");
      } while (!grid.is_free(q));
      p.pose = Pose2D(q.x, q.y, heading + ut(s.rng_));
    }
    return s;
  }

  std::size_t size() const { return particles_.size(); }
  const std::vector<Particle>& particles() const { return particles_; }
  std::vector<Particle>& particles() { return particles_; }
  std::mt19937_64& rng() { return rng_; }
  bool degenerate() const { return degenerate_; }
  /// Exponent applied to the likelihood by the last weight_update; below 1 the
  /// scan was only partly absorbed.
  double last_tempering() const { return tempering_; }

  double weight_sum() const {
    double s = 0.0;
    for (const auto& p : particles_) s += p.weight;
    return s;
  }

  friend void predict(ParticleSet& set, const MotionCommand& cmd, const MotionNoise& noise);
  friend void weight_update(ParticleSet& set, const LidarScan& scan, const LikelihoodField& field,
                            const ObservationModel& model);
  friend void resample(ParticleSet& set);

 private:
  std::vector<Particle> particles_;
  std::mt19937_64 rng_;
  bool degenerate_ = false;
  double tempering_ = 1.0;
};

inline void predict(ParticleSet& set, const MotionCommand& cmd, const MotionNoise& noise) {
  cmd.validate();
  noise.validate();
  std::normal_distribution<double> g(0.0, 1.0);
  for (auto& p : set.particles_) {
    const double ev = noise.sigma_v * g(set.rng_);
    const double ew = noise.sigma_omega * g(set.rng_);
    const double ex = noise.sigma_xy * g(set.rng_);
    const double ey = noise.sigma_xy * g(set.rng_);
    const double et = noise.sigma_theta * g(set.rng_);
    const Pose2D q = unicycle_step(p.pose, cmd.v + ev, cmd.omega + ew, cmd.dt);
    p.pose = Pose2D(q.x + ex, q.y + ey, q.theta() + et);
  }
}

namespace detail {

/// Normalized weights exp(beta * loglik + logprior) and their effective count.
inline double tempered_weights(const std::vector<double>& loglik, const std::vector<double>& logprior, double beta,
                               std::vector<double>& w) {
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < loglik.size(); ++k)
    if (std::isfinite(logprior[k])) mx = std::max(mx, beta * loglik[k] + logprior[k]);
  double sum = 0.0;
  for (std::size_t k = 0; k < loglik.size(); ++k) {
    w[k] = std::isfinite(logprior[k]) ? std::exp(beta * loglik[k] + logprior[k] - mx) : 0.0;
    sum += w[k];
  }
  double s2 = 0.0;
  for (auto& x : w) {
    x /= sum;
    s2 += x * x;
  }
  return 1.0 / s2;
}

}  // namespace detail

/// Likelihood-field weighting. Weights are combined in log space; if every
/// particle underflows anyway the set falls back to uniform weights and
/// `degenerate()` reports it until the next update. When the full likelihood
/// would leave fewer than `min_ess_ratio * N` effective particles it is
/// tempered (raised to a power found by bisection) so the rest of the
/// information arrives with later scans.
inline void weight_update(ParticleSet& set, const LidarScan& scan, const LikelihoodField& field,
                          const ObservationModel& model) {
  scan.validate();
  model.validate();
  if (scan.size() == 0) throw std::invalid_argument("weight_update: empty scan");
  const auto beams = decimate_beams(scan.size(), model.max_beams);
  const double norm_g = 1.0 / (std::sqrt(2.0 * kPi) * model.sigma);
  const double uni = model.uniform_weight / scan.max_range;
  const double w_hit = 1.0 - model.uniform_weight;
  const double inv2s2 = 1.0 / (2.0 * model.sigma * model.sigma);
  constexpr double neg_inf = -std::numeric_limits<double>::infinity();

  const std::size_t n = set.particles_.size();
  std::vector<double> loglik(n), logprior(n);
  bool any = false;
  for (std::size_t k = 0; k < n; ++k) {
    const Pose2D& pose = set.particles_[k].pose;
    const double c = std::cos(pose.theta()), s = std::sin(pose.theta());
    double lw = 0.0;
    for (std::size_t i : beams) {
      if (!scan.has_return(i)) continue;
      const double a = scan.angles[i], r = scan.ranges[i];
      const double bx = r * std::cos(a), by = r * std::sin(a);
      const Point2 end{pose.x + c * bx - s * by, pose.y + s * bx + c * by};
      const double d = field.distance(end);
      lw += std::log(w_hit * norm_g * std::exp(-d * d * inv2s2) + uni);
    }
    const double prior = set.particles_[k].weight;
    loglik[k] = lw;
    logprior[k] = prior > 0.0 ? std::log(prior) : neg_inf;
    any = any || (std::isfinite(lw) && std::isfinite(logprior[k]));
  }

  if (!any) {
    const double u = 1.0 / double(n);
    for (auto& p : set.particles_) p.weight = u;
    set.degenerate_ = true;
    set.tempering_ = 1.0;
    return;
  }
  // particles with zero likelihood keep zero weight at any positive power
  for (std::size_t k = 0; k < n; ++k)
    if (!std::isfinite(loglik[k])) logprior[k] = neg_inf;

  std::vector<double> w(n);
  double beta = 1.0;
  const double floor = model.min_ess_ratio * double(n);
  if (detail::tempered_weights(loglik, logprior, 1.0, w) < floor) {
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 40; ++it) {
      const double mid = 0.5 * (lo + hi);
      (detail::tempered_weights(loglik, logprior, mid, w) >= floor ? lo : hi) = mid;
    }
    beta = lo;
    detail::tempered_weights(loglik, logprior, beta, w);
  }
  for (std::size_t k = 0; k < n; ++k) set.particles_[k].weight = w[k];
  set.degenerate_ = false;
  set.tempering_ = beta;
}

inline double effective_count(const ParticleSet& set) {
  double s2 = 0.0;
  for (const auto& p : set.particles()) s2 += p.weight * p.weight;
  if (!(s2 > 0.0)) throw std::invalid_argument("effective_count: all weights are zero");
  return 1.0 / s2;
}

/// Low-variance systematic resampling with a single uniform draw.
inline void resample(ParticleSet& set) {
  const double total = set.weight_sum();
  if (!(total > 0.0)) throw std::invalid_argument("resample: all weights are zero");
  const std::size_t n = set.particles_.size();
  std::uniform_real_distribution<double> u(0.0, 1.0 / double(n));
  const double r = u(set.rng_);
  std::vector<Particle> out;
  out.reserve(n);
  std::size_t i = 0;
  double c = set.particles_[0].weight / total;
  for (std::size_t m = 0; m < n; ++m) {
    const double pos = r + double(m) / double(n);
    while (pos > c && i + 1 < n) c += set.particles_[++i].weight / total;
    out.push_back({set.particles_[i].pose, 1.0 / double(n)});
  }
  set.particles_ = std::move(out);
}

/// Gaussian jitter with per-axis standard deviation `bandwidth` times the
/// weighted spread of the set (regularized resampling). Keeps a resampled
/// population from collapsing onto a few duplicated hypotheses.
inline void roughen(ParticleSet& set, double bandwidth) {
  if (!(bandwidth >= 0.0)) throw std::invalid_argument("roughen: bandwidth must be >= 0");
  // moments of the offsets from the first particle, so identical particles stay put
  const Pose2D ref = set.particles().front().pose;
  auto offset = [&](const Pose2D& p) {
    return std::array<double, 3>{p.x - ref.x, p.y - ref.y, normalize_angle(p.theta() - ref.theta())};
  };
  double sw = 0.0;
  std::array<double, 3> mean{}, var{};
  for (const auto& p : set.particles()) {
    const auto o = offset(p.pose);
    sw += p.weight;
    for (std::size_t i = 0; i < 3; ++i) mean[i] += p.weight * o[i];
  }
  if (!(sw > 0.0)) throw std::invalid_argument("roughen: all weights are zero");
  for (auto& m : mean) m /= sw;
  for (const auto& p : set.particles()) {
    const auto o = offset(p.pose);
    for (std::size_t i = 0; i < 3; ++i) var[i] += p.weight * (o[i] - mean[i]) * (o[i] - mean[i]);
  }
  std::array<double, 3> k{};
  for (std::size_t i = 0; i < 3; ++i) k[i] = bandwidth * std::sqrt(var[i] / sw);
  std::normal_distribution<double> g(0.0, 1.0);
  for (auto& p : set.particles()) {
    const double ex = g(set.rng()), ey = g(set.rng()), et = g(set.rng());
    p.pose = Pose2D(p.pose.x + k[0] * ex, p.pose.y + k[1] * ey, p.pose.theta() + k[2] * et);
  }
}

/// Optimal Gaussian kernel bandwidth factor for n samples in 3 dimensions.
inline double default_roughening(std::size_t n) {
  constexpr double d = 3.0;
  return std::pow(4.0 / (d + 2.0), 1.0 / (d + 4.0)) * std::pow(double(n), -1.0 / (d + 4.0));
}

inline Pose2D estimate_pose(const ParticleSet& set) {
  double sw = 0.0, x = 0.0, y = 0.0, sc = 0.0, ss = 0.0;
  for (const auto& p : set.particles()) {
    sw += p.weight;
    x += p.weight * p.pose.x;
    y += p.weight * p.pose.y;
    sc += p.weight * std::cos(p.pose.theta());
    ss += p.weight * std::sin(p.pose.theta());
  }
  if (!(sw > 0.0)) throw std::invalid_argument("estimate_pose: all weights are zero");
  if (std::hypot(sc, ss) < 1e-12 * sw) throw DegenerateGeometry("estimate_pose: heading is indeterminate");
  return Pose2D(x / sw, y / sw, std::atan2(ss, sc));
}

inline ErrorEllipse error_ellipse(const ParticleSet& set) {
  if (set.size() < 2) throw std::invalid_argument("error_ellipse: need at least two particles");
  // moments about the first particle, so identical particles give exactly zero
  const Point2 ref = set.particles().front().pose.position();
  double sw = 0.0, mx = 0.0, my = 0.0;
  for (const auto& p : set.particles()) {
    sw += p.weight;
    mx += p.weight * (p.pose.x - ref.x);
    my += p.weight * (p.pose.y - ref.y);
  }
  if (!(sw > 0.0)) throw std::invalid_argument("error_ellipse: all weights are zero");
  mx /= sw;
  my /= sw;
  double a = 0.0, b = 0.0, c = 0.0;
  for (const auto& p : set.particles()) {
    const double dx = p.pose.x - ref.x - mx, dy = p.pose.y - ref.y - my;
    a += p.weight * dx * dx;
    b += p.weight * dx * dy;
    c += p.weight * dy * dy;
  }
  a /= sw;
  b /= sw;
  c /= sw;
  const double mean = 0.5 * (a + c);
  const double rad = std::hypot(0.5 * (a - c), b);
  ErrorEllipse e;
  e.sigma_major = std::sqrt(std::max(0.0, mean + rad));
  e.sigma_minor = std::sqrt(std::max(0.0, mean - rad));
  e.orientation = rad > 0.0 ? 0.5 * std::atan2(2.0 * b, a - c) : 0.0;
  return e;
}

struct Correction {
  Pose2D estimate;
  ErrorEllipse ellipse;
  bool resampled = false;
};

/// Measurement step of the filter: weight against the scan, read off the
/// estimate and its ellipse, then resample when the effective count falls
/// below `resample_ratio * N`. A tempered update is followed by roughening.
inline Correction correct(ParticleSet& set, const LidarScan& scan, const LikelihoodField& field,
                          const ObservationModel& model, double resample_ratio = 0.5) {
  weight_update(set, scan, field, model);
  Correction c{estimate_pose(set), set.size() > 1 ? error_ellipse(set) : ErrorEllipse{}, false};
  if (effective_count(set) < resample_ratio * double(set.size())) {
    resample(set);
    if (set.last_tempering() < 1.0) roughen(set, default_roughening(set.size()));
    c.resampled = true;
  }
  return c;
}

/// Yaw of the heading relative to the bearing of the local target.
inline double laser_yaw(const Pose2D& robot, Point2 target) {
  const double dx = target.x - robot.x, dy = target.y - robot.y;
  if (dx == 0.0 && dy == 0.0) throw DegenerateGeometry("laser_yaw: target coincides with the robot");
  return normalize_angle(robot.theta() - std::atan2(dy, dx));
}

inline double localization_rmse(std::span<const Pose2D> estimates, std::span<const Pose2D> truths) {
  if (estimates.size() != truths.size()) throw std::invalid_argument("localization_rmse: length mismatch");
  if (estimates.empty()) throw std::invalid_argument("localization_rmse: empty sequences");
  double s = 0.0;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    const double dx = estimates[i].x - truths[i].x, dy = estimates[i].y - truths[i].y;
    s += dx * dx + dy * dy;
  }
  return std::sqrt(s / double(estimates.size()));
}

inline double laser_reliability(double stat, const ReliabilityCalibration& calib) {
  return normalized_reliability(stat, calib);
}

}  // namespace aislenav::localization
