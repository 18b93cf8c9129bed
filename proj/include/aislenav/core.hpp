#pragma once

// Shared geometry, angle arithmetic, raster and occupancy-grid types.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace aislenav {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// A processing stage could not extract what it needs from its input
/// (no aisle edges, too few valid rows, ...). Callers usually convert this
/// into a zero-reliability estimate.
class ExtractionFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reliability normalization cannot be formed (empty or inverted range).
class CalibrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input geometry is degenerate: collinear corners, singular matrices,
/// coincident points, points at infinity.
class DegenerateGeometry : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Angles
// ---------------------------------------------------------------------------

/// Wraps an angle into (-pi, pi]. Throws std::invalid_argument on NaN/inf.
inline double normalize_angle(double a) {
  if (!std::isfinite(a)) throw std::invalid_argument("normalize_angle: non-finite angle");
  double r = std::fmod(a, kTwoPi);  // (-2pi, 2pi)
  if (r > kPi) r -= kTwoPi;
  if (r <= -kPi) r += kTwoPi;
  return r;
}

/// Tag for a line whose slope is unbounded (parallel to the image v axis).
struct VerticalLine {};

/// Yaw deviation of a navigation line with slope k in image (u, v) coordinates:
/// pi/2 - atan(k), folded into (-pi/2, pi/2].
inline double line_angle_from_slope(double k) {
  double a = kPi / 2.0 - std::atan(k);  // (0, pi)
  if (a > kPi / 2.0) a -= kPi;
  return a;
}

inline double line_angle_from_slope(VerticalLine) { return 0.0; }

// ---------------------------------------------------------------------------
// Planar geometry
// ---------------------------------------------------------------------------

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }
  friend bool operator==(const Point2&, const Point2&) = default;
};

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 p) { return std::hypot(p.x, p.y); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }

/// Planar pose. The heading is kept in (-pi, pi] by every constructor and setter.
class Pose2D {
 public:
  Pose2D() = default;
  Pose2D(double x, double y, double theta) : x(x), y(y), theta_(normalize_angle(theta)) {}

  double x = 0.0;
  double y = 0.0;

  double theta() const { return theta_; }
  void set_theta(double t) { theta_ = normalize_angle(t); }
  Point2 position() const { return {x, y}; }

  friend bool operator==(const Pose2D&, const Pose2D&) = default;

 private:
  double theta_ = 0.0;
};

/// Undirected straight line in normal form: u*cos(theta) + v*sin(theta) = rho,
/// with theta in [0, pi). rho may be negative.
class LineParam {
 public:
  LineParam() = default;
  LineParam(double rho, double theta) { assign(rho, theta); }

  static LineParam through(Point2 a, Point2 b) {
    const Point2 d = b - a;
    const double len = norm(d);
    if (!(len > 0.0)) throw DegenerateGeometry("LineParam::through: coincident points");
    const Point2 n{-d.y / len, d.x / len};
    return LineParam(dot(n, a), std::atan2(n.y, n.x));
  }

  double rho() const { return rho_; }
  double theta() const { return theta_; }
  Point2 normal() const { return {std::cos(theta_), std::sin(theta_)}; }
  Point2 direction() const { return {-std::sin(theta_), std::cos(theta_)}; }
  Point2 foot() const { return rho_ * normal(); }

  /// dv/du = -cos(theta)/sin(theta); nullopt when the line is parallel to v.
  std::optional<double> slope() const {
    const double s = std::sin(theta_);
    if (s == 0.0) return std::nullopt;
    return -std::cos(theta_) / s;
  }

  /// Signed distance of p from the line, positive on the normal side.
  double signed_distance(Point2 p) const { return dot(normal(), p) - rho_; }

  /// u coordinate where the line crosses row v; nullopt for lines parallel to u.
  std::optional<double> u_at(double v) const {
    const double c = std::cos(theta_);
    if (std::abs(c) < 1e-12) return std::nullopt;
    return (rho_ - v * std::sin(theta_)) / c;
  }

  std::optional<double> v_at(double u) const {
    const double s = std::sin(theta_);
    if (std::abs(s) < 1e-12) return std::nullopt;
    return (rho_ - u * std::cos(theta_)) / s;
  }

  /// Two points one unit either side of the foot point.
  std::pair<Point2, Point2> two_points() const {
    const Point2 f = foot();
    const Point2 d = direction();
    return {f - d, f + d};
  }

  std::optional<Point2> intersect(const LineParam& o) const {
    const Point2 n1 = normal(), n2 = o.normal();
    const double det = cross(n1, n2);
    if (std::abs(det) < 1e-12) return std::nullopt;
    return Point2{(rho_ * n2.y - o.rho_ * n1.y) / det, (n1.x * o.rho_ - n2.x * rho_) / det};
  }

  friend bool operator==(const LineParam&, const LineParam&) = default;

 private:
  void assign(double rho, double theta) {
    if (!std::isfinite(rho) || !std::isfinite(theta))
      throw std::invalid_argument("LineParam: non-finite parameters");
    double t = std::fmod(theta, kTwoPi);
    if (t < 0.0) t += kTwoPi;
    if (t >= kPi) {
      t -= kPi;
      rho = -rho;
    }
    if (t >= kPi) t = 0.0;  // fmod rounding at exactly 2pi
    rho_ = rho;
    theta_ = t;
  }

  double rho_ = 0.0;
  double theta_ = 0.0;
};

// ---------------------------------------------------------------------------
// Yaw estimates
// ---------------------------------------------------------------------------

enum class YawSource { vision, laser };

inline const char* to_string(YawSource s) { return s == YawSource::vision ? "vision" : "laser"; }

/// A yaw deviation with the producing sensor's confidence in [0, 1].
/// Positive yaw means the heading is counterclockwise of the desired direction.
struct YawEstimate {
  double angle = 0.0;
  double reliability = 0.0;
  YawSource source = YawSource::vision;

  static YawEstimate failed(YawSource s) { return {0.0, 0.0, s}; }
};

// ---------------------------------------------------------------------------
// Rasters
// ---------------------------------------------------------------------------

/// 8-bit single-channel image, row-major, origin top-left, u right, v down.
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(int width, int height, std::uint8_t fill = 0) : width_(width), height_(height) {
    if (width < 1 || height < 1) throw std::invalid_argument("GrayImage: dimensions must be >= 1");
    data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  }
  GrayImage(int width, int height, std::vector<std::uint8_t> data)
      : width_(width), height_(height), data_(std::move(data)) {
    if (width < 1 || height < 1) throw std::invalid_argument("GrayImage: dimensions must be >= 1");
    if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
      throw std::invalid_argument("GrayImage: data length != width * height");
  }

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return data_.empty(); }

  std::uint8_t& at(int u, int v) { return data_[index(u, v)]; }
  std::uint8_t at(int u, int v) const { return data_[index(u, v)]; }
  bool contains(int u, int v) const { return u >= 0 && v >= 0 && u < width_ && v < height_; }

  std::span<const std::uint8_t> pixels() const { return data_; }
  std::span<std::uint8_t> pixels() { return data_; }
  std::span<const std::uint8_t> row(int v) const {
    return std::span<const std::uint8_t>(data_).subspan(index(0, v), static_cast<std::size_t>(width_));
  }

  double mean() const {
    if (data_.empty()) throw std::invalid_argument("GrayImage::mean: empty image");
    std::uint64_t sum = 0;
    for (auto p : data_) sum += p;
    return static_cast<double>(sum) / static_cast<double>(data_.size());
  }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;

 private:
  std::size_t index(int u, int v) const {
    return static_cast<std::size_t>(v) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(u);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

// ---------------------------------------------------------------------------
// Occupancy grid
// ---------------------------------------------------------------------------

struct CellIndex {
  int col = 0;
  int row = 0;
};

/// Binary occupancy grid. Cell (col, row) covers
/// [origin.x + col*res, origin.x + (col+1)*res) x [origin.y + row*res, ...).
class OccupancyGrid {
 public:
  OccupancyGrid() = default;
  OccupancyGrid(double resolution, Point2 origin, int width, int height)
      : resolution_(resolution), origin_(origin), width_(width), height_(height) {
    if (!(resolution > 0.0)) throw std::invalid_argument("OccupancyGrid: resolution must be > 0");
    if (width < 1 || height < 1) throw std::invalid_argument("OccupancyGrid: dimensions must be >= 1");
    cells_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0);
  }

  double resolution() const { return resolution_; }
  Point2 origin() const { return origin_; }
  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return cells_.empty(); }

  bool in_bounds(int col, int row) const { return col >= 0 && row >= 0 && col < width_ && row < height_; }
  bool occupied(int col, int row) const { return cells_[index(col, row)] != 0; }
  void set_occupied(int col, int row, bool occ = true) { cells_[index(col, row)] = occ ? 1 : 0; }

  CellIndex cell_of(Point2 p) const {
    return {static_cast<int>(std::floor((p.x - origin_.x) / resolution_)),
            static_cast<int>(std::floor((p.y - origin_.y) / resolution_))};
  }
  Point2 cell_center(int col, int row) const {
    return {origin_.x + (col + 0.5) * resolution_, origin_.y + (row + 0.5) * resolution_};
  }

  /// Points outside the grid count as occupied.
  bool is_free(Point2 p) const {
    const auto c = cell_of(p);
    return in_bounds(c.col, c.row) && !occupied(c.col, c.row);
  }

  std::size_t occupied_count() const {
    return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), std::uint8_t{1}));
  }

 private:
  std::size_t index(int col, int row) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(col);
  }

  double resolution_ = 1.0;
  Point2 origin_{};
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> cells_;
};

}  // namespace aislenav
