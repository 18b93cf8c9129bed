#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "aislenav/core.hpp"

namespace aislenav::vision {

enum class NavSide { left, right };

inline NavSide parse_nav_side(const std::string& s) {
  if (s == "left") return NavSide::left;
  if (s == "right") return NavSide::right;
  throw std::invalid_argument("side must be 'left' or 'right', got '" + s + "'");
}

inline const char* to_string(NavSide s) { return s == NavSide::left ? "left" : "right"; }

/// The two corridor boundaries in an image with v pointing down.
/// The left boundary rises toward the vanishing point as u grows, so it carries
/// the minimum slope; the right boundary carries the maximum.
struct AisleEdges {
  LineParam left;
  LineParam right;
};

/// Picks the extreme-slope pair after discarding lines within `exclusion_band`
/// of horizontal. Ordering is done on theta, which is monotone in slope on
/// (0, pi) and stays bounded for near-vertical lines.
inline AisleEdges select_aisle_edges(std::span<const LineParam> lines, double exclusion_band = deg2rad(10.0)) {
  const LineParam* lo = nullptr;
  const LineParam* hi = nullptr;
  std::size_t candidates = 0;
  for (const auto& l : lines) {
    if (std::abs(l.theta() - kPi / 2.0) < exclusion_band) continue;
    ++candidates;
    if (!lo || l.theta() < lo->theta()) lo = &l;
    if (!hi || l.theta() > hi->theta()) hi = &l;
  }
  if (candidates < 2 || lo == hi)
    throw ExtractionFailure("select_aisle_edges: fewer than two non-horizontal lines");
  return {*lo, *hi};
}

/// Line placed one third of the corridor width in from the chosen edge,
/// sampled at rows v0 and v1.
inline LineParam build_navigation_line(const LineParam& left, const LineParam& right, NavSide side, double v0,
                                       double v1) {
  if (left == right) throw DegenerateGeometry("build_navigation_line: coincident edges");
  if (v0 == v1) throw std::invalid_argument("build_navigation_line: reference rows must differ");
  Point2 pts[2];
  const double rows[2] = {v0, v1};
  for (int i = 0; i < 2; ++i) {
    const auto ul = left.u_at(rows[i]);
    const auto ur = right.u_at(rows[i]);
    if (!ul || !ur) throw DegenerateGeometry("build_navigation_line: edge parallel to the reference row");
    const double w = *ur - *ul;
    if (!(w > 0.0)) throw DegenerateGeometry("build_navigation_line: non-positive corridor width at reference row");
    const double u = side == NavSide::left ? *ul + w / 3.0 : *ur - w / 3.0;
    pts[i] = {u, rows[i]};
  }
  return LineParam::through(pts[0], pts[1]);
}

/// Yaw read off a line in image coordinates.
inline double line_yaw(const LineParam& line) {
  const auto k = line.slope();
  return k ? line_angle_from_slope(*k) : line_angle_from_slope(VerticalLine{});
}

}  // namespace aislenav::vision
