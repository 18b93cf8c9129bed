#pragma once

// Frame -> visual yaw estimate:
//   adaptive gamma -> Canny -> Hough -> aisle edges -> bird's-eye rectification
//   -> navigation line -> yaw, and in parallel
//   corridor mask -> row widths -> width scatter -> reliability.

#include <optional>
#include <string>
#include <vector>

#include "aislenav/core.hpp"
#include "aislenav/reliability.hpp"
#include "aislenav/vision/birds_eye.hpp"
#include "aislenav/vision/camera.hpp"
#include "aislenav/vision/canny.hpp"
#include "aislenav/vision/corridor_profile.hpp"
#include "aislenav/vision/gamma.hpp"
#include "aislenav/vision/hough.hpp"
#include "aislenav/vision/navigation_line.hpp"

namespace aislenav::vision {

struct VisionConfig {
  CannyParams canny;
  double rho_resolution = 1.0;
  double theta_resolution = deg2rad(1.0);
  double hough_threshold_ratio = 0.25;  // votes, as a fraction of image height
  int hough_suppression_radius = 2;     // bins
  double horizontal_exclusion = deg2rad(10.0);
  bool refine_edges = true;
  double refine_band = 2.0;  // px
  PinholeCamera camera;
  BirdsEyeWindow window;
  NavSide side = NavSide::left;
  int intensity_threshold = 128;
  double min_mask_coverage = 0.5;  // fraction of bird's-eye rows that must hold corridor pixels
  double min_edge_support = 0.5;   // fraction of those rows whose white run meets both edges
  double edge_support_tolerance = 3.0;  // px
  ReliabilityCalibration calibration{0.0, 400.0};

  HoughParams hough_params(int image_height) const {
    HoughParams p = HoughParams::for_image_height(image_height, hough_threshold_ratio);
    p.rho_resolution = rho_resolution;
    p.theta_resolution = theta_resolution;
    p.suppression_radius = hough_suppression_radius;
    return p;
  }

  /// Image quadrilateral of the bird's-eye ground window, ordered so that the
  /// near edge of the window becomes the top row of the output.
  Quad ground_quad() const {
    const Point2 ground[4] = {{window.near, window.half_width},
                              {window.near, -window.half_width},
                              {window.far, -window.half_width},
                              {window.far, window.half_width}};
    Quad q;
    for (int i = 0; i < 4; ++i) {
      const auto px = camera.project_ground(ground[i]);
      if (!px) throw DegenerateGeometry("bird's-eye window is not in front of the camera");
      q[static_cast<std::size_t>(i)] = *px;
    }
    return q;
  }
};

/// Intermediate products, kept for debugging and tests.
struct VisionTrace {
  double gamma = 0.0;
  GrayImage corrected;
  GrayImage edges;
  std::vector<HoughLine> lines;
  std::optional<AisleEdges> image_edges;
  GrayImage birds_eye;
  std::optional<AisleEdges> birds_eye_edges;
  std::optional<LineParam> navigation_line;
  GrayImage mask;
  std::optional<WidthProfile> profile;
  std::string failure;
};

/// Yaw and width scatter of one frame; reliability scoring is left to the caller
/// so a run can calibrate the normalization online.
struct VisualMeasurement {
  double angle = 0.0;
  double width_scatter = 0.0;
};

inline VisualMeasurement measure_visual(const GrayImage& frame, const VisionConfig& cfg, VisionTrace* trace = nullptr) {
  VisionTrace local;
  VisionTrace& tr = trace ? *trace : local;

  tr.gamma = adaptive_gamma(frame);
  tr.corrected = gamma_correct(frame, tr.gamma);
  tr.edges = canny_edges(tr.corrected, cfg.canny);
  tr.lines = hough_lines(tr.edges, cfg.hough_params(frame.height()));

  std::vector<LineParam> candidates;
  candidates.reserve(tr.lines.size());
  for (const auto& l : tr.lines) candidates.push_back(l.line);
  AisleEdges edges = select_aisle_edges(candidates, cfg.horizontal_exclusion);
  if (cfg.refine_edges) {
    edges.left = refine_line(tr.edges, edges.left, cfg.refine_band);
    edges.right = refine_line(tr.edges, edges.right, cfg.refine_band);
  }
  tr.image_edges = edges;

  const Quad quad = cfg.ground_quad();
  const int out_w = cfg.window.out_width(), out_h = cfg.window.out_height();
  const BirdsEyeView bev = birds_eye_transform(tr.corrected, quad, out_w, out_h);
  tr.birds_eye = bev.image;

  const double v_near = 0.5 * (quad[0].y + quad[1].y);
  const double v_far = 0.5 * (quad[2].y + quad[3].y);
  auto to_birds_eye = [&](const LineParam& l) {
    const auto ua = l.u_at(v_near), ub = l.u_at(v_far);
    if (!ua || !ub) throw ExtractionFailure("aisle edge parallel to image rows");
    const auto m = map_line(bev.src_to_out, l, {*ua, v_near}, {*ub, v_far});
    if (!m) throw ExtractionFailure("aisle edge does not map into the bird's-eye view");
    return *m;
  };
  const AisleEdges be{to_birds_eye(edges.left), to_birds_eye(edges.right)};
  tr.birds_eye_edges = be;

  const LineParam nav = build_navigation_line(be.left, be.right, cfg.side, 0.0, out_h - 1.0);
  tr.navigation_line = nav;

  tr.mask = corridor_mask(bev.image, be.left, be.right, cfg.intensity_threshold);
  tr.profile = row_width_profile(tr.mask);
  if (tr.profile->valid_rows < cfg.min_mask_coverage * out_h)
    throw ExtractionFailure("corridor mask covers too few rows");
  if (edge_support(tr.mask, be.left, be.right, cfg.edge_support_tolerance) < cfg.min_edge_support)
    throw ExtractionFailure("aisle edges are not backed by the corridor mask");
  return {line_yaw(nav), width_scatter(*tr.profile)};
}

/// Never throws: any stage failure yields angle 0 with reliability 0.
inline YawEstimate visual_yaw_pipeline(const GrayImage& frame, const VisionConfig& cfg,
                                       VisionTrace* trace = nullptr) {
  try {
    const VisualMeasurement m = measure_visual(frame, cfg, trace);
    return {m.angle, normalized_reliability(m.width_scatter, cfg.calibration), YawSource::vision};
  } catch (const std::exception& e) {
    if (trace) trace->failure = e.what();
    return YawEstimate::failed(YawSource::vision);
  }
}

}  // namespace aislenav::vision
