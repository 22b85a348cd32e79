#pragma once

#include <optional>
#include <string>
#include <vector>

#include "skill/tactile.hpp"

namespace skill::tactile {

enum class Shape {
  rect_line,
  acute_angle,
  right_angle,
  circle,
  pentagon,
  line_bundle
};

std::string to_string(Shape s);
Shape shape_from_string(const std::string& s);
const std::vector<Shape>& all_shapes();

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

using Polyline = std::vector<Point2>;

/// Sinusoidal stripe texture rendered inside the contact region
/// ("moderate gradient strength" relative to the contour ridges).
struct StripeSpec {
  double period = 12.0;     // pixels
  double amplitude = 72.0;  // intensity half-swing
  double angle = 0.26;      // radians, stripe direction
};

struct ShapePose {
  double cx = 160.0;
  double cy = 120.0;
  double angle = 0.0;  // radians, counterclockwise in image coords
};

struct SynthConfig {
  int width = 320;
  int height = 240;
  double background = 75.0;
  double ridge_amplitude = 170.0;  // contour ridge peak intensity
  double ridge_sigma = 1.0;        // ridge cross-section, pixels
  double texture_band = 26.0;      // contact half-width for open shapes
  double noise_sigma = 0.4;
  uint64_t seed = 1;
  bool allow_partial = false;  // clip the truth at the frame (edge contact)
};

struct SynthResult {
  TactileImage image;
  std::vector<Polyline> truth;  // analytic contour, clipped when allowed
};

/// Renders Gaussian-profile ridges along the shape contour, optional stripe
/// texture inside the contact region, and additive Gaussian noise. Returns
/// the exact analytic contour. Throws shape-out-of-bounds.
SynthResult synth_tactile_image(Shape shape, const ShapePose& pose,
                                const std::optional<StripeSpec>& texture,
                                const SynthConfig& config);

/// RMSE over extracted points of the distance to the nearest ground-truth
/// point (truth rasterized at sub-pixel density). Throws empty-input.
double contour_rmse(const ContourSet& contours,
                    const std::vector<Polyline>& truth);

struct BenchRow {
  std::string shape;
  std::string condition;  // "general" | "edge"
  std::string method;     // "adaptive" | "fixed"
  double rmse = 0.0;      // mean over seeds
};

/// Table II-style benchmark on the synthetic textured corpus: per shape and
/// condition, mean RMSE of the adaptive pipeline vs the fixed-threshold
/// baseline over `seeds_per_shape` noise seeds.
std::vector<BenchRow> tactile_benchmark(int seeds_per_shape,
                                        const PerceptionConfig& perception,
                                        const SynthConfig& base,
                                        bool include_edge, uint64_t seed);

std::string benchmark_csv(const std::vector<BenchRow>& rows);

}  // namespace skill::tactile
