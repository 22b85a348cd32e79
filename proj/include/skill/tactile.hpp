#pragma once

#include <vector>

#include <json.hpp>

#include "skill/geometry.hpp"
#include "skill/image.hpp"

namespace skill::tactile {

using Json = nlohmann::json;

/// Per-pixel gradient magnitude and direction of a smoothed frame.
/// magnitude = sqrt((S[x+1,y]-S[x-1,y])^2 + (S[x,y+1]-S[x,y-1])^2),
/// direction = atan2 of the same differences, in (-pi, pi]. Border pixels
/// get magnitude 0.
struct GradientField {
  int width = 0;
  int height = 0;
  std::vector<double> magnitude;
  std::vector<double> direction;

  size_t index(int x, int y) const {
    return static_cast<size_t>(y) * width + x;
  }
};

struct PerceptionConfig {
  int kernel_size = 5;
  double sigma = 1.0;
  bool adaptive = true;    // texture-adaptive hysteresis thresholds
  double k_high = 2.0;     // T_high = k_high * T_texture
  double k_low = 1.0;      // T_low = k_low * T_texture
  // Frames whose texture threshold does not exceed this carry no texture
  // signal (sensor noise floor, measured on no-contact frames) and yield
  // an empty contour set under the adaptive thresholds.
  double noise_floor = 2.0;
  double fixed_high = 60.0;  // non-adaptive baseline
  double fixed_low = 30.0;
  double rho_resolution = 1.0;          // pixels
  double theta_resolution = M_PI / 180.0;  // radians
  int min_votes = 30;
  int max_lines = 8;
};

struct PixelPoint {
  int x = 0;
  int y = 0;

  auto operator<=>(const PixelPoint&) const = default;
};

struct ContourSet {
  std::vector<PixelPoint> points;  // sorted (y, x)
  double t_texture = 0.0;
  double t_high = 0.0;
  double t_low = 0.0;
};

struct HoughLine {
  double rho = 0.0;    // pixels
  double theta = 0.0;  // radians in [0, pi)
  int votes = 0;
  double dir_x = 0.0;  // unit direction along the line
  double dir_y = 0.0;
};

struct LineSet {
  std::vector<HoughLine> lines;  // sorted by votes descending
};

struct PerceptionResult {
  ContourSet contours;
  LineSet lines;
};

std::vector<double> gaussian_kernel(int kernel_size, double sigma);

/// Gaussian convolution with edge replication, rounded back to 8 bits.
TactileImage gaussian_smooth(const TactileImage& image, int kernel_size,
                             double sigma);

GradientField gradient_field(const TactileImage& smoothed);

/// Floor of the mean over nonzero gradient magnitudes.
/// Throws all-zero-gradient.
double texture_threshold(const GradientField& grad);

/// Thins the magnitude map to local maxima along the quantized gradient
/// direction (4 bins). Suppressed pixels become 0.
std::vector<double> nonmax_suppress(const GradientField& grad);

/// Dual-threshold detection: pixels >= t_high are strong; pixels in
/// [t_low, t_high) survive iff 8-connected to a strong pixel.
ContourSet hysteresis(const std::vector<double>& suppressed, int width,
                      int height, double t_high, double t_low);

/// Standard (rho, theta) accumulator; peaks are non-maximum suppressed in
/// accumulator space, sorted by votes. Throws empty-contour-set.
LineSet hough_lines(const ContourSet& contours, int width, int height,
                    double rho_resolution, double theta_resolution,
                    int min_votes, int max_lines);

/// Full adaptive pipeline: smooth, gradient, texture threshold, NMS,
/// hysteresis at (k_high, k_low) * T_texture (or the fixed baseline),
/// Hough. A frame whose texture threshold floors to zero carries no
/// texture signal and yields an empty contour set.
PerceptionResult extract_contours(const TactileImage& image,
                                  const PerceptionConfig& config = {});

/// In-plane pose from the dominant line: rotation about the sensor normal
/// by the line's theta. Throws empty-line-set.
Quat pose_from_lines(const LineSet& lines);

/// q_w = q3 * q2 * q1 (object-in-world), Hamilton products, renormalized
/// and sign-canonicalized. Inputs must be unit within 1e-6.
Quat world_pose(const Quat& q1, const Quat& q2, const Quat& q3);

/// q_e = q_t * q_w^-1, the correction aligning q_w with the target.
Quat pose_error(const Quat& q_t, const Quat& q_w);

Json contours_to_json(const PerceptionResult& result);
PerceptionResult contours_from_json(const Json& doc);

}  // namespace skill::tactile
