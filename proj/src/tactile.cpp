#include "skill/tactile.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace skill::tactile {

std::vector<double> gaussian_kernel(int kernel_size, double sigma) {
  if (kernel_size < 3 || kernel_size % 2 == 0)
    throw Error("invalid-kernel", "kernel size must be odd and >= 3");
  if (sigma <= 0.0) throw Error("invalid-kernel", "sigma must be positive");
  int r = kernel_size / 2;
  std::vector<double> k(static_cast<size_t>(kernel_size) * kernel_size);
  double sum = 0.0;
  for (int dy = -r; dy <= r; ++dy)
    for (int dx = -r; dx <= r; ++dx) {
      double w = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
      k[static_cast<size_t>(dy + r) * kernel_size + (dx + r)] = w;
      sum += w;
    }
  for (double& w : k) w /= sum;
  return k;
}

TactileImage gaussian_smooth(const TactileImage& image, int kernel_size,
                             double sigma) {
  auto kernel = gaussian_kernel(kernel_size, sigma);
  int r = kernel_size / 2;
  TactileImage out(image.width, image.height);
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x) {
      double acc = 0.0;
      for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx)
          acc += kernel[static_cast<size_t>(dy + r) * kernel_size + (dx + r)] *
                 image.clamped(x + dx, y + dy);
      out.at(x, y) = static_cast<uint8_t>(
          std::clamp<long>(std::lround(acc), 0, 255));
    }
  return out;
}

GradientField gradient_field(const TactileImage& smoothed) {
  if (smoothed.width < 3 || smoothed.height < 3)
    throw Error("image-too-small", "gradient needs at least a 3x3 image");
  GradientField g;
  g.width = smoothed.width;
  g.height = smoothed.height;
  g.magnitude.assign(static_cast<size_t>(g.width) * g.height, 0.0);
  g.direction.assign(static_cast<size_t>(g.width) * g.height, 0.0);
  for (int y = 1; y < g.height - 1; ++y)
    for (int x = 1; x < g.width - 1; ++x) {
      double gx = static_cast<double>(smoothed.at(x + 1, y)) -
                  smoothed.at(x - 1, y);
      double gy = static_cast<double>(smoothed.at(x, y + 1)) -
                  smoothed.at(x, y - 1);
      size_t i = g.index(x, y);
      g.magnitude[i] = std::sqrt(gx * gx + gy * gy);
      g.direction[i] = (gx != 0.0 || gy != 0.0) ? std::atan2(gy, gx) : 0.0;
    }
  return g;
}

double texture_threshold(const GradientField& grad) {
  double sum = 0.0;
  size_t count = 0;
  for (double m : grad.magnitude) {
    if (m != 0.0) {
      sum += m;
      ++count;
    }
  }
  if (count == 0)
    throw Error("all-zero-gradient", "gradient map has no nonzero values");
  return std::floor(sum / static_cast<double>(count));
}

std::vector<double> nonmax_suppress(const GradientField& grad) {
  std::vector<double> out(grad.magnitude.size(), 0.0);
  for (int y = 1; y < grad.height - 1; ++y)
    for (int x = 1; x < grad.width - 1; ++x) {
      size_t i = grad.index(x, y);
      double m = grad.magnitude[i];
      if (m == 0.0) continue;
      // Quantize the gradient direction to 0/45/90/135 degrees.
      double angle = grad.direction[i] * 180.0 / M_PI;
      if (angle < 0.0) angle += 180.0;
      int dx1, dy1;
      if (angle < 22.5 || angle >= 157.5) {
        dx1 = 1; dy1 = 0;
      } else if (angle < 67.5) {
        dx1 = 1; dy1 = 1;
      } else if (angle < 112.5) {
        dx1 = 0; dy1 = 1;
      } else {
        dx1 = -1; dy1 = 1;
      }
      double n1 = grad.magnitude[grad.index(x + dx1, y + dy1)];
      double n2 = grad.magnitude[grad.index(x - dx1, y - dy1)];
      if (m >= n1 && m >= n2) out[i] = m;
    }
  return out;
}

ContourSet hysteresis(const std::vector<double>& suppressed, int width,
                      int height, double t_high, double t_low) {
  if (t_low > t_high)
    throw Error("threshold-order", "t_low must not exceed t_high");
  auto idx = [&](int x, int y) {
    return static_cast<size_t>(y) * width + x;
  };
  std::vector<uint8_t> state(suppressed.size(), 0);  // 1 weak, 2 strong
  std::deque<PixelPoint> frontier;
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      double v = suppressed[idx(x, y)];
      if (v <= 0.0) continue;
      if (v >= t_high) {
        state[idx(x, y)] = 2;
        frontier.push_back({x, y});
      } else if (v >= t_low) {
        state[idx(x, y)] = 1;
      }
    }
  // Grow strong pixels through 8-connected weak chains.
  while (!frontier.empty()) {
    PixelPoint p = frontier.front();
    frontier.pop_front();
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        int nx = p.x + dx, ny = p.y + dy;
        if (nx < 0 || ny < 0 || nx >= width || ny >= height) continue;
        if (state[idx(nx, ny)] == 1) {
          state[idx(nx, ny)] = 2;
          frontier.push_back({nx, ny});
        }
      }
  }
  ContourSet c;
  c.t_high = t_high;
  c.t_low = t_low;
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      if (state[idx(x, y)] == 2) c.points.push_back({x, y});
  return c;
}

LineSet hough_lines(const ContourSet& contours, int width, int height,
                    double rho_resolution, double theta_resolution,
                    int min_votes, int max_lines) {
  if (contours.points.empty())
    throw Error("empty-contour-set", "Hough transform needs contour points");
  if (rho_resolution <= 0.0 || theta_resolution <= 0.0)
    throw Error("invalid-resolution", "Hough resolutions must be positive");

  int n_theta = std::max(1, static_cast<int>(std::round(M_PI / theta_resolution)));
  double diag = std::hypot(width, height);
  int n_rho = 2 * static_cast<int>(std::ceil(diag / rho_resolution)) + 1;
  int rho_offset = n_rho / 2;

  std::vector<double> sin_t(n_theta), cos_t(n_theta);
  for (int t = 0; t < n_theta; ++t) {
    double theta = t * theta_resolution;
    sin_t[t] = std::sin(theta);
    cos_t[t] = std::cos(theta);
  }

  std::vector<int> accum(static_cast<size_t>(n_theta) * n_rho, 0);
  for (const auto& p : contours.points) {
    for (int t = 0; t < n_theta; ++t) {
      double rho = p.x * cos_t[t] + p.y * sin_t[t];
      int r = static_cast<int>(std::lround(rho / rho_resolution)) + rho_offset;
      if (r >= 0 && r < n_rho)
        ++accum[static_cast<size_t>(t) * n_rho + r];
    }
  }

  // Local maxima in the accumulator (3x3 neighborhood).
  struct Peak {
    int votes, t, r;
  };
  std::vector<Peak> peaks;
  for (int t = 0; t < n_theta; ++t)
    for (int r = 0; r < n_rho; ++r) {
      int v = accum[static_cast<size_t>(t) * n_rho + r];
      if (v < min_votes) continue;
      bool is_max = true;
      for (int dt = -1; dt <= 1 && is_max; ++dt)
        for (int dr = -1; dr <= 1 && is_max; ++dr) {
          if (dt == 0 && dr == 0) continue;
          int tt = t + dt, rr = r + dr;
          if (tt < 0 || tt >= n_theta || rr < 0 || rr >= n_rho) continue;
          int nv = accum[static_cast<size_t>(tt) * n_rho + rr];
          if (nv > v || (nv == v && (dt < 0 || (dt == 0 && dr < 0))))
            is_max = false;  // ties resolve to the lexicographically first bin
        }
      if (is_max) peaks.push_back({v, t, r});
    }

  std::sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) {
    if (a.votes != b.votes) return a.votes > b.votes;
    if (a.t != b.t) return a.t < b.t;
    return a.r < b.r;
  });

  // Greedy accumulator-space suppression around accepted peaks.
  const int suppress = 2;
  LineSet out;
  std::vector<std::pair<int, int>> kept;
  for (const auto& p : peaks) {
    if (static_cast<int>(out.lines.size()) >= max_lines) break;
    bool near = false;
    for (const auto& [kt, kr] : kept) {
      if (std::abs(p.t - kt) <= suppress && std::abs(p.r - kr) <= suppress) {
        near = true;
        break;
      }
    }
    if (near) continue;
    kept.push_back({p.t, p.r});
    HoughLine line;
    line.rho = (p.r - rho_offset) * rho_resolution;
    line.theta = p.t * theta_resolution;
    line.votes = p.votes;
    double dx = -std::sin(line.theta), dy = std::cos(line.theta);
    if (dx < 0.0 || (dx == 0.0 && dy < 0.0)) {
      dx = -dx;
      dy = -dy;
    }
    line.dir_x = dx;
    line.dir_y = dy;
    out.lines.push_back(line);
  }
  return out;
}

PerceptionResult extract_contours(const TactileImage& image,
                                  const PerceptionConfig& config) {
  TactileImage smoothed =
      gaussian_smooth(image, config.kernel_size, config.sigma);
  GradientField grad = gradient_field(smoothed);
  double t_texture = texture_threshold(grad);  // throws all-zero-gradient
  std::vector<double> suppressed = nonmax_suppress(grad);

  PerceptionResult result;
  if (config.adaptive) {
    double t_high = config.k_high * t_texture;
    double t_low = config.k_low * t_texture;
    if (t_texture <= config.noise_floor) {
      // At or below the no-contact noise floor: nothing to extract.
      result.contours.t_high = t_high;
      result.contours.t_low = t_low;
    } else {
      result.contours =
          hysteresis(suppressed, grad.width, grad.height, t_high, t_low);
    }
  } else {
    result.contours = hysteresis(suppressed, grad.width, grad.height,
                                 config.fixed_high, config.fixed_low);
  }
  result.contours.t_texture = t_texture;

  if (!result.contours.points.empty()) {
    result.lines = hough_lines(result.contours, grad.width, grad.height,
                               config.rho_resolution, config.theta_resolution,
                               config.min_votes, config.max_lines);
  }
  return result;
}

Quat pose_from_lines(const LineSet& lines) {
  if (lines.lines.empty())
    throw Error("empty-line-set", "no lines to estimate a pose from");
  const HoughLine& dominant = lines.lines.front();
  return Quat::from_axis_angle({0.0, 0.0, 1.0}, dominant.theta);
}

namespace {

void check_unit(const Quat& q, const char* name) {
  if (std::abs(q.norm() - 1.0) > 1e-6)
    throw Error("non-unit-quaternion",
                std::string(name) + " must be a unit quaternion");
}

}  // namespace

Quat world_pose(const Quat& q1, const Quat& q2, const Quat& q3) {
  check_unit(q1, "q1");
  check_unit(q2, "q2");
  check_unit(q3, "q3");
  return (q3 * q2 * q1).normalized().canonical();
}

Quat pose_error(const Quat& q_t, const Quat& q_w) {
  check_unit(q_t, "q_t");
  check_unit(q_w, "q_w");
  return (q_t * q_w.inverse()).normalized().canonical();
}

Json contours_to_json(const PerceptionResult& result) {
  Json points = Json::array();
  for (const auto& p : result.contours.points)
    points.push_back(Json::array({p.x, p.y}));
  Json lines = Json::array();
  for (const auto& l : result.lines.lines)
    lines.push_back(Json{{"dir", Json::array({l.dir_x, l.dir_y})},
                         {"rho", l.rho},
                         {"theta", l.theta},
                         {"votes", l.votes}});
  return Json{{"lines", lines},
              {"points", points},
              {"thresholds",
               Json{{"high", result.contours.t_high},
                    {"low", result.contours.t_low},
                    {"texture", result.contours.t_texture}}}};
}

PerceptionResult contours_from_json(const Json& doc) {
  PerceptionResult result;
  for (const auto& p : doc.at("points"))
    result.contours.points.push_back({p.at(0).get<int>(), p.at(1).get<int>()});
  for (const auto& l : doc.at("lines")) {
    HoughLine line;
    line.rho = l.at("rho").get<double>();
    line.theta = l.at("theta").get<double>();
    line.votes = l.at("votes").get<int>();
    line.dir_x = l.at("dir").at(0).get<double>();
    line.dir_y = l.at("dir").at(1).get<double>();
    result.lines.lines.push_back(line);
  }
  const Json& th = doc.at("thresholds");
  result.contours.t_texture = th.at("texture").get<double>();
  result.contours.t_high = th.at("high").get<double>();
  result.contours.t_low = th.at("low").get<double>();
  return result;
}

}  // namespace skill::tactile
