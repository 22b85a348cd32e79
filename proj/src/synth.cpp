#include "skill/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <sstream>

namespace skill::tactile {

std::string to_string(Shape s) {
  switch (s) {
    case Shape::rect_line: return "rect_line";
    case Shape::acute_angle: return "acute_angle";
    case Shape::right_angle: return "right_angle";
    case Shape::circle: return "circle";
    case Shape::pentagon: return "pentagon";
    case Shape::line_bundle: return "line_bundle";
  }
  return "?";
}

Shape shape_from_string(const std::string& s) {
  for (Shape shape : all_shapes())
    if (to_string(shape) == s) return shape;
  throw Error("unknown-shape", "no shape named '" + s + "'");
}

const std::vector<Shape>& all_shapes() {
  static const std::vector<Shape> shapes = {
      Shape::rect_line, Shape::acute_angle, Shape::right_angle, Shape::circle,
      Shape::pentagon,  Shape::line_bundle};
  return shapes;
}

namespace {

struct Segment {
  Point2 a, b;
};

double point_segment_distance(double px, double py, const Segment& s) {
  double vx = s.b.x - s.a.x, vy = s.b.y - s.a.y;
  double wx = px - s.a.x, wy = py - s.a.y;
  double vv = vx * vx + vy * vy;
  double t = vv > 0.0 ? std::clamp((wx * vx + wy * vy) / vv, 0.0, 1.0) : 0.0;
  double dx = px - (s.a.x + t * vx), dy = py - (s.a.y + t * vy);
  return std::hypot(dx, dy);
}

Point2 transform(const Point2& p, const ShapePose& pose) {
  double c = std::cos(pose.angle), s = std::sin(pose.angle);
  return {pose.cx + c * p.x - s * p.y, pose.cy + s * p.x + c * p.y};
}

// Local-frame polylines; closed shapes repeat the first vertex.
std::vector<Polyline> local_contour(Shape shape) {
  switch (shape) {
    case Shape::rect_line:
      return {{{-90, 0}, {90, 0}}};
    case Shape::acute_angle:
      return {{{110, -35}, {-40, -35}},
              {{-40, -35}, {-40 + 110 * std::cos(0.7853981633974483),
                            -35 + 110 * std::sin(0.7853981633974483)}}};
    case Shape::right_angle:
      return {{{60, -50}, {-50, -50}}, {{-50, -50}, {-50, 60}}};
    case Shape::circle: {
      Polyline ring;
      for (int k = 0; k <= 360; ++k) {
        double a = k * M_PI / 180.0;
        ring.push_back({60.0 * std::cos(a), 60.0 * std::sin(a)});
      }
      return {ring};
    }
    case Shape::pentagon: {
      Polyline ring;
      for (int k = 0; k <= 5; ++k) {
        double a = -M_PI / 2.0 + k * 2.0 * M_PI / 5.0;
        ring.push_back({70.0 * std::cos(a), 70.0 * std::sin(a)});
      }
      return {ring};
    }
    case Shape::line_bundle: {
      std::vector<Polyline> lines;
      for (int k = -2; k <= 2; ++k) {
        double x = 18.0 * k;
        lines.push_back({{x, -70}, {x, 70}});
      }
      return lines;
    }
  }
  return {};
}

bool is_closed(Shape shape) {
  return shape == Shape::circle || shape == Shape::pentagon;
}

// Liang-Barsky clip of one segment against [0,w-1]x[0,h-1].
std::optional<Segment> clip_segment(const Segment& s, double w, double h) {
  double x0 = s.a.x, y0 = s.a.y, dx = s.b.x - s.a.x, dy = s.b.y - s.a.y;
  double t0 = 0.0, t1 = 1.0;
  double p[4] = {-dx, dx, -dy, dy};
  double q[4] = {x0, w - 1 - x0, y0, h - 1 - y0};
  for (int k = 0; k < 4; ++k) {
    if (p[k] == 0.0) {
      if (q[k] < 0.0) return std::nullopt;
    } else {
      double t = q[k] / p[k];
      if (p[k] < 0.0)
        t0 = std::max(t0, t);
      else
        t1 = std::min(t1, t);
    }
  }
  if (t0 > t1) return std::nullopt;
  return Segment{{x0 + t0 * dx, y0 + t0 * dy}, {x0 + t1 * dx, y0 + t1 * dy}};
}

bool point_in_polygon(double x, double y, const Polyline& ring) {
  bool inside = false;
  size_t n = ring.size();
  for (size_t i = 0, j = n - 1; i < n; j = i++) {
    if ((ring[i].y > y) != (ring[j].y > y)) {
      double xi = ring[j].x + (y - ring[j].y) / (ring[i].y - ring[j].y) *
                                  (ring[i].x - ring[j].x);
      if (x < xi) inside = !inside;
    }
  }
  return inside;
}

}  // namespace

SynthResult synth_tactile_image(Shape shape, const ShapePose& pose,
                                const std::optional<StripeSpec>& texture,
                                const SynthConfig& config) {
  // World-frame analytic contour.
  std::vector<Polyline> contour;
  for (const auto& line : local_contour(shape)) {
    Polyline out;
    out.reserve(line.size());
    for (const auto& p : line) out.push_back(transform(p, pose));
    contour.push_back(std::move(out));
  }

  bool exits_frame = false;
  for (const auto& line : contour)
    for (const auto& p : line)
      if (p.x < 0.0 || p.x > config.width - 1 || p.y < 0.0 ||
          p.y > config.height - 1)
        exits_frame = true;
  if (exits_frame && !config.allow_partial)
    throw Error("shape-out-of-bounds",
                "shape does not fit the frame (enable allow_partial for "
                "edge contact)");

  std::vector<Segment> segments;
  for (const auto& line : contour)
    for (size_t i = 0; i + 1 < line.size(); ++i)
      segments.push_back({line[i], line[i + 1]});

  // Ground truth, clipped to the frame when partial contact is allowed.
  std::vector<Polyline> truth;
  if (!exits_frame) {
    truth = contour;
  } else {
    for (const auto& line : contour) {
      Polyline current;
      for (size_t i = 0; i + 1 < line.size(); ++i) {
        auto clipped = clip_segment({line[i], line[i + 1]},
                                    config.width, config.height);
        if (!clipped) {
          if (current.size() >= 2) truth.push_back(std::move(current));
          current.clear();
          continue;
        }
        if (current.empty()) {
          current.push_back(clipped->a);
        } else {
          const Point2& last = current.back();
          if (std::hypot(last.x - clipped->a.x, last.y - clipped->a.y) > 1e-9) {
            if (current.size() >= 2) truth.push_back(std::move(current));
            current.clear();
            current.push_back(clipped->a);
          }
        }
        current.push_back(clipped->b);
      }
      if (current.size() >= 2) truth.push_back(std::move(current));
    }
    if (truth.empty())
      throw Error("shape-out-of-bounds", "shape lies entirely off-frame");
  }

  // Contact region for the stripe texture: polygon interior for closed
  // shapes, a band around the segments otherwise.
  Polyline region_ring;
  if (is_closed(shape)) region_ring = contour.front();

  TactileImage img(config.width, config.height);
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> noise(0.0, config.noise_sigma);
  double inv2s2 = 1.0 / (2.0 * config.ridge_sigma * config.ridge_sigma);
  double stripe_cos = texture ? std::cos(texture->angle) : 0.0;
  double stripe_sin = texture ? std::sin(texture->angle) : 0.0;

  for (int y = 0; y < config.height; ++y) {
    for (int x = 0; x < config.width; ++x) {
      double d = std::numeric_limits<double>::infinity();
      for (const auto& s : segments)
        d = std::min(d, point_segment_distance(x, y, s));

      double v = config.background +
                 config.ridge_amplitude * std::exp(-d * d * inv2s2);

      if (texture) {
        bool in_region = is_closed(shape)
                             ? point_in_polygon(x, y, region_ring)
                             : d <= config.texture_band;
        if (in_region) {
          // Perpendicular distance phase; stripes run along `angle`.
          double u = -x * stripe_sin + y * stripe_cos;
          double stripe =
              texture->amplitude * std::sin(2.0 * M_PI * u / texture->period);
          // Fade the texture in a moat around the contour so texture
          // chains stay disconnected from the contour ridge.
          double moat = 6.0 * config.ridge_sigma;
          double mask = 1.0 - std::exp(-d * d / (2.0 * moat * moat));
          v += stripe * mask;
        }
      }
      if (config.noise_sigma > 0.0) v += noise(rng);
      img.at(x, y) = static_cast<uint8_t>(
          std::clamp<long>(std::lround(v), 0, 255));
    }
  }

  return {std::move(img), std::move(truth)};
}

namespace {

// Uniform-grid bucket index over sub-pixel truth samples.
class NearestTruth {
 public:
  NearestTruth(const std::vector<Polyline>& truth, double spacing) {
    for (const auto& line : truth) {
      for (size_t i = 0; i + 1 < line.size(); ++i) {
        double len = std::hypot(line[i + 1].x - line[i].x,
                                line[i + 1].y - line[i].y);
        int n = std::max(1, static_cast<int>(std::ceil(len / spacing)));
        for (int k = 0; k <= n; ++k) {
          double t = static_cast<double>(k) / n;
          samples_.push_back({line[i].x + t * (line[i + 1].x - line[i].x),
                              line[i].y + t * (line[i + 1].y - line[i].y)});
        }
      }
    }
    if (samples_.empty()) throw Error("empty-input", "empty ground truth");
    min_x_ = min_y_ = std::numeric_limits<double>::infinity();
    for (const auto& p : samples_) {
      min_x_ = std::min(min_x_, p.x);
      min_y_ = std::min(min_y_, p.y);
    }
    for (size_t i = 0; i < samples_.size(); ++i)
      buckets_[key(samples_[i].x, samples_[i].y)].push_back(i);
  }

  double distance(double x, double y) const {
    int cx = cell(x - min_x_), cy = cell(y - min_y_);
    double best = std::numeric_limits<double>::infinity();
    // Any sample in a cell at Chebyshev index distance > r lies at least
    // r*kCell away, so the window can stop growing once best <= r*kCell.
    for (int radius = 1; radius < 4096; ++radius) {
      for (int by = cy - radius; by <= cy + radius; ++by)
        for (int bx = cx - radius; bx <= cx + radius; ++bx) {
          if (radius > 1 && std::abs(bx - cx) < radius &&
              std::abs(by - cy) < radius)
            continue;  // interior already searched
          auto it = buckets_.find(key_of(bx, by));
          if (it == buckets_.end()) continue;
          for (size_t i : it->second)
            best = std::min(best,
                            std::hypot(samples_[i].x - x, samples_[i].y - y));
        }
      if (best <= radius * kCell) return best;
    }
    return best;
  }

 private:
  static constexpr double kCell = 8.0;
  int cell(double v) const { return static_cast<int>(std::floor(v / kCell)); }
  static int64_t key_of(int bx, int by) {
    return (static_cast<int64_t>(bx) << 32) ^
           static_cast<int64_t>(static_cast<uint32_t>(by));
  }
  int64_t key(double x, double y) const {
    return key_of(cell(x - min_x_), cell(y - min_y_));
  }

  std::vector<Point2> samples_;
  std::map<int64_t, std::vector<size_t>> buckets_;
  double min_x_ = 0.0, min_y_ = 0.0;
};

}  // namespace

double contour_rmse(const ContourSet& contours,
                    const std::vector<Polyline>& truth) {
  if (contours.points.empty())
    throw Error("empty-input", "no extracted contour points");
  NearestTruth index(truth, 0.25);
  double sum_sq = 0.0;
  for (const auto& p : contours.points) {
    double d = index.distance(p.x, p.y);
    sum_sq += d * d;
  }
  return std::sqrt(sum_sq / static_cast<double>(contours.points.size()));
}

namespace {

ShapePose general_pose(Shape shape) {
  switch (shape) {
    case Shape::rect_line: return {160, 120, 0.35};
    case Shape::acute_angle: return {150, 120, 0.17};
    case Shape::right_angle: return {160, 125, 0.26};
    case Shape::circle: return {160, 120, 0.0};
    case Shape::pentagon: return {160, 120, 0.21};
    case Shape::line_bundle: return {160, 120, 0.44};
  }
  return {};
}

ShapePose edge_pose(Shape shape) {
  ShapePose p = general_pose(shape);
  p.cx = 295.0;  // push the contact toward the sensor border
  return p;
}

}  // namespace

std::vector<BenchRow> tactile_benchmark(int seeds_per_shape,
                                        const PerceptionConfig& perception,
                                        const SynthConfig& base,
                                        bool include_edge, uint64_t seed) {
  if (seeds_per_shape < 1)
    throw Error("invalid-argument", "need at least one seed per shape");
  std::vector<BenchRow> rows;
  const double miss_penalty = std::hypot(base.width, base.height);

  auto run_condition = [&](Shape shape, const std::string& condition,
                           const ShapePose& pose, bool partial) {
    double sum_adaptive = 0.0, sum_fixed = 0.0;
    for (int s = 0; s < seeds_per_shape; ++s) {
      SynthConfig cfg = base;
      cfg.allow_partial = partial;
      cfg.seed = seed * 1000003ULL +
                 static_cast<uint64_t>(shape) * 7919ULL + s;
      StripeSpec stripes;
      stripes.angle = pose.angle + 0.45;
      SynthResult synth = synth_tactile_image(shape, pose, stripes, cfg);

      for (bool adaptive : {true, false}) {
        PerceptionConfig pc = perception;
        pc.adaptive = adaptive;
        PerceptionResult result = extract_contours(synth.image, pc);
        double rmse = result.contours.points.empty()
                          ? miss_penalty
                          : contour_rmse(result.contours, synth.truth);
        (adaptive ? sum_adaptive : sum_fixed) += rmse;
      }
    }
    rows.push_back({to_string(shape), condition, "adaptive",
                    sum_adaptive / seeds_per_shape});
    rows.push_back({to_string(shape), condition, "fixed",
                    sum_fixed / seeds_per_shape});
  };

  for (Shape shape : all_shapes()) {
    run_condition(shape, "general", general_pose(shape), false);
    if (include_edge) run_condition(shape, "edge", edge_pose(shape), true);
  }
  return rows;
}

std::string benchmark_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream out;
  out << "shape,condition,method,rmse\n";
  out.setf(std::ios::fixed);
  out.precision(4);
  for (const auto& r : rows)
    out << r.shape << "," << r.condition << "," << r.method << "," << r.rmse
        << "\n";
  return out.str();
}

}  // namespace skill::tactile
