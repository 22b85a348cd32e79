#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "skill/synth.hpp"
#include "skill/tactile.hpp"

using namespace skill;
using namespace skill::tactile;

namespace {

GradientField field_from(const std::vector<std::vector<double>>& rows) {
  GradientField g;
  g.height = static_cast<int>(rows.size());
  g.width = static_cast<int>(rows[0].size());
  for (const auto& row : rows)
    for (double v : row) {
      g.magnitude.push_back(v);
      g.direction.push_back(0.0);
    }
  return g;
}

}  // namespace

TEST_CASE("texture_threshold is the floor of the nonzero mean") {
  // nonzero values {10, 20, 33}: mean 21, floor 21
  auto g = field_from({{0, 10, 0}, {20, 0, 33}, {0, 0, 0}});
  CHECK(texture_threshold(g) == 21.0);

  // uniform nonzero value
  auto uni = field_from({{5, 5}, {5, 5}});
  CHECK(texture_threshold(uni) == 5.0);

  // fractional mean floors down
  auto frac = field_from({{10, 11}});  // mean 10.5
  CHECK(texture_threshold(frac) == 10.0);

  auto zero = field_from({{0, 0}, {0, 0}});
  try {
    texture_threshold(zero);
    FAIL("expected all-zero-gradient");
  } catch (const Error& e) {
    CHECK(e.code() == "all-zero-gradient");
  }
}

TEST_CASE("gaussian kernel and smoothing") {
  auto kernel = gaussian_kernel(5, 1.0);
  double sum = 0.0;
  for (double w : kernel) sum += w;
  CHECK(std::abs(sum - 1.0) <= 1e-12);
  CHECK_THROWS_AS(gaussian_kernel(4, 1.0), Error);
  CHECK_THROWS_AS(gaussian_kernel(5, 0.0), Error);

  // constant image stays identical
  TactileImage constant(16, 12, 137);
  CHECK(gaussian_smooth(constant, 5, 1.0) == constant);

  // impulse becomes a sampled bump with the center as maximum
  TactileImage impulse(9, 9, 0);
  impulse.at(4, 4) = 255;
  auto smoothed = gaussian_smooth(impulse, 5, 1.0);
  uint8_t center = smoothed.at(4, 4);
  CHECK(center == std::lround(255.0 * kernel[12]));
  for (int y = 0; y < 9; ++y)
    for (int x = 0; x < 9; ++x)
      CHECK(smoothed.at(x, y) <= center);
  CHECK(smoothed.at(5, 4) == std::lround(255.0 * kernel[13]));

  CHECK_THROWS_AS(gaussian_smooth(impulse, 4, 1.0), Error);
}

TEST_CASE("gradient_field on ramps") {
  // horizontal ramp S = 10*x: direction 0, constant magnitude interior
  TactileImage ramp(12, 8, 0);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 12; ++x) ramp.at(x, y) = static_cast<uint8_t>(10 * x);
  auto g = gradient_field(ramp);
  for (int y = 1; y < 7; ++y)
    for (int x = 1; x < 11; ++x) {
      CHECK(g.magnitude[g.index(x, y)] == doctest::Approx(20.0));
      CHECK(g.direction[g.index(x, y)] == doctest::Approx(0.0));
    }
  // borders carry magnitude 0
  for (int x = 0; x < 12; ++x) {
    CHECK(g.magnitude[g.index(x, 0)] == 0.0);
    CHECK(g.magnitude[g.index(x, 7)] == 0.0);
  }

  // vertical ramp: direction pi/2
  TactileImage vert(8, 12, 0);
  for (int y = 0; y < 12; ++y)
    for (int x = 0; x < 8; ++x) vert.at(x, y) = static_cast<uint8_t>(10 * y);
  auto gv = gradient_field(vert);
  CHECK(gv.direction[gv.index(4, 5)] == doctest::Approx(M_PI / 2));

  // constant image: all zero magnitudes
  TactileImage flat(8, 8, 99);
  auto gf = gradient_field(flat);
  for (double m : gf.magnitude) CHECK(m == 0.0);

  TactileImage tiny(2, 2, 0);
  CHECK_THROWS_AS(gradient_field(tiny), Error);
}

TEST_CASE("nonmax suppression") {
  // single-transition step edge: exactly one 1-px ridge column survives
  TactileImage step(16, 8, 50);
  for (int y = 0; y < 8; ++y) {
    step.at(8, y) = 100;
    for (int x = 9; x < 16; ++x) step.at(x, y) = 150;
  }
  auto g = gradient_field(step);
  auto n = nonmax_suppress(g);
  for (int y = 1; y < 7; ++y) {
    CHECK(n[g.index(8, y)] > 0.0);   // the transition column
    CHECK(n[g.index(7, y)] == 0.0);  // flanks suppressed
    CHECK(n[g.index(9, y)] == 0.0);
  }

  // constant magnitude map stays all zero
  TactileImage flat(8, 8, 42);
  auto gflat = gradient_field(flat);
  auto nflat = nonmax_suppress(gflat);
  for (double v : nflat) CHECK(v == 0.0);

  // isolated bright pixel in the magnitude map is retained
  auto iso = field_from({{0, 0, 0}, {0, 77, 0}, {0, 0, 0}});
  auto niso = nonmax_suppress(iso);
  CHECK(niso[iso.index(1, 1)] == 77.0);
}

TEST_CASE("hysteresis dual-threshold detection") {
  // all pixels >= t_high are kept
  std::vector<double> all(6 * 4, 80.0);
  auto c = hysteresis(all, 6, 4, 60.0, 30.0);
  CHECK(c.points.size() == 24);

  // a weak chain touching one strong pixel survives in full
  std::vector<double> chain(8 * 3, 0.0);
  auto at = [&](int x, int y) -> double& { return chain[y * 8 + x]; };
  at(1, 1) = 90.0;                                    // strong anchor
  at(2, 1) = 40.0; at(3, 1) = 40.0; at(4, 2) = 40.0;  // weak chain (8-conn)
  at(6, 0) = 45.0;                                    // weak island
  auto kept = hysteresis(chain, 8, 3, 60.0, 30.0);
  REQUIRE(kept.points.size() == 4);
  for (const auto& p : kept.points) CHECK_FALSE((p.x == 6 && p.y == 0));

  CHECK_THROWS_AS(hysteresis(all, 6, 4, 30.0, 60.0), Error);
}

TEST_CASE("hough_lines on constructed point sets") {
  double theta_res = M_PI / 180.0;

  // 50 collinear points along a 30-degree direction
  ContourSet c;
  double dir = 30.0 * M_PI / 180.0;
  for (int k = 0; k < 50; ++k) {
    int x = static_cast<int>(std::lround(60 + k * std::cos(dir) * 3));
    int y = static_cast<int>(std::lround(40 + k * std::sin(dir) * 3));
    c.points.push_back({x, y});
  }
  auto lines = hough_lines(c, 320, 240, 1.0, theta_res, 20, 4);
  REQUIRE_FALSE(lines.lines.empty());
  // the line direction is 30 deg, so the normal angle is 120 deg
  CHECK(std::abs(lines.lines[0].theta - 120.0 * M_PI / 180.0) <=
        theta_res + 1e-9);
  CHECK(std::abs(std::hypot(lines.lines[0].dir_x, lines.lines[0].dir_y) -
                 1.0) <= 1e-12);

  // square outline: two theta values 90 degrees apart, two lines each
  ContourSet square;
  for (int k = 0; k <= 60; ++k) {
    square.points.push_back({40 + k, 40});
    square.points.push_back({40 + k, 100});
    square.points.push_back({40, 40 + k});
    square.points.push_back({100, 40 + k});
  }
  auto sq = hough_lines(square, 320, 240, 1.0, theta_res, 30, 8);
  REQUIRE(sq.lines.size() >= 4);
  int horizontal = 0, vertical = 0;
  for (const auto& l : sq.lines) {
    double deg = l.theta * 180.0 / M_PI;
    if (std::abs(deg - 90.0) <= 1.5) ++horizontal;
    if (deg <= 1.5 || deg >= 178.5) ++vertical;
  }
  CHECK(horizontal >= 2);
  CHECK(vertical >= 2);

  ContourSet empty;
  try {
    hough_lines(empty, 320, 240, 1.0, theta_res, 10, 4);
    FAIL("expected empty-contour-set");
  } catch (const Error& e) {
    CHECK(e.code() == "empty-contour-set");
  }
}

TEST_CASE("pose_from_lines half-angle quaternions") {
  LineSet lines;
  lines.lines.push_back({0.0, 0.0, 100, 0.0, 1.0});
  Quat q0 = pose_from_lines(lines);
  CHECK(quat_angle(q0, Quat::identity()) <= 1e-12);

  lines.lines.front().theta = M_PI / 2;
  Quat q90 = pose_from_lines(lines);
  CHECK(q90.w == doctest::Approx(std::sqrt(2.0) / 2).epsilon(1e-12));
  CHECK(q90.z == doctest::Approx(std::sqrt(2.0) / 2).epsilon(1e-12));
  CHECK(q90.x == 0.0);
  CHECK(q90.y == 0.0);

  CHECK_THROWS_AS(pose_from_lines(LineSet{}), Error);
}

TEST_CASE("world_pose matches the rotation-matrix oracle") {
  // identity absorption
  CHECK(quat_angle(world_pose(Quat::identity(), Quat::identity(),
                              Quat::identity()),
                   Quat::identity()) <= 1e-12);
  Quat z90 = Quat::from_axis_angle({0, 0, 1}, M_PI / 2);
  CHECK(quat_angle(world_pose(Quat::identity(), Quat::identity(), z90), z90) <=
        1e-12);

  std::mt19937_64 rng(123);
  for (int iter = 0; iter < 2000; ++iter) {
    Quat q1 = testutil::random_unit_quat(rng);
    Quat q2 = testutil::random_unit_quat(rng);
    Quat q3 = testutil::random_unit_quat(rng);
    Quat w = world_pose(q1, q2, q3);
    auto expected = testutil::mat_mul(
        testutil::mat_mul(testutil::quat_to_matrix(q3),
                          testutil::quat_to_matrix(q2)),
        testutil::quat_to_matrix(q1));
    REQUIRE(testutil::mat_distance(testutil::quat_to_matrix(w), expected) <=
            1e-9);
    REQUIRE(std::abs(w.norm() - 1.0) <= 1e-12);
    REQUIRE(w.w >= 0.0);
  }

  CHECK_THROWS_AS(world_pose(Quat{2, 0, 0, 0}, Quat::identity(),
                             Quat::identity()),
                  Error);
}

TEST_CASE("pose_error reconstruction identity") {
  Quat z30 = Quat::from_axis_angle({0, 0, 1}, M_PI / 6);
  CHECK(quat_angle(pose_error(z30, z30), Quat::identity()) <= 1e-12);
  CHECK(quat_angle(pose_error(z30, Quat::identity()), z30) <= 1e-12);

  std::mt19937_64 rng(321);
  for (int iter = 0; iter < 2000; ++iter) {
    Quat qt = testutil::random_unit_quat(rng);
    Quat qw = testutil::random_unit_quat(rng);
    Quat qe = pose_error(qt, qw);
    Quat rebuilt = (qe * qw).canonical();
    REQUIRE(testutil::quat_component_distance(rebuilt, qt) <= 1e-9);
    REQUIRE(qe.w >= 0.0);
  }
}

TEST_CASE("contour_rmse") {
  std::vector<Polyline> truth = {{{10, 50}, {90, 50}}};

  ContourSet on_truth;
  for (int x = 10; x <= 90; x += 5) on_truth.points.push_back({x, 50});
  CHECK(contour_rmse(on_truth, truth) == doctest::Approx(0.0).epsilon(1e-12));

  // every point offset 3 px perpendicular: RMSE exactly 3
  ContourSet offset;
  for (int x = 10; x <= 90; x += 5) offset.points.push_back({x, 53});
  CHECK(contour_rmse(offset, truth) == doctest::Approx(3.0).epsilon(1e-9));

  CHECK_THROWS_AS(contour_rmse(ContourSet{}, truth), Error);
  CHECK_THROWS_AS(contour_rmse(on_truth, std::vector<Polyline>{}), Error);
}

TEST_CASE("synthetic generator ground truth") {
  SynthConfig cfg;

  // circle: 360-sample closed polyline
  auto circle = synth_tactile_image(Shape::circle, {160, 120, 0.0},
                                    std::nullopt, cfg);
  REQUIRE(circle.truth.size() == 1);
  CHECK(circle.truth[0].size() == 361);
  for (const auto& p : circle.truth[0]) {
    CHECK(std::hypot(p.x - 160, p.y - 120) == doctest::Approx(60.0));
  }

  // line bundle: five parallel segments
  auto bundle = synth_tactile_image(Shape::line_bundle, {160, 120, 0.0},
                                    std::nullopt, cfg);
  CHECK(bundle.truth.size() == 5);

  // pentagon pushed off-frame: truth clipped, all points inside
  SynthConfig partial = cfg;
  partial.allow_partial = true;
  auto edge = synth_tactile_image(Shape::pentagon, {295, 120, 0.21},
                                  std::nullopt, partial);
  REQUIRE_FALSE(edge.truth.empty());
  double max_x = 0.0;
  for (const auto& line : edge.truth)
    for (const auto& p : line) {
      CHECK(p.x <= 319.0 + 1e-9);
      CHECK(p.x >= -1e-9);
      CHECK(p.y >= -1e-9);
      CHECK(p.y <= 239.0 + 1e-9);
      max_x = std::max(max_x, p.x);
    }
  CHECK(max_x == doctest::Approx(319.0));  // truly touches the border

  // the same pose without allow_partial is an error
  try {
    synth_tactile_image(Shape::pentagon, {295, 120, 0.21}, std::nullopt, cfg);
    FAIL("expected shape-out-of-bounds");
  } catch (const Error& e) {
    CHECK(e.code() == "shape-out-of-bounds");
  }
}

TEST_CASE("extract_contours on a plain ridge") {
  SynthConfig cfg;
  cfg.seed = 3;
  auto synth = synth_tactile_image(Shape::rect_line, {160, 120, 0.35},
                                   std::nullopt, cfg);
  PerceptionConfig pc;
  auto result = extract_contours(synth.image, pc);
  REQUIRE_FALSE(result.contours.points.empty());

  // contour points concentrate within 2 px of the ridge
  CHECK(contour_rmse(result.contours, synth.truth) <= 2.0);

  // thresholds: exact k ratios
  CHECK(result.contours.t_high ==
        pc.k_high * result.contours.t_texture);
  CHECK(result.contours.t_low == pc.k_low * result.contours.t_texture);

  // one dominant line matching the ridge direction (normal = dir + 90 deg)
  REQUIRE_FALSE(result.lines.lines.empty());
  double expected = std::fmod(0.35 + M_PI / 2, M_PI);
  CHECK(std::abs(result.lines.lines[0].theta - expected) <=
        2.0 * M_PI / 180.0);
}

TEST_CASE("extract_contours on a blank noisy frame") {
  TactileImage blank(320, 240, 20);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (auto& p : blank.pixels)
    p = static_cast<uint8_t>(
        std::clamp<long>(std::lround(p + noise(rng)), 0, 255));
  auto result = extract_contours(blank, PerceptionConfig{});
  CHECK(result.contours.points.size() <
        static_cast<size_t>(0.001 * 320 * 240));
  CHECK(result.lines.lines.empty());

  // perfectly flat frame: the all-zero gradient map is an error
  TactileImage flat(320, 240, 20);
  try {
    extract_contours(flat, PerceptionConfig{});
    FAIL("expected all-zero-gradient");
  } catch (const Error& e) {
    CHECK(e.code() == "all-zero-gradient");
  }
}

TEST_CASE("textured frame: dominant line is the boundary, not the stripes") {
  SynthConfig cfg;
  cfg.seed = 11;
  StripeSpec stripes;
  stripes.angle = 0.35 + 0.45;
  auto synth = synth_tactile_image(Shape::rect_line, {160, 120, 0.35}, stripes,
                                   cfg);
  auto result = extract_contours(synth.image, PerceptionConfig{});
  REQUIRE_FALSE(result.lines.lines.empty());
  double boundary_theta = std::fmod(0.35 + M_PI / 2, M_PI);
  double stripe_theta = std::fmod(stripes.angle + M_PI / 2, M_PI);
  double got = result.lines.lines[0].theta;
  CHECK(std::abs(got - boundary_theta) <= 2.0 * M_PI / 180.0);
  CHECK(std::abs(got - stripe_theta) > 5.0 * M_PI / 180.0);
}

TEST_CASE("adaptive threshold monotonicity in k_high") {
  SynthConfig cfg;
  cfg.seed = 21;
  StripeSpec stripes;
  auto synth = synth_tactile_image(Shape::circle, {160, 120, 0.0}, stripes,
                                   cfg);
  std::set<std::pair<int, int>> previous;
  bool first = true;
  for (double k_high : {1.2, 1.6, 2.0, 2.6, 3.2}) {
    PerceptionConfig pc;
    pc.k_high = k_high;
    pc.k_low = 1.0;
    // strong set only: disable chaining effects by equal thresholds
    auto n =
        nonmax_suppress(gradient_field(gaussian_smooth(synth.image, 5, 1.0)));
    double t_texture = extract_contours(synth.image, pc).contours.t_texture;
    auto strong = hysteresis(n, 320, 240, k_high * t_texture,
                             k_high * t_texture);
    std::set<std::pair<int, int>> current;
    for (const auto& p : strong.points) current.insert({p.x, p.y});
    if (!first) {
      for (const auto& p : current) CHECK(previous.count(p) == 1);
    }
    previous = std::move(current);
    first = false;
  }
}

TEST_CASE("rotation equivariance of the dominant line") {
  for (double base : {0.15, 0.35, 0.55}) {
    SynthConfig cfg;
    cfg.seed = 31;
    auto a = synth_tactile_image(Shape::rect_line, {160, 120, base},
                                 std::nullopt, cfg);
    auto b = synth_tactile_image(Shape::rect_line, {160, 120, base + M_PI / 2},
                                 std::nullopt, cfg);
    auto ra = extract_contours(a.image, PerceptionConfig{});
    auto rb = extract_contours(b.image, PerceptionConfig{});
    REQUIRE_FALSE(ra.lines.lines.empty());
    REQUIRE_FALSE(rb.lines.lines.empty());
    double rotated = std::fmod(ra.lines.lines[0].theta + M_PI / 2, M_PI);
    double diff = std::abs(rb.lines.lines[0].theta - rotated);
    diff = std::min(diff, M_PI - diff);  // wrap at the theta seam
    CHECK(diff <= 2.0 * M_PI / 180.0);
  }
}

TEST_CASE("contour JSON round trip") {
  SynthConfig cfg;
  cfg.seed = 41;
  auto synth = synth_tactile_image(Shape::right_angle, {160, 125, 0.26},
                                   std::nullopt, cfg);
  auto result = extract_contours(synth.image, PerceptionConfig{});
  auto doc = contours_to_json(result);
  auto back = contours_from_json(doc);
  CHECK(contours_to_json(back).dump() == doc.dump());
}

TEST_CASE("image codecs round trip") {
  std::mt19937_64 rng(77);
  TactileImage img(63, 41, 0);
  for (auto& p : img.pixels) p = static_cast<uint8_t>(rng() & 0xff);

  CHECK(decode_pgm(encode_pgm(img)) == img);
  CHECK(decode_png(encode_png(img)) == img);

  save_image(img, "/tmp/skill_img_test.png");
  CHECK(load_image("/tmp/skill_img_test.png") == img);
  save_image(img, "/tmp/skill_img_test.pgm");
  CHECK(load_image("/tmp/skill_img_test.pgm") == img);
}
