#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "skill/geometry.hpp"

using namespace skill;

TEST_CASE("quaternion algebra") {
  Quat i = Quat::identity();
  CHECK(quat_angle(i * i, i) == 0.0);

  Quat z90 = Quat::from_axis_angle({0, 0, 1}, M_PI / 2);
  Vec3 v = z90.rotate({1, 0, 0});
  CHECK(v.x == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(v.y == doctest::Approx(1.0));

  // Hamilton convention: i * j = k
  Quat qi{0, 1, 0, 0}, qj{0, 0, 1, 0};
  Quat qk = qi * qj;
  CHECK(qk.z == doctest::Approx(1.0));
  CHECK(qk.w == doctest::Approx(0.0));

  std::mt19937_64 rng(1);
  for (int iter = 0; iter < 500; ++iter) {
    Quat a = testutil::random_unit_quat(rng);
    Quat b = testutil::random_unit_quat(rng);
    // product norm closure
    CHECK(std::abs((a * b).norm() - 1.0) <= 1e-12);
    // inverse
    CHECK(testutil::quat_component_distance(a * a.inverse(),
                                            Quat::identity()) <= 1e-12);
    // rotation matches the matrix oracle
    auto ra = testutil::quat_to_matrix(a);
    Vec3 p{0.3, -0.7, 1.1};
    Vec3 rotated = a.rotate(p);
    Vec3 expected{
        ra[0][0] * p.x + ra[0][1] * p.y + ra[0][2] * p.z,
        ra[1][0] * p.x + ra[1][1] * p.y + ra[1][2] * p.z,
        ra[2][0] * p.x + ra[2][1] * p.y + ra[2][2] * p.z,
    };
    CHECK((rotated - expected).norm() <= 1e-12);
  }
}

TEST_CASE("canonicalization and yaw") {
  Quat q{-0.5, 0.5, 0.5, 0.5};
  Quat c = q.canonical();
  CHECK(c.w == 0.5);
  CHECK(c.x == -0.5);

  Quat yaw = Quat::from_axis_angle({0, 0, 1}, 0.7);
  CHECK(yaw_of(yaw) == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("pose composition") {
  Pose base{{1, 2, 3}, Quat::from_axis_angle({0, 0, 1}, M_PI / 2)};
  Pose local{{1, 0, 0}, Quat::identity()};
  Pose world = base.compose(local);
  CHECK(world.position.x == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(world.position.y == doctest::Approx(3.0));

  Pose back = base.inverse_compose(world);
  CHECK((back.position - local.position).norm() <= 1e-12);
  CHECK(quat_angle(back.orientation, local.orientation) <= 1e-12);
}
