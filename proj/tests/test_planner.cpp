#include <doctest.h>

#include <cstring>
#include <fstream>
#include <random>

#include "helpers.hpp"
#include "skill/planner.hpp"

using namespace skill;
using namespace skill::motion;

TEST_CASE("build_occupancy_grid basics") {
  // empty scene: all free, sentinel distances
  graph::PropertyGraph empty(graph::GraphKind::scene);
  Aabb bounds{{0, 0, 0}, {0.4, 0.4, 0.4}};
  auto grid = build_occupancy_grid(empty, bounds, 0.05);
  CHECK(grid.nx == 8);
  for (size_t i = 0; i < grid.size(); ++i) {
    CHECK(grid.occupied[i] == 0);
    CHECK(grid.distance[i] == kFreeSentinel);
  }

  // 0.1 m cube at the center, resolution 0.05: a 2x2x2 occupied block
  // (within one cell of quantization)
  auto scene = testutil::box_scene({{"cube", {0.2, 0.2, 0.2},
                                     {0.05, 0.05, 0.05}}});
  grid = build_occupancy_grid(scene, bounds, 0.05);
  size_t occupied = 0;
  for (auto v : grid.occupied) occupied += v;
  CHECK(occupied >= 8);
  CHECK(occupied <= 27);

  // cell centers far from the cube have distance ~ geometric distance
  // (checked exactly against brute force below)
  auto brute = testutil::brute_distance_field(grid);
  for (size_t i = 0; i < grid.size(); ++i)
    REQUIRE(grid.distance[i] == brute[i]);

  CHECK_THROWS_AS(build_occupancy_grid(scene, bounds, -0.1), Error);

  // node sticking out of bounds
  auto outside = testutil::box_scene({{"far", {0.39, 0.2, 0.2},
                                       {0.05, 0.05, 0.05}}});
  try {
    build_occupancy_grid(outside, bounds, 0.05);
    FAIL("expected node-outside-bounds");
  } catch (const Error& e) {
    CHECK(e.code() == "node-outside-bounds");
  }
}

TEST_CASE("distance field equals brute force on random grids") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> dim(2, 14);
  std::uniform_real_distribution<double> density(0.0, 0.4);
  for (int iter = 0; iter < 40; ++iter) {
    OccupancyGrid g;
    g.origin = {0, 0, 0};
    g.resolution = 0.05;
    g.nx = dim(rng);
    g.ny = dim(rng);
    g.nz = dim(rng);
    g.occupied.assign(g.size(), 0);
    double p = density(rng);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    for (size_t i = 0; i < g.size(); ++i)
      if (coin(rng) < p) g.occupied[i] = 1;
    compute_distance_field(g);
    auto brute = testutil::brute_distance_field(g);
    for (size_t i = 0; i < g.size(); ++i) REQUIRE(g.distance[i] == brute[i]);
  }
}

TEST_CASE("distance field Lipschitz bound over adjacent cells") {
  auto scene = testutil::box_scene({{"a", {0.3, 0.3, 0.1}, {0.06, 0.04, 0.1}},
                                    {"b", {0.7, 0.6, 0.5}, {0.1, 0.1, 0.02}}});
  auto grid = build_occupancy_grid(scene, {{0, 0, 0}, {1.0, 1.0, 0.8}}, 0.04);
  for (int z = 0; z < grid.nz; ++z)
    for (int y = 0; y < grid.ny; ++y)
      for (int x = 0; x < grid.nx; ++x)
        for (int dz = -1; dz <= 1; ++dz)
          for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
              if (!grid.in_bounds(x + dx, y + dy, z + dz)) continue;
              double a = grid.distance[grid.index(x, y, z)];
              double b = grid.distance[grid.index(x + dx, y + dy, z + dz)];
              if (a == kFreeSentinel || b == kFreeSentinel) continue;
              double step =
                  grid.resolution * std::sqrt(double(dx * dx + dy * dy +
                                                     dz * dz));
              REQUIRE(std::abs(a - b) <= step + 1e-12);
            }
}

TEST_CASE("collision_loss values") {
  OccupancyGrid g;
  g.origin = {0, 0, 0};
  g.resolution = 0.05;
  g.nx = g.ny = g.nz = 4;
  g.occupied.assign(g.size(), 0);
  g.distance.assign(g.size(), kFreeSentinel);

  Path3D path;
  path.waypoints.push_back({{0.125, 0.125, 0.125}});
  path.waypoints.push_back({{0.175, 0.125, 0.125}});

  // obstacle-free grid: zero for any path
  CHECK(collision_loss(path, g, 0.05) == 0.0);

  // one waypoint at distance 0.025 with delta 0.05: (0.025)^2
  int ix, iy, iz;
  REQUIRE(g.world_to_cell({0.125, 0.125, 0.125}, ix, iy, iz));
  g.distance[g.index(ix, iy, iz)] = 0.025;
  CHECK(collision_loss(path, g, 0.05) == doctest::Approx(6.25e-4).epsilon(1e-12));

  // clearances >= delta: zero
  g.distance[g.index(ix, iy, iz)] = 0.05;
  CHECK(collision_loss(path, g, 0.05) == 0.0);

  // loss is monotone non-increasing in clearance
  double prev = std::numeric_limits<double>::infinity();
  for (double d : {0.0, 0.01, 0.02, 0.03, 0.04, 0.05, 0.06}) {
    g.distance[g.index(ix, iy, iz)] = d;
    double loss = collision_loss(path, g, 0.05);
    CHECK(loss <= prev);
    prev = loss;
  }

  Path3D outside;
  outside.waypoints.push_back({{5.0, 5.0, 5.0}});
  CHECK_THROWS_AS(collision_loss(outside, g, 0.05), Error);
}

namespace {

OccupancyGrid random_grid(std::mt19937_64& rng, int max_dim,
                          double density) {
  std::uniform_int_distribution<int> dim(4, max_dim);
  OccupancyGrid g;
  g.origin = {0, 0, 0};
  g.resolution = 0.05;
  g.nx = dim(rng);
  g.ny = dim(rng);
  g.nz = dim(rng);
  g.occupied.assign(g.size(), 0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (size_t i = 0; i < g.size(); ++i)
    if (coin(rng) < density) g.occupied[i] = 1;
  compute_distance_field(g);
  return g;
}

}  // namespace

TEST_CASE("A* equals Dijkstra with zero collision weight") {
  std::mt19937_64 rng(4242);
  PlannerConfig cfg;
  cfg.collision_weight = 0.0;
  int solved = 0;
  for (int iter = 0; iter < 60; ++iter) {
    auto g = random_grid(rng, 14, 0.25);
    std::uniform_int_distribution<int> px(0, g.nx - 1), py(0, g.ny - 1),
        pz(0, g.nz - 1);
    int sx = px(rng), sy = py(rng), sz = pz(rng);
    int gx = px(rng), gy = py(rng), gz = pz(rng);
    if (g.occupied_at(sx, sy, sz) || g.occupied_at(gx, gy, gz)) continue;
    auto oracle = testutil::dijkstra_cost(g, sx, sy, sz, gx, gy, gz);
    Vec3 start = g.cell_center(sx, sy, sz);
    Vec3 goal = g.cell_center(gx, gy, gz);
    if (!oracle.reachable) {
      CHECK_THROWS_AS(plan_path(g, start, goal, cfg), Error);
      continue;
    }
    auto path = plan_path(g, start, goal, cfg);
    REQUIRE(grid_path_cost(path, g) == oracle.cost);
    ++solved;
  }
  CHECK(solved > 20);
}

TEST_CASE("Euclidean heuristic is admissible") {
  // straight-line distance from any free cell to the goal never exceeds
  // the true remaining cost (spot check against per-cell Dijkstra)
  std::mt19937_64 rng(11);
  for (int iter = 0; iter < 5; ++iter) {
    auto g = random_grid(rng, 10, 0.2);
    std::uniform_int_distribution<int> px(0, g.nx - 1), py(0, g.ny - 1),
        pz(0, g.nz - 1);
    int gx = px(rng), gy = py(rng), gz = pz(rng);
    if (g.occupied_at(gx, gy, gz)) continue;
    Vec3 goal = g.cell_center(gx, gy, gz);
    for (int z = 0; z < g.nz; ++z)
      for (int y = 0; y < g.ny; ++y)
        for (int x = 0; x < g.nx; ++x) {
          if (g.occupied_at(x, y, z)) continue;
          auto truth = testutil::dijkstra_cost(g, x, y, z, gx, gy, gz);
          if (!truth.reachable) continue;
          double h = (g.cell_center(x, y, z) - goal).norm();
          REQUIRE(h <= truth.cost + 1e-9);
        }
  }
}

TEST_CASE("grid debug dump layout") {
  auto scene = testutil::box_scene({{"cube", {0.2, 0.2, 0.2},
                                     {0.05, 0.05, 0.05}}});
  auto grid = build_occupancy_grid(scene, {{0, 0, 0}, {0.4, 0.4, 0.4}}, 0.05);
  std::string path = "/tmp/skill_grid_dump.bin";
  dump_grid(grid, path);
  std::ifstream in(path, std::ios::binary);
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  REQUIRE(bytes.size() == 24 + grid.size());
  uint32_t dims[3];
  std::memcpy(dims, bytes.data(), 12);
  CHECK(dims[0] == static_cast<uint32_t>(grid.nx));
  CHECK(dims[1] == static_cast<uint32_t>(grid.ny));
  CHECK(dims[2] == static_cast<uint32_t>(grid.nz));
  double res;
  std::memcpy(&res, bytes.data() + 16, 8);
  CHECK(res == grid.resolution);
}

TEST_CASE("straight-line path on an empty grid") {
  OccupancyGrid g;
  g.origin = {0, 0, 0};
  g.resolution = 0.05;
  g.nx = g.ny = g.nz = 10;
  g.occupied.assign(g.size(), 0);
  compute_distance_field(g);
  PlannerConfig cfg;
  cfg.collision_weight = 0.0;
  auto path = plan_path(g, g.cell_center(1, 5, 5), g.cell_center(8, 5, 5), cfg);
  // 7 axis steps
  CHECK(grid_path_cost(path, g) == doctest::Approx(7 * 0.05).epsilon(1e-12));
  CHECK(path.waypoints.size() == 8);
  CHECK((path.waypoints.front().position - g.cell_center(1, 5, 5)).norm() ==
        0.0);
  CHECK((path.waypoints.back().position - g.cell_center(8, 5, 5)).norm() ==
        0.0);
}

TEST_CASE("wall with a gap: path goes through the gap") {
  // wall at x-cell 5 spanning everything except one opening
  OccupancyGrid g;
  g.origin = {0, 0, 0};
  g.resolution = 0.05;
  g.nx = 11;
  g.ny = g.nz = 9;
  g.occupied.assign(g.size(), 0);
  for (int z = 0; z < g.nz; ++z)
    for (int y = 0; y < g.ny; ++y)
      if (!(y == 4 && z == 4)) g.occupied[g.index(5, y, z)] = 1;
  compute_distance_field(g);

  PlannerConfig cfg;
  cfg.collision_weight = 0.0;
  auto path = plan_path(g, g.cell_center(1, 1, 1), g.cell_center(9, 7, 7), cfg);
  auto oracle = testutil::dijkstra_cost(g, 1, 1, 1, 9, 7, 7);
  REQUIRE(oracle.reachable);
  CHECK(grid_path_cost(path, g) == oracle.cost);
  bool through_gap = false;
  for (const auto& wp : path.waypoints) {
    int ix, iy, iz;
    g.world_to_cell(wp.position, ix, iy, iz);
    if (ix == 5) {
      CHECK(iy == 4);
      CHECK(iz == 4);
      through_gap = true;
    }
  }
  CHECK(through_gap);

  // sealing the gap makes the goal unreachable
  g.occupied[g.index(5, 4, 4)] = 1;
  compute_distance_field(g);
  try {
    plan_path(g, g.cell_center(1, 1, 1), g.cell_center(9, 7, 7), cfg);
    FAIL("expected no-path");
  } catch (const Error& e) {
    CHECK(e.code() == "no-path");
  }

  // start inside an obstacle
  try {
    plan_path(g, g.cell_center(5, 0, 0), g.cell_center(9, 7, 7), cfg);
    FAIL("expected start-or-goal-occupied");
  } catch (const Error& e) {
    CHECK(e.code() == "start-or-goal-occupied");
  }
}

TEST_CASE("safety: large collision weight keeps clearance") {
  // narrow vs wide opening: the planner should pay extra length for the
  // wide one when the penalty is strong
  auto scene = testutil::box_scene({
      {"left", {0.5, 0.2, 0.3}, {0.02, 0.2, 0.3}},
      {"right", {0.5, 0.85, 0.3}, {0.02, 0.15, 0.3}},
  });
  // gap between y=0.4 and y=0.7 is 0.3 wide: plenty
  auto grid = build_occupancy_grid(scene, {{0, 0, 0}, {1.0, 1.0, 0.6}}, 0.02);
  PlannerConfig cfg;
  cfg.safety_distance = 0.05;
  cfg.collision_weight = 1e4;
  auto path = plan_path(grid, {0.2, 0.55, 0.3}, {0.8, 0.55, 0.3}, cfg);
  for (const auto& wp : path.waypoints)
    CHECK(wp.clearance >= cfg.safety_distance - grid.resolution);
  CHECK(collision_loss(path, grid, cfg.safety_distance) == 0.0);
}

TEST_CASE("narrowed corridor forces positive loss and hard-check rejection") {
  // the only way through is a 0.04 m slot: clearance < delta everywhere
  OccupancyGrid g;
  g.origin = {0, 0, 0};
  g.resolution = 0.02;
  g.nx = 30;
  g.ny = 20;
  g.nz = 10;
  g.occupied.assign(g.size(), 0);
  for (int z = 0; z < g.nz; ++z)
    for (int y = 0; y < g.ny; ++y)
      if (y != 10 && y != 11)
        for (int x = 14; x <= 15; ++x) g.occupied[g.index(x, y, z)] = 1;
  compute_distance_field(g);

  PlannerConfig cfg;
  cfg.safety_distance = 0.05;
  cfg.collision_weight = 1e4;
  auto path = plan_path(g, g.cell_center(2, 10, 5), g.cell_center(27, 10, 5),
                        cfg);
  CHECK(collision_loss(path, g, cfg.safety_distance) > 0.0);

  cfg.hard_check = true;
  try {
    plan_path(g, g.cell_center(2, 10, 5), g.cell_center(27, 10, 5), cfg);
    FAIL("expected collision");
  } catch (const Error& e) {
    CHECK(e.code() == "collision");
  }
}

TEST_CASE("compute_endpoints offset arithmetic") {
  graph::PropertyGraph scene(graph::GraphKind::scene);
  {
    graph::Node g;
    g.id = "gripper";
    g.attributes = graph::Json{{"position", {0.1, 0.2, 0.9}}};
    scene.add_node(g);
    graph::Node h;
    h.id = "handle";
    h.attributes = graph::Json{{"position", {0.5, 0.0, 0.7}},
                               {"approach_axis", {-1, 0, 0}}};
    scene.add_node(h);
  }
  plan::Subtask subtask{"approach", "gripper", "handle"};
  graph::RequireReport satisfied;  // empty conjunction holds

  auto ep = compute_endpoints(subtask, satisfied, scene, 0.05);
  CHECK(ep.start.position.x == doctest::Approx(0.1));
  CHECK(ep.goal.position.x == doctest::Approx(0.45).epsilon(1e-12));
  CHECK(ep.goal.position.y == doctest::Approx(0.0));
  CHECK(ep.goal.position.z == doctest::Approx(0.7));

  // actor already at the goal: zero-length request
  scene.set_node_attr("gripper", "position", graph::Json::array({0.45, 0.0, 0.7}));
  ep = compute_endpoints(subtask, satisfied, scene, 0.05);
  CHECK((ep.start.position - ep.goal.position).norm() == doctest::Approx(0.0));

  // unsatisfied require reports the failing predicate
  graph::RequireReport failing;
  failing.satisfied = false;
  failing.entries.push_back(
      {{"drawer", "open", graph::Comparator::eq, graph::Json(true)},
       graph::Json(false),
       false});
  try {
    compute_endpoints(subtask, failing, scene, 0.05);
    FAIL("expected require-unsatisfied");
  } catch (const Error& e) {
    CHECK(e.code() == "require-unsatisfied");
    CHECK(std::string(e.what()).find("drawer.open") != std::string::npos);
  }

  // missing pose attribute
  graph::PropertyGraph bare(graph::GraphKind::scene);
  graph::Node a;
  a.id = "gripper";
  bare.add_node(a);
  graph::Node b;
  b.id = "handle";
  bare.add_node(b);
  CHECK_THROWS_AS(compute_endpoints(subtask, satisfied, bare, 0.05), Error);
}

TEST_CASE("joint_trajectory prismatic") {
  graph::JointSpec joint;
  joint.type = graph::JointType::prismatic;
  joint.axis = {1, 0, 0};
  joint.limit_lo = 0.0;
  joint.limit_hi = 0.4;
  Pose grasp{{0.2, 0.3, 0.4}, Quat::identity()};

  auto path = joint_trajectory(joint, grasp, 0.3, 0.05);
  REQUIRE(path.waypoints.size() == 7);
  CHECK(path.waypoints.front().position.x == doctest::Approx(0.2));
  CHECK(path.waypoints.back().position.x == doctest::Approx(0.5));
  for (size_t i = 0; i < path.waypoints.size(); ++i) {
    CHECK(path.waypoints[i].position.x ==
          doctest::Approx(0.2 + 0.05 * i).epsilon(1e-12));
    CHECK(path.waypoints[i].position.y == doctest::Approx(0.3));
  }

  // magnitude 0: single waypoint
  auto still = joint_trajectory(joint, grasp, 0.0, 0.05);
  CHECK(still.waypoints.size() == 1);

  // outside the limits
  try {
    joint_trajectory(joint, grasp, 0.5, 0.05);
    FAIL("expected magnitude-outside-limits");
  } catch (const Error& e) {
    CHECK(e.code() == "magnitude-outside-limits");
  }
  CHECK_THROWS_AS(joint_trajectory(joint, grasp, 0.3, 0.0), Error);
}

TEST_CASE("joint_trajectory revolute preserves the radius") {
  graph::JointSpec joint;
  joint.type = graph::JointType::revolute;
  joint.axis = {0, 0, 1};
  joint.origin = {0.4, 0.0, 0.7};
  joint.limit_lo = 0.0;
  joint.limit_hi = M_PI / 2;
  Pose grasp{{0.4, 0.35, 0.7}, Quat::identity()};

  auto path = joint_trajectory(joint, grasp, M_PI / 2, 0.05);
  double r0 = (grasp.position - joint.origin).norm();
  for (const auto& wp : path.waypoints) {
    Vec3 radial = wp.position - joint.origin;
    CHECK(std::abs(radial.norm() - r0) <= 1e-9);
    CHECK(wp.position.z == doctest::Approx(0.7));
  }
  // orientation is co-rotated: the final frame is rotated by 90 deg
  CHECK(quat_angle(path.waypoints.back().orientation,
                   Quat::from_axis_angle({0, 0, 1}, M_PI / 2)) <= 1e-9);
}

TEST_CASE("shortcut smoothing keeps endpoints and clearance") {
  auto scene = testutil::box_scene({{"block", {0.5, 0.5, 0.3},
                                     {0.06, 0.06, 0.3}}});
  auto grid = build_occupancy_grid(scene, {{0, 0, 0}, {1.0, 1.0, 0.6}}, 0.02);
  PlannerConfig cfg;
  cfg.collision_weight = 1e4;
  auto raw = plan_path(grid, {0.2, 0.5, 0.3}, {0.8, 0.5, 0.3}, cfg);
  auto smooth = shortcut_path(raw, grid, cfg.safety_distance);
  CHECK(smooth.waypoints.size() <= raw.waypoints.size());
  CHECK((smooth.waypoints.front().position - raw.waypoints.front().position)
            .norm() == 0.0);
  CHECK((smooth.waypoints.back().position - raw.waypoints.back().position)
            .norm() == 0.0);
  CHECK(collision_loss(smooth, grid, cfg.safety_distance) == 0.0);
}
