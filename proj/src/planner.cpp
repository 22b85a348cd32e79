#include "skill/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "skill/error.hpp"

namespace skill::motion {

double collision_loss(const Path3D& path, const OccupancyGrid& grid,
                      double safety_distance) {
  double loss = 0.0;
  for (const auto& wp : path.waypoints) {
    double d = grid.distance_at(wp.position);  // throws out-of-bounds
    double gap = safety_distance - d;
    if (gap > 0.0) loss += gap * gap;
  }
  return loss;
}

namespace {

struct OpenEntry {
  double f;
  double g;
  size_t cell;

  bool operator>(const OpenEntry& o) const {
    if (f != o.f) return f > o.f;
    if (g != o.g) return g > o.g;
    return cell > o.cell;  // deterministic tie-break
  }
};

}  // namespace

Path3D plan_path(const OccupancyGrid& grid, const Vec3& start,
                 const Vec3& goal, const PlannerConfig& config) {
  if (config.safety_distance <= 0.0 || config.collision_weight < 0.0 ||
      config.resolution <= 0.0)
    throw Error("invalid-config",
                "need safety_distance > 0, collision_weight >= 0, "
                "resolution > 0");
  int sx, sy, sz, gx, gy, gz;
  if (!grid.world_to_cell(start, sx, sy, sz) ||
      !grid.world_to_cell(goal, gx, gy, gz))
    throw Error("out-of-bounds", "start or goal outside the grid");
  if (grid.occupied_at(sx, sy, sz) || grid.occupied_at(gx, gy, gz))
    throw Error("start-or-goal-occupied",
                "start or goal lies in an occupied cell");

  size_t start_idx = grid.index(sx, sy, sz);
  size_t goal_idx = grid.index(gx, gy, gz);
  Vec3 goal_center = grid.cell_center(gx, gy, gz);
  double delta = config.safety_distance;
  double lambda = config.collision_weight;

  auto penalty = [&](size_t cell) {
    double gap = delta - grid.distance[cell];
    return gap > 0.0 ? lambda * gap * gap : 0.0;
  };

  std::vector<double> best_g(grid.size(),
                             std::numeric_limits<double>::infinity());
  std::vector<size_t> parent(grid.size(), SIZE_MAX);
  std::vector<uint8_t> closed(grid.size(), 0);
  std::priority_queue<OpenEntry, std::vector<OpenEntry>,
                      std::greater<OpenEntry>>
      open;

  best_g[start_idx] = 0.0;
  {
    Vec3 c = grid.cell_center(sx, sy, sz);
    open.push({(c - goal_center).norm(), 0.0, start_idx});
  }

  const double res = grid.resolution;
  const double step_len[4] = {0.0, res, res * std::sqrt(2.0),
                              res * std::sqrt(3.0)};

  bool found = false;
  while (!open.empty()) {
    OpenEntry top = open.top();
    open.pop();
    if (closed[top.cell]) continue;
    if (top.g > best_g[top.cell]) continue;  // stale entry
    closed[top.cell] = 1;
    if (top.cell == goal_idx) {
      found = true;
      break;
    }

    int cz = static_cast<int>(top.cell / (static_cast<size_t>(grid.nx) * grid.ny));
    size_t rem = top.cell % (static_cast<size_t>(grid.nx) * grid.ny);
    int cy = static_cast<int>(rem / grid.nx);
    int cx = static_cast<int>(rem % grid.nx);

    for (int dz = -1; dz <= 1; ++dz)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0 && dz == 0) continue;
          int nx = cx + dx, ny = cy + dy, nz = cz + dz;
          if (!grid.in_bounds(nx, ny, nz)) continue;
          size_t ni = grid.index(nx, ny, nz);
          if (closed[ni] || grid.occupied[ni]) continue;
          int manh = std::abs(dx) + std::abs(dy) + std::abs(dz);
          double g = top.g + step_len[manh] + penalty(ni);
          if (g < best_g[ni]) {
            best_g[ni] = g;
            parent[ni] = top.cell;
            Vec3 c = grid.cell_center(nx, ny, nz);
            open.push({g + (c - goal_center).norm(), g, ni});
          }
        }
  }

  if (!found) throw Error("no-path", "goal unreachable from start");

  std::vector<size_t> cells;
  for (size_t cur = goal_idx; cur != SIZE_MAX; cur = parent[cur])
    cells.push_back(cur);
  std::reverse(cells.begin(), cells.end());

  Path3D path;
  auto cell_waypoint = [&](size_t idx) {
    int iz = static_cast<int>(idx / (static_cast<size_t>(grid.nx) * grid.ny));
    size_t rem = idx % (static_cast<size_t>(grid.nx) * grid.ny);
    int iy = static_cast<int>(rem / grid.nx);
    int ix = static_cast<int>(rem % grid.nx);
    Waypoint wp;
    wp.position = grid.cell_center(ix, iy, iz);
    wp.clearance = grid.distance[idx];
    return wp;
  };

  Vec3 start_center = grid.cell_center(sx, sy, sz);
  if ((start - start_center).norm() > 1e-12) {
    Waypoint wp;
    wp.position = start;
    wp.clearance = grid.distance[start_idx];
    path.waypoints.push_back(wp);
  }
  for (size_t idx : cells) path.waypoints.push_back(cell_waypoint(idx));
  if ((goal - goal_center).norm() > 1e-12) {
    Waypoint wp;
    wp.position = goal;
    wp.clearance = grid.distance[goal_idx];
    path.waypoints.push_back(wp);
  }

  if (config.smooth) path = shortcut_path(path, grid, delta);

  if (config.hard_check && collision_loss(path, grid, delta) > 0.0)
    throw Error("collision",
                "planned path violates the safety distance with hard "
                "checking enabled");
  return path;
}

double grid_path_cost(const Path3D& path, const OccupancyGrid& grid) {
  long axis = 0, planar = 0, cubic = 0;
  int px = 0, py = 0, pz = 0;
  bool have_prev = false;
  for (const auto& wp : path.waypoints) {
    int ix, iy, iz;
    if (!grid.world_to_cell(wp.position, ix, iy, iz))
      throw Error("out-of-bounds", "waypoint outside the grid");
    if (have_prev) {
      int manh = std::abs(ix - px) + std::abs(iy - py) + std::abs(iz - pz);
      switch (manh) {
        case 0: break;
        case 1: ++axis; break;
        case 2: ++planar; break;
        case 3: ++cubic; break;
        default:
          throw Error("not-grid-adjacent",
                      "consecutive waypoints are not grid neighbors");
      }
    }
    px = ix; py = iy; pz = iz;
    have_prev = true;
  }
  return grid.resolution * (static_cast<double>(axis) +
                            std::sqrt(2.0) * static_cast<double>(planar) +
                            std::sqrt(3.0) * static_cast<double>(cubic));
}

namespace {

bool segment_clear(const Vec3& a, const Vec3& b, const OccupancyGrid& grid,
                   double delta) {
  double len = (b - a).norm();
  int samples = std::max(2, static_cast<int>(std::ceil(len / (grid.resolution * 0.5))) + 1);
  for (int k = 0; k <= samples; ++k) {
    double t = static_cast<double>(k) / samples;
    Vec3 p = a + (b - a) * t;
    int ix, iy, iz;
    if (!grid.world_to_cell(p, ix, iy, iz)) return false;
    size_t idx = grid.index(ix, iy, iz);
    if (grid.occupied[idx]) return false;
    if (grid.distance[idx] < delta) return false;
  }
  return true;
}

}  // namespace

Path3D shortcut_path(const Path3D& path, const OccupancyGrid& grid,
                     double safety_distance) {
  if (path.waypoints.size() <= 2) return path;
  Path3D out;
  size_t i = 0;
  out.waypoints.push_back(path.waypoints.front());
  while (i + 1 < path.waypoints.size()) {
    size_t j = path.waypoints.size() - 1;
    for (; j > i + 1; --j) {
      if (segment_clear(path.waypoints[i].position, path.waypoints[j].position,
                        grid, safety_distance))
        break;
    }
    Waypoint wp = path.waypoints[j];
    wp.clearance = grid.distance_at(wp.position);
    out.waypoints.push_back(wp);
    i = j;
  }
  return out;
}

Endpoints compute_endpoints(const plan::Subtask& subtask,
                            const graph::RequireReport& bindings,
                            const graph::PropertyGraph& scene,
                            double standoff) {
  if (!bindings.satisfied)
    throw Error("require-unsatisfied",
                "subtask '" + subtask.action + "' precondition failed: " +
                    bindings.first_failure());
  const graph::Node& actor = scene.node(subtask.actor);
  const graph::Node& target = scene.node(subtask.target);
  auto actor_pos = actor.position();
  auto target_pos = target.position();
  if (!actor_pos)
    throw Error("missing-pose", "actor '" + subtask.actor + "' has no position");
  if (!target_pos)
    throw Error("missing-pose",
                "target '" + subtask.target + "' has no position");

  Endpoints ep;
  ep.start = actor.pose();
  ep.goal.position = *target_pos + approach_axis(target) * standoff;
  ep.goal.orientation = ep.start.orientation;
  return ep;
}

Vec3 approach_axis(const graph::Node& target) {
  if (auto a = target.vec3_attr("approach_axis")) {
    if (a->norm() == 0.0)
      throw Error("invalid-attribute", "approach_axis must be nonzero");
    // The attribute lives in the node frame; articulated parts carry it
    // along as they rotate.
    Quat q = target.orientation().value_or(Quat::identity());
    return q.rotate(a->normalized());
  }
  return Vec3{0, 0, 1};
}

Path3D joint_trajectory(const graph::JointSpec& joint, const Pose& grasp_pose,
                        double magnitude, double step) {
  if (step <= 0.0) throw Error("invalid-step", "step must be positive");
  if (joint.axis.norm() == 0.0)
    throw Error("zero-axis", "joint axis must be nonzero");
  if (magnitude < joint.limit_lo - 1e-12 ||
      magnitude > joint.limit_hi + 1e-12)
    throw Error("magnitude-outside-limits",
                "magnitude " + std::to_string(magnitude) +
                    " outside joint limits");

  Path3D path;
  if (magnitude == 0.0) {
    path.waypoints.push_back({grasp_pose.position, grasp_pose.orientation});
    return path;
  }

  int n = std::max(1, static_cast<int>(std::ceil(std::abs(magnitude) / step -
                                                 1e-9)));
  Vec3 axis = joint.axis.normalized();

  for (int k = 0; k <= n; ++k) {
    double t = static_cast<double>(k) / n;
    Waypoint wp;
    if (joint.type == graph::JointType::prismatic) {
      wp.position = grasp_pose.position + axis * (t * magnitude);
      wp.orientation = grasp_pose.orientation;
    } else if (joint.type == graph::JointType::revolute) {
      Quat rot = Quat::from_axis_angle(axis, t * magnitude);
      Vec3 radial = grasp_pose.position - joint.origin;
      wp.position = joint.origin + rot.rotate(radial);
      wp.orientation = (rot * grasp_pose.orientation).normalized();
    } else {
      throw Error("magnitude-outside-limits",
                  "fixed joints admit no displacement");
    }
    path.waypoints.push_back(wp);
  }
  return path;
}

nlohmann::json path_to_json(const Path3D& path) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& wp : path.waypoints) {
    arr.push_back(nlohmann::json{{"qw", wp.orientation.w},
                                 {"qx", wp.orientation.x},
                                 {"qy", wp.orientation.y},
                                 {"qz", wp.orientation.z},
                                 {"x", wp.position.x},
                                 {"y", wp.position.y},
                                 {"z", wp.position.z}});
  }
  return arr;
}

}  // namespace skill::motion
