#pragma once

#include <optional>
#include <vector>

#include <json.hpp>

#include "skill/occupancy.hpp"
#include "skill/task_transfer.hpp"

namespace skill::motion {

struct Waypoint {
  Vec3 position;
  Quat orientation = Quat::identity();
  double clearance = kFreeSentinel;  // meters to nearest obstacle cell
};

struct Path3D {
  std::vector<Waypoint> waypoints;

  bool empty() const { return waypoints.empty(); }
  size_t size() const { return waypoints.size(); }
};

struct PlannerConfig {
  double safety_distance = 0.05;   // delta, meters
  double collision_weight = 1e4;   // lambda in the A* edge cost
  double resolution = 0.02;        // meters per cell
  bool hard_check = false;         // reject paths with positive loss
  bool smooth = false;             // shortcut smoothing after A*
  // heuristic: euclidean (the only one)
};

/// Collision loss over waypoints: sum of max(0, delta - d)^2, with d taken
/// from the grid distance field. Throws out-of-bounds.
double collision_loss(const Path3D& path, const OccupancyGrid& grid,
                      double safety_distance);

/// A* over the 26-connected grid. Edge cost is the Euclidean step length
/// plus collision_weight * max(0, delta - d(cell))^2 of the entered cell.
/// With collision_weight = 0 the result is shortest in step length.
/// Throws start-or-goal-occupied, out-of-bounds, no-path, and collision
/// when hard_check is set and the loss is positive.
Path3D plan_path(const OccupancyGrid& grid, const Vec3& start,
                 const Vec3& goal, const PlannerConfig& config);

/// Canonical step-length cost of an (unsmoothed) grid path: counts axis,
/// planar-diagonal and cubic-diagonal steps between the traversed cells and
/// evaluates res * (a + b*sqrt(2) + c*sqrt(3)).
double grid_path_cost(const Path3D& path, const OccupancyGrid& grid);

/// Greedy shortcutting: replaces waypoint runs by straight segments whose
/// samples stay in free cells with clearance >= delta.
Path3D shortcut_path(const Path3D& path, const OccupancyGrid& grid,
                     double safety_distance);

struct Endpoints {
  Pose start;
  Pose goal;
};

/// Start = current actor pose; goal = target position offset along its
/// approach axis by `standoff`. Throws require-unsatisfied and missing-pose.
Endpoints compute_endpoints(const plan::Subtask& subtask,
                            const graph::RequireReport& bindings,
                            const graph::PropertyGraph& scene,
                            double standoff = 0.05);

/// World-frame approach direction of a node: its "approach_axis" attribute
/// (node frame, rotated by the node's orientation), default +z.
Vec3 approach_axis(const graph::Node& target);

/// Joint-constrained trajectory from a grasp pose.
/// Prismatic: straight line along the axis, sampled every `step` meters.
/// Revolute: circular arc about (origin, axis), sampled every `step`
/// radians, orientations co-rotated. Throws magnitude-outside-limits and
/// invalid-step.
Path3D joint_trajectory(const graph::JointSpec& joint, const Pose& grasp_pose,
                        double magnitude, double step);

nlohmann::json path_to_json(const Path3D& path);

}  // namespace skill::motion
