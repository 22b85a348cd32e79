#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "skill/graph.hpp"
#include "skill/planner.hpp"
#include "skill/provider.hpp"
#include "skill/synth.hpp"
#include "skill/task_transfer.hpp"

namespace skill::sim {

using Json = nlohmann::json;

/// Eq-style success metric: 2 on success, 0.25 * (1 - tanh(10 d)) otherwise,
/// with d the gripper-to-goal distance in meters. Throws negative-distance.
double reward(bool success, double distance);

struct WorldState {
  graph::PropertyGraph scene{graph::GraphKind::scene};
  Pose gripper;
  std::optional<std::string> held;  // scene node id
  Pose grasp_offset;                // held pose in the gripper frame
  std::map<std::string, double> articulation;  // joint edge id -> value
};

struct SubtaskStatus {
  plan::Subtask subtask;
  bool success = false;
  std::string reason;  // empty on success
  double collision_loss = 0.0;
  int waypoints = 0;
};

struct RunReport {
  std::vector<SubtaskStatus> subtasks;
  bool success = false;
  double total_collision_loss = 0.0;
  int total_waypoints = 0;
  double reward = 0.0;
  std::optional<double> stack_pose_error_deg;  // residual after correction
};

Json report_to_json(const RunReport& report);
RunReport report_from_json(const Json& doc);

struct ScenarioConfig {
  motion::PlannerConfig planner;
  motion::Aabb bounds{{0, 0, 0}, {1.2, 1.2, 1.2}};
  double standoff = 0.05;          // approach standoff, meters
  double release_retreat = 0.12;   // backoff after releasing, meters
  double stack_height_offset = 0.12;
  double pull_step = 0.02;         // meters or radians per waypoint
  Quat sensor_in_ee = Quat::identity();  // q2
  Quat stack_target = Quat::identity();  // q_t
  tactile::PerceptionConfig perception;
  tactile::SynthConfig tactile_synth;
  uint64_t seed = 1;
};

/// A scenario fixture: the three skill-library graphs plus execution
/// parameters. `binding_order` names the state-graph binding evaluated for
/// each plan step, in order.
struct Scenario {
  graph::PropertyGraph task{graph::GraphKind::task};
  graph::PropertyGraph scene{graph::GraphKind::scene};
  graph::PropertyGraph state{graph::GraphKind::state};
  std::vector<plan::Subtask> reference_plan;
  std::optional<std::vector<plan::Subtask>> plan;  // direct plan, if given
  std::string new_task_description;                // for LLM transfer
  std::vector<std::string> notes;
  std::vector<std::string> binding_order;
  std::string gripper_id = "gripper";
  ScenarioConfig config;
};

Scenario load_scenario(const std::string& path);
Scenario scenario_from_json(const Json& doc);

/// Deterministic kinematic executor for one scenario.
class Simulator {
 public:
  explicit Simulator(const Scenario& scenario);

  const WorldState& world() const { return world_; }
  WorldState& world() { return world_; }

  /// Applies one subtask given its planned trajectory: checks the require
  /// binding, drives the gripper (held object rigidly attached), advances
  /// articulations for pulls, and fires the obtain effects. Throws
  /// require-unsatisfied, joint-constraint, collision, ...
  void step_action(const plan::Subtask& subtask, const std::string& binding_id,
                   const motion::Path3D& trajectory);

  /// Plans and executes one subtask end to end.
  SubtaskStatus run_subtask(const plan::Subtask& subtask,
                            const std::string& binding_id);

  /// Executes a validated plan, stopping at the first failure.
  RunReport run(const std::vector<plan::Subtask>& plan);

  /// Residual in-plane error (degrees) of the last tactile correction.
  std::optional<double> last_stack_error_deg() const {
    return stack_error_deg_;
  }

  /// Grid used for the most recent run_subtask call (for plots/debugging).
  const motion::OccupancyGrid* last_grid() const {
    return last_grid_ ? &*last_grid_ : nullptr;
  }

  /// Executed trajectories of the last run, one per completed subtask.
  const std::vector<motion::Path3D>& trajectory_log() const {
    return trajectories_;
  }

 private:
  motion::OccupancyGrid build_grid(const plan::Subtask& subtask) const;
  std::set<std::string> attach_component(const std::string& id) const;
  struct JointBinding {
    std::string edge_id;
    graph::JointSpec spec;
    std::string moving_part;
  };
  JointBinding find_joint(const std::string& target) const;
  void move_gripper_along(const motion::Path3D& trajectory);
  void articulate(const JointBinding& joint, double delta);
  Quat tactile_correction();

  const Scenario& scenario_;
  WorldState world_;
  std::optional<double> stack_error_deg_;
  std::optional<motion::OccupancyGrid> last_grid_;
  std::vector<motion::Path3D> trajectories_;
  uint64_t frame_counter_ = 0;
};

/// Convenience: resolve the plan (direct or via provider transfer), run it,
/// and return the report.
RunReport run_scenario(const Scenario& scenario,
                       llm::ChatProvider* provider = nullptr);

}  // namespace skill::sim
