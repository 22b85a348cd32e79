#include "skill/sim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>

namespace skill::sim {

double reward(bool success, double distance) {
  if (distance < 0.0)
    throw Error("negative-distance", "reward distance must be >= 0");
  if (success) return 2.0;
  return 0.25 * (1.0 - std::tanh(10.0 * distance));
}

// ---------------------------------------------------------------------------
// Report serialization.

Json report_to_json(const RunReport& report) {
  Json subtasks = Json::array();
  for (const auto& s : report.subtasks) {
    subtasks.push_back(Json{{"action", s.subtask.action},
                            {"actor", s.subtask.actor},
                            {"collision_loss", s.collision_loss},
                            {"reason", s.reason},
                            {"success", s.success},
                            {"target", s.subtask.target},
                            {"waypoints", s.waypoints}});
  }
  Json doc{{"reward", report.reward},
           {"subtasks", subtasks},
           {"success", report.success},
           {"total_collision_loss", report.total_collision_loss},
           {"total_waypoints", report.total_waypoints}};
  if (report.stack_pose_error_deg)
    doc["stack_pose_error_deg"] = *report.stack_pose_error_deg;
  return doc;
}

RunReport report_from_json(const Json& doc) {
  RunReport report;
  for (const auto& js : doc.at("subtasks")) {
    SubtaskStatus s;
    s.subtask = {js.at("action").get<std::string>(),
                 js.at("actor").get<std::string>(),
                 js.at("target").get<std::string>()};
    s.success = js.at("success").get<bool>();
    s.reason = js.at("reason").get<std::string>();
    s.collision_loss = js.at("collision_loss").get<double>();
    s.waypoints = js.at("waypoints").get<int>();
    report.subtasks.push_back(std::move(s));
  }
  report.success = doc.at("success").get<bool>();
  report.total_collision_loss = doc.at("total_collision_loss").get<double>();
  report.total_waypoints = doc.at("total_waypoints").get<int>();
  report.reward = doc.at("reward").get<double>();
  if (doc.contains("stack_pose_error_deg"))
    report.stack_pose_error_deg = doc.at("stack_pose_error_deg").get<double>();
  return report;
}

// ---------------------------------------------------------------------------
// Scenario loading.

namespace {

Quat quat_from_json(const Json& arr) {
  if (!arr.is_array() || arr.size() != 4)
    throw Error("schema-violation", "quaternion must be [w,x,y,z]");
  Quat q{arr[0].get<double>(), arr[1].get<double>(), arr[2].get<double>(),
         arr[3].get<double>()};
  if (std::abs(q.norm() - 1.0) > 1e-9)
    throw Error("invalid-quaternion", "scenario quaternion is not unit norm");
  return q;
}

Vec3 vec3_from_json(const Json& arr) {
  if (!arr.is_array() || arr.size() != 3)
    throw Error("schema-violation", "vector must be [x,y,z]");
  return {arr[0].get<double>(), arr[1].get<double>(), arr[2].get<double>()};
}

}  // namespace

Scenario scenario_from_json(const Json& doc) {
  Scenario s;
  s.task = graph::graph_from_json(doc.at("task_graph"));
  s.scene = graph::graph_from_json(doc.at("scene_graph"));
  s.state = graph::graph_from_json(doc.at("state_graph"));
  if (s.task.kind() != graph::GraphKind::task ||
      s.scene.kind() != graph::GraphKind::scene ||
      s.state.kind() != graph::GraphKind::state)
    throw Error("schema-violation", "scenario graphs have mismatched kinds");

  s.reference_plan = plan::plan_from_json(doc.at("reference_plan"));
  if (doc.contains("plan")) s.plan = plan::plan_from_json(doc.at("plan"));
  if (doc.contains("new_task"))
    s.new_task_description = doc.at("new_task").get<std::string>();
  if (doc.contains("notes"))
    for (const auto& n : doc.at("notes"))
      s.notes.push_back(n.get<std::string>());
  for (const auto& b : doc.at("binding_order"))
    s.binding_order.push_back(b.get<std::string>());

  const Json& sc = doc.at("scenario");
  if (sc.contains("gripper")) s.gripper_id = sc.at("gripper").get<std::string>();
  if (!s.scene.has_node(s.gripper_id))
    throw Error("schema-violation",
                "scene has no gripper node '" + s.gripper_id + "'");

  ScenarioConfig& cfg = s.config;
  if (sc.contains("bounds")) {
    cfg.bounds.lo = vec3_from_json(sc.at("bounds").at("lo"));
    cfg.bounds.hi = vec3_from_json(sc.at("bounds").at("hi"));
  }
  if (sc.contains("resolution"))
    cfg.planner.resolution = sc.at("resolution").get<double>();
  if (sc.contains("safety_distance"))
    cfg.planner.safety_distance = sc.at("safety_distance").get<double>();
  if (sc.contains("collision_weight"))
    cfg.planner.collision_weight = sc.at("collision_weight").get<double>();
  if (sc.contains("hard_check"))
    cfg.planner.hard_check = sc.at("hard_check").get<bool>();
  if (sc.contains("smooth")) cfg.planner.smooth = sc.at("smooth").get<bool>();
  if (sc.contains("standoff")) cfg.standoff = sc.at("standoff").get<double>();
  if (sc.contains("release_retreat"))
    cfg.release_retreat = sc.at("release_retreat").get<double>();
  if (sc.contains("stack_height_offset"))
    cfg.stack_height_offset = sc.at("stack_height_offset").get<double>();
  if (sc.contains("pull_step")) cfg.pull_step = sc.at("pull_step").get<double>();
  if (sc.contains("sensor_in_ee"))
    cfg.sensor_in_ee = quat_from_json(sc.at("sensor_in_ee"));
  if (sc.contains("stack_target"))
    cfg.stack_target = quat_from_json(sc.at("stack_target"));
  if (sc.contains("seed")) cfg.seed = sc.at("seed").get<uint64_t>();
  if (sc.contains("tactile")) {
    const Json& t = sc.at("tactile");
    if (t.contains("ridge_amplitude"))
      cfg.tactile_synth.ridge_amplitude = t.at("ridge_amplitude").get<double>();
    if (t.contains("ridge_sigma"))
      cfg.tactile_synth.ridge_sigma = t.at("ridge_sigma").get<double>();
    if (t.contains("noise_sigma"))
      cfg.tactile_synth.noise_sigma = t.at("noise_sigma").get<double>();
    if (t.contains("min_votes"))
      cfg.perception.min_votes = t.at("min_votes").get<int>();
  }
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot open scenario '" + path + "'");
  Json doc;
  try {
    in >> doc;
  } catch (const Json::parse_error& e) {
    throw Error("schema-violation",
                "invalid JSON in '" + path + "': " + e.what());
  }
  return scenario_from_json(doc);
}

// ---------------------------------------------------------------------------
// Simulator.

Simulator::Simulator(const Scenario& scenario)
    : scenario_(scenario) {
  world_.scene = scenario.scene;
  const graph::Node& gripper = world_.scene.node(scenario.gripper_id);
  world_.gripper = gripper.pose();
}

std::set<std::string> Simulator::attach_component(const std::string& id) const {
  std::set<std::string> comp{id};
  std::deque<std::string> frontier{id};
  while (!frontier.empty()) {
    std::string cur = frontier.front();
    frontier.pop_front();
    for (const auto& [eid, e] : world_.scene.edges()) {
      if (e.relation != "attach") continue;
      std::string other;
      if (e.from == cur)
        other = e.to;
      else if (e.to == cur)
        other = e.from;
      else
        continue;
      if (comp.insert(other).second) frontier.push_back(other);
    }
  }
  return comp;
}

Simulator::JointBinding Simulator::find_joint(const std::string& target) const {
  std::set<std::string> comp = attach_component(target);
  for (const auto& [eid, e] : world_.scene.edges()) {
    if (e.relation != "joint") continue;
    auto spec = e.joint();
    if (!spec) continue;
    if (comp.count(spec->child))
      return {eid, *spec, spec->child};
  }
  throw Error("no-joint",
              "no joint drives '" + target + "' or its attached parts");
}

motion::OccupancyGrid Simulator::build_grid(
    const plan::Subtask& subtask) const {
  std::set<std::string> exclude{scenario_.gripper_id};
  for (const auto& id : attach_component(subtask.target)) exclude.insert(id);
  if (world_.held)
    for (const auto& id : attach_component(*world_.held)) exclude.insert(id);
  return motion::build_occupancy_grid(world_.scene, scenario_.config.bounds,
                                      scenario_.config.planner.resolution,
                                      exclude);
}

void Simulator::move_gripper_along(const motion::Path3D& trajectory) {
  for (const auto& wp : trajectory.waypoints) {
    world_.gripper.position = wp.position;
    if (world_.held) {
      Pose held_pose = world_.gripper.compose(world_.grasp_offset);
      world_.scene.set_node_attr(
          *world_.held, "position",
          Json::array({held_pose.position.x, held_pose.position.y,
                       held_pose.position.z}));
      world_.scene.set_node_attr(
          *world_.held, "orientation",
          Json::array({held_pose.orientation.w, held_pose.orientation.x,
                       held_pose.orientation.y, held_pose.orientation.z}));
    }
  }
}

void Simulator::articulate(const JointBinding& joint, double delta) {
  double current = 0.0;
  if (auto it = world_.articulation.find(joint.edge_id);
      it != world_.articulation.end())
    current = it->second;
  double next = current + delta;
  if (next < joint.spec.limit_lo - 1e-9 || next > joint.spec.limit_hi + 1e-9)
    throw Error("joint-limit", "articulation " + std::to_string(next) +
                                   " outside joint limits");

  // Everything attached to or resting on the moving part goes with it.
  std::set<std::string> moving = attach_component(joint.moving_part);
  std::deque<std::string> frontier(moving.begin(), moving.end());
  while (!frontier.empty()) {
    std::string cur = frontier.front();
    frontier.pop_front();
    for (const auto& [eid, e] : world_.scene.edges()) {
      if (e.relation != "on" && e.relation != "attach") continue;
      if (e.to != cur) continue;  // "X on Y": X rides on Y
      if (moving.insert(e.from).second) frontier.push_back(e.from);
    }
  }

  for (const auto& id : moving) {
    const graph::Node& node = world_.scene.node(id);
    auto pos = node.position();
    if (!pos) continue;
    Vec3 new_pos;
    Quat new_q = node.orientation().value_or(Quat::identity());
    if (joint.spec.type == graph::JointType::prismatic) {
      new_pos = *pos + joint.spec.axis * delta;
    } else {
      Quat rot = Quat::from_axis_angle(joint.spec.axis, delta);
      new_pos = joint.spec.origin + rot.rotate(*pos - joint.spec.origin);
      new_q = (rot * new_q).normalized();
    }
    world_.scene.set_node_attr(
        id, "position", Json::array({new_pos.x, new_pos.y, new_pos.z}));
    world_.scene.set_node_attr(
        id, "orientation", Json::array({new_q.w, new_q.x, new_q.y, new_q.z}));
  }
  world_.articulation[joint.edge_id] = next;
}

Quat Simulator::tactile_correction() {
  if (!world_.held)
    throw Error("nothing-held", "tactile correction needs a held object");
  const ScenarioConfig& cfg = scenario_.config;
  Quat q3 = world_.gripper.orientation;
  Quat q2 = cfg.sensor_in_ee;
  Quat q_cup = world_.scene.node(*world_.held)
                   .orientation()
                   .value_or(Quat::identity());

  // In-plane angle of the cup stripes as seen by the sensor.
  Quat q_rel = ((q3 * q2).inverse() * q_cup).normalized();
  double theta_true = 2.0 * std::atan2(q_rel.z, q_rel.w);
  while (theta_true > M_PI) theta_true -= 2.0 * M_PI;
  while (theta_true <= -M_PI) theta_true += 2.0 * M_PI;

  tactile::SynthConfig synth_cfg = cfg.tactile_synth;
  synth_cfg.seed = cfg.seed * 2654435761ULL + frame_counter_++;
  tactile::ShapePose pose{synth_cfg.width / 2.0, synth_cfg.height / 2.0,
                          theta_true};
  auto frame = tactile::synth_tactile_image(tactile::Shape::line_bundle, pose,
                                            std::nullopt, synth_cfg);

  auto perception = tactile::extract_contours(frame.image, cfg.perception);
  Quat q1 = tactile::pose_from_lines(perception.lines);
  // Stripe direction is ambiguous mod pi; take the nearer representative.
  double theta = perception.lines.lines.front().theta;
  if (theta > M_PI / 2.0)
    q1 = Quat::from_axis_angle({0, 0, 1}, theta - M_PI);

  Quat q_w = tactile::world_pose(q1, q2, q3);
  return tactile::pose_error(cfg.stack_target, q_w);
}

void Simulator::step_action(const plan::Subtask& subtask,
                            const std::string& binding_id,
                            const motion::Path3D& trajectory) {
  graph::BindingContext ctx{subtask.actor, subtask.target};
  auto require = graph::query_require(scenario_.state, world_.scene,
                                      binding_id, ctx);
  if (!require.satisfied)
    throw Error("require-unsatisfied", "subtask '" + binding_id +
                                           "' precondition failed: " +
                                           require.first_failure());
  if (trajectory.empty())
    throw Error("empty-trajectory", "a trajectory needs >= 1 waypoint");
  if ((trajectory.waypoints.front().position - world_.gripper.position)
          .norm() > 1e-6)
    throw Error("trajectory-mismatch",
                "trajectory does not start at the gripper pose");

  const std::string& action = subtask.action;
  if (action == "pull") {
    JointBinding joint = find_joint(subtask.target);
    const Vec3 p0 = trajectory.waypoints.front().position;
    double delta = 0.0;
    if (joint.spec.type == graph::JointType::prismatic) {
      const Vec3& axis = joint.spec.axis;
      for (const auto& wp : trajectory.waypoints) {
        Vec3 v = wp.position - p0;
        Vec3 off = v - axis * v.dot(axis);
        if (off.norm() > 1e-6)
          throw Error("joint-constraint",
                      "waypoint off the prismatic line by " +
                          std::to_string(off.norm()) + " m");
      }
      delta = (trajectory.waypoints.back().position - p0).dot(axis);
    } else if (joint.spec.type == graph::JointType::revolute) {
      const Vec3& axis = joint.spec.axis;
      Vec3 r0 = p0 - joint.spec.origin;
      Vec3 r0_perp = r0 - axis * r0.dot(axis);
      double radius = r0_perp.norm();
      double axial = r0.dot(axis);
      for (const auto& wp : trajectory.waypoints) {
        Vec3 r = wp.position - joint.spec.origin;
        Vec3 perp = r - axis * r.dot(axis);
        if (std::abs(perp.norm() - radius) > 1e-6 ||
            std::abs(r.dot(axis) - axial) > 1e-6)
          throw Error("joint-constraint",
                      "waypoint off the revolute arc");
      }
      Vec3 r1 = trajectory.waypoints.back().position - joint.spec.origin;
      Vec3 r1_perp = r1 - axis * r1.dot(axis);
      delta = std::atan2(r0_perp.cross(r1_perp).dot(axis),
                         r0_perp.dot(r1_perp));
    } else {
      throw Error("joint-constraint", "cannot pull a fixed joint");
    }
    articulate(joint, delta);
    world_.gripper.position = trajectory.waypoints.back().position;
    world_.gripper.orientation = trajectory.waypoints.back().orientation;
    if (world_.held) {
      // The held part moved with the articulation; the grasp offset must
      // still match (kinematic consistency).
      Pose held_pose = world_.scene.node(*world_.held).pose();
      Pose expected = world_.gripper.compose(world_.grasp_offset);
      if ((held_pose.position - expected.position).norm() > 1e-6)
        throw Error("kinematic-drift",
                    "held object diverged from the gripper during pull");
    }
  } else if (action == "grasp" || action == "pick") {
    move_gripper_along(trajectory);
    std::string held = subtask.target;
    // Grasping a handle holds the part it is attached to.
    for (const auto& [eid, e] : world_.scene.edges()) {
      if (e.relation != "attach") continue;
      if (e.from == subtask.target) {
        held = e.to;
        break;
      }
    }
    world_.held = held;
    world_.grasp_offset =
        world_.gripper.inverse_compose(world_.scene.node(held).pose());
  } else if (action == "release") {
    // Open the gripper first, then retreat; the freed part stays put.
    world_.held.reset();
    move_gripper_along(trajectory);
  } else if (action == "stack") {
    move_gripper_along(trajectory);
    Quat q_e = tactile_correction();
    Quat corrected = (q_e * world_.gripper.orientation).normalized();
    world_.gripper.orientation = corrected;
    move_gripper_along(motion::Path3D{
        {motion::Waypoint{world_.gripper.position, corrected}}});
    Quat q_cup = world_.scene.node(*world_.held)
                     .orientation()
                     .value_or(Quat::identity());
    stack_error_deg_ =
        quat_angle(q_cup, scenario_.config.stack_target) * 180.0 / M_PI;
    world_.held.reset();
  } else if (action == "approach" || action == "move") {
    move_gripper_along(trajectory);
  } else {
    throw Error("unknown-action", "no executor for action '" + action + "'");
  }

  graph::apply_obtain(scenario_.state, world_.scene, binding_id, ctx);

  // Keep the gripper's scene node in sync for downstream queries.
  world_.scene.set_node_attr(
      scenario_.gripper_id, "position",
      Json::array({world_.gripper.position.x, world_.gripper.position.y,
                   world_.gripper.position.z}));
  world_.scene.set_node_attr(
      scenario_.gripper_id, "orientation",
      Json::array({world_.gripper.orientation.w, world_.gripper.orientation.x,
                   world_.gripper.orientation.y,
                   world_.gripper.orientation.z}));
}

SubtaskStatus Simulator::run_subtask(const plan::Subtask& subtask,
                                     const std::string& binding_id) {
  SubtaskStatus status;
  status.subtask = subtask;
  const ScenarioConfig& cfg = scenario_.config;
  try {
    graph::BindingContext ctx{subtask.actor, subtask.target};
    auto require =
        graph::query_require(scenario_.state, world_.scene, binding_id, ctx);

    motion::Path3D trajectory;
    std::optional<motion::OccupancyGrid> grid;

    if (subtask.action == "pull") {
      JointBinding joint = find_joint(subtask.target);
      double current = 0.0;
      if (auto it = world_.articulation.find(joint.edge_id);
          it != world_.articulation.end())
        current = it->second;
      double magnitude = joint.spec.limit_hi - current;
      Pose grasp{world_.gripper.position, world_.gripper.orientation};
      trajectory =
          motion::joint_trajectory(joint.spec, grasp, magnitude, cfg.pull_step);
      grid = build_grid(subtask);
    } else if (subtask.action == "release") {
      // Retreat by the approach standoff so the freed part is no longer
      // in contact.
      Vec3 axis = motion::approach_axis(world_.scene.node(subtask.target));
      trajectory.waypoints.push_back(
          {world_.gripper.position, world_.gripper.orientation});
      trajectory.waypoints.push_back(
          {world_.gripper.position + axis * cfg.release_retreat,
           world_.gripper.orientation});
      grid = build_grid(subtask);
    } else {
      double standoff = cfg.standoff;
      if (subtask.action == "grasp" || subtask.action == "pick")
        standoff = 0.0;
      else if (subtask.action == "stack")
        standoff = cfg.stack_height_offset;
      auto endpoints =
          motion::compute_endpoints(subtask, require, world_.scene, standoff);
      grid = build_grid(subtask);
      trajectory = motion::plan_path(*grid, world_.gripper.position,
                                     endpoints.goal.position, cfg.planner);
    }

    if (grid) {
      status.collision_loss =
          motion::collision_loss(trajectory, *grid, cfg.planner.safety_distance);
      last_grid_ = std::move(grid);
    }
    status.waypoints = static_cast<int>(trajectory.size());
    step_action(subtask, binding_id, trajectory);
    trajectories_.push_back(trajectory);
    status.success = true;
  } catch (const Error& e) {
    status.success = false;
    status.reason = e.what();
  }
  return status;
}

RunReport Simulator::run(const std::vector<plan::Subtask>& plan) {
  frame_counter_ = 0;
  stack_error_deg_.reset();
  trajectories_.clear();
  RunReport report;
  report.success = true;
  for (size_t i = 0; i < plan.size(); ++i) {
    if (i >= scenario_.binding_order.size()) {
      SubtaskStatus status;
      status.subtask = plan[i];
      status.reason = "no state binding for step " + std::to_string(i);
      report.subtasks.push_back(status);
      report.success = false;
      break;
    }
    SubtaskStatus status = run_subtask(plan[i], scenario_.binding_order[i]);
    report.total_collision_loss += status.collision_loss;
    report.total_waypoints += status.waypoints;
    report.subtasks.push_back(status);
    if (!status.success) {
      report.success = false;
      break;
    }
  }
  report.success = report.success && !report.subtasks.empty();

  double failure_distance = 0.0;
  if (!report.success && !report.subtasks.empty()) {
    const auto& failed = report.subtasks.back().subtask;
    if (world_.scene.has_node(failed.target)) {
      if (auto pos = world_.scene.node(failed.target).position())
        failure_distance = (world_.gripper.position - *pos).norm();
    }
  }
  report.reward = reward(report.success, failure_distance);
  report.stack_pose_error_deg = stack_error_deg_;
  return report;
}

RunReport run_scenario(const Scenario& scenario, llm::ChatProvider* provider) {
  std::vector<plan::Subtask> the_plan;
  if (scenario.plan) {
    the_plan = *scenario.plan;
    auto validation =
        plan::validate_plan(the_plan, scenario.task, scenario.scene);
    if (!validation.ok())
      throw Error("invalid-plan", validation.to_json().dump());
  } else {
    if (!provider)
      throw Error("no-plan",
                  "scenario has no direct plan and no provider was given");
    auto response = plan::transfer_task(
        *provider, scenario.task, scenario.scene, scenario.state,
        scenario.reference_plan, scenario.new_task_description, scenario.notes);
    the_plan = response.plan;
  }
  Simulator sim(scenario);
  return sim.run(the_plan);
}

}  // namespace skill::sim
