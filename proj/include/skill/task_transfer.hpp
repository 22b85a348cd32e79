#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "skill/graph.hpp"
#include "skill/provider.hpp"

namespace skill::plan {

using Json = nlohmann::json;

/// One step of a task plan: an action primitive applied by an actor to a
/// target object.
struct Subtask {
  std::string action;
  std::string actor;
  std::string target;

  bool operator==(const Subtask&) const = default;
};

Json plan_to_json(const std::vector<Subtask>& plan);
std::vector<Subtask> plan_from_json(const Json& arr);

struct PromptStage {
  int index = 0;  // 1..4
  std::vector<llm::Message> messages;
};

struct PlanResponse {
  std::string raw_text;
  std::vector<Subtask> plan;
  std::vector<std::string> diagnostics;
};

struct Violation {
  int index = 0;  // plan step
  std::string kind;  // unknown-action | unknown-node | actor-equals-target
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  Json to_json() const;
};

/// Builds the four-stage prompt conversation:
///   1. task framing plus the state-graph require/obtain descriptions,
///   2. the library rendered as graph-construction statements,
///   3. the scene as Object1-ConnectionType-Object2 triples,
///   4. reference plan, new task, notes, and the output contract.
/// Identical inputs produce byte-identical stages.
std::vector<PromptStage> build_stage_prompts(
    const graph::PropertyGraph& task_graph,
    const graph::PropertyGraph& scene_graph,
    const graph::PropertyGraph& state_graph,
    const std::vector<Subtask>& reference_plan,
    const std::string& new_task_description,
    const std::vector<std::string>& notes);

/// Extracts the first balanced JSON array of {action, actor, target}
/// objects from the text, tolerating surrounding prose and code fences.
/// Throws no-plan-array, empty-plan, or missing-key (naming the element).
PlanResponse parse_plan_response(const std::string& raw_text);

/// Flags unknown actions (not an action_primitive node of the task graph),
/// unknown actor/target nodes, and actor == target. Violations are data,
/// not errors.
ValidationReport validate_plan(const std::vector<Subtask>& plan,
                               const graph::PropertyGraph& task_graph,
                               const graph::PropertyGraph& scene_graph);

/// Runs the four stages as one conversation, parses and validates the
/// final reply, and retries once with the violations appended as a
/// corrective user message. Throws plan-invalid-after-retry.
PlanResponse transfer_task(llm::ChatProvider& provider,
                           const graph::PropertyGraph& task_graph,
                           const graph::PropertyGraph& scene_graph,
                           const graph::PropertyGraph& state_graph,
                           const std::vector<Subtask>& reference_plan,
                           const std::string& new_task_description,
                           const std::vector<std::string>& notes);

}  // namespace skill::plan
