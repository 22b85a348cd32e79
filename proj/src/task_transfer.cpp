#include "skill/task_transfer.hpp"

#include <sstream>

namespace skill::plan {

Json plan_to_json(const std::vector<Subtask>& plan) {
  Json arr = Json::array();
  for (const auto& s : plan)
    arr.push_back(Json{{"action", s.action},
                       {"actor", s.actor},
                       {"target", s.target}});
  return arr;
}

std::vector<Subtask> plan_from_json(const Json& arr) {
  if (!arr.is_array())
    throw Error("schema-violation", "plan must be a JSON array");
  std::vector<Subtask> plan;
  for (size_t i = 0; i < arr.size(); ++i) {
    const Json& e = arr[i];
    if (!e.is_object())
      throw Error("schema-violation",
                  "plan element " + std::to_string(i) + " is not an object");
    for (const char* key : {"action", "actor", "target"})
      if (!e.contains(key) || !e[key].is_string())
        throw Error("missing-key", "plan element " + std::to_string(i) +
                                       " missing string key '" + key + "'");
    plan.push_back(Subtask{e["action"].get<std::string>(),
                           e["actor"].get<std::string>(),
                           e["target"].get<std::string>()});
  }
  return plan;
}

Json ValidationReport::to_json() const {
  Json arr = Json::array();
  for (const auto& v : violations)
    arr.push_back(Json{{"index", v.index}, {"kind", v.kind},
                       {"detail", v.detail}});
  return Json{{"ok", ok()}, {"violations", arr}};
}

namespace {

std::string render_statements(const graph::PropertyGraph& g,
                              const std::string& title) {
  std::ostringstream out;
  out << "# " << title << " (" << to_string(g.kind()) << " graph)\n";
  for (const auto& [id, n] : g.nodes()) {
    out << "NODE " << id;
    if (!n.labels.empty()) {
      out << " :";
      bool first = true;
      for (const auto& l : n.labels) {
        out << (first ? "" : ",") << l;
        first = false;
      }
    }
    out << " " << n.attributes.dump() << "\n";
  }
  for (const auto& [id, e] : g.edges()) {
    out << "EDGE " << id << ": " << e.from << " -" << e.relation << "-> "
        << e.to << " " << e.attributes.dump() << "\n";
  }
  return out.str();
}

std::string render_bindings(const graph::PropertyGraph& state) {
  std::ostringstream out;
  for (const auto& [id, n] : state.nodes()) {
    if (!n.has_label("binding")) continue;
    graph::StateBinding b = graph::binding_of(state, id);
    out << "subtask " << id << ":\n";
    out << "  require:";
    for (const auto& p : b.require)
      out << " (" << p.subject << "." << p.attribute << " "
          << to_string(p.comparator) << " " << p.value.dump() << ")";
    out << "\n  obtain:";
    for (const auto& e : b.obtain)
      out << " (" << e.subject << "." << e.attribute << " := "
          << e.value.dump() << ")";
    out << "\n";
  }
  return out.str();
}

}  // namespace

std::vector<PromptStage> build_stage_prompts(
    const graph::PropertyGraph& task_graph,
    const graph::PropertyGraph& scene_graph,
    const graph::PropertyGraph& state_graph,
    const std::vector<Subtask>& reference_plan,
    const std::string& new_task_description,
    const std::vector<std::string>& notes) {
  if (reference_plan.empty())
    throw Error("empty-reference-plan", "a non-empty reference plan is needed");
  if (new_task_description.empty())
    throw Error("empty-task-description", "the new task description is empty");

  std::vector<PromptStage> stages;

  {
    PromptStage s1;
    s1.index = 1;
    s1.messages.push_back(
        {"system",
         "You are a robot task planner. A long-horizon manipulation task is "
         "decomposed into a sequence of subtasks. Each subtask is a triple "
         "{action, actor, target}: the action primitive to execute, the "
         "object initiating it, and the object it is aimed at."});
    std::ostringstream u;
    u << "The skill library links subtasks to scene entities through state "
         "bindings. 'require' lists the conditions that must hold before a "
         "subtask runs; 'obtain' lists the attribute changes it feeds back "
         "into the scene afterwards.\n\nState bindings:\n"
      << render_bindings(state_graph);
    s1.messages.push_back({"user", u.str()});
    stages.push_back(std::move(s1));
  }

  {
    PromptStage s2;
    s2.index = 2;
    std::ostringstream u;
    u << "The skill library as graph construction statements:\n\n"
      << render_statements(task_graph, "Task graph")
      << render_statements(scene_graph, "Scene graph");
    s2.messages.push_back({"user", u.str()});
    stages.push_back(std::move(s2));
  }

  {
    PromptStage s3;
    s3.index = 3;
    std::ostringstream u;
    u << "Spatial and functional structure of the scene as "
         "Object1-ConnectionType-Object2 triples:\n";
    for (const auto& line : graph::export_triples(scene_graph))
      u << line << "\n";
    s3.messages.push_back({"user", u.str()});
    stages.push_back(std::move(s3));
  }

  {
    PromptStage s4;
    s4.index = 4;
    std::ostringstream u;
    u << "Reference plan for the known task:\n"
      << plan_to_json(reference_plan).dump() << "\n\nNew task: "
      << new_task_description << "\n";
    for (const auto& n : notes) u << "note: " << n << "\n";
    u << "\nReply with ONLY a JSON array of objects with keys \"action\", "
         "\"actor\", \"target\". Use only action primitives from the task "
         "graph and object ids from the scene graph.";
    s4.messages.push_back({"user", u.str()});
    stages.push_back(std::move(s4));
  }

  return stages;
}

namespace {

// Finds the matching ']' for the '[' at `start`, honoring string literals
// and escapes. Returns npos when unbalanced.
size_t find_array_end(const std::string& s, size_t start) {
  int depth = 0;
  bool in_string = false;
  for (size_t i = start; i < s.size(); ++i) {
    char c = s[i];
    if (in_string) {
      if (c == '\\')
        ++i;
      else if (c == '"')
        in_string = false;
      continue;
    }
    if (c == '"')
      in_string = true;
    else if (c == '[')
      ++depth;
    else if (c == ']') {
      --depth;
      if (depth == 0) return i;
    }
  }
  return std::string::npos;
}

}  // namespace

PlanResponse parse_plan_response(const std::string& raw_text) {
  PlanResponse response;
  response.raw_text = raw_text;

  for (size_t i = raw_text.find('['); i != std::string::npos;
       i = raw_text.find('[', i + 1)) {
    size_t end = find_array_end(raw_text, i);
    if (end == std::string::npos) continue;
    Json candidate;
    try {
      candidate = Json::parse(raw_text.substr(i, end - i + 1));
    } catch (const Json::parse_error&) {
      continue;
    }
    if (!candidate.is_array()) continue;
    bool all_objects = true;
    for (const auto& e : candidate)
      if (!e.is_object()) {
        all_objects = false;
        break;
      }
    if (!all_objects) continue;

    // First array of objects found: this is the plan.
    if (candidate.empty())
      throw Error("empty-plan", "the response plan array is empty");
    response.plan = plan_from_json(candidate);
    response.diagnostics.push_back(
        "plan extracted at offset " + std::to_string(i) + " with " +
        std::to_string(response.plan.size()) + " steps");
    return response;
  }
  throw Error("no-plan-array",
              "no JSON array of {action, actor, target} objects in response");
}

ValidationReport validate_plan(const std::vector<Subtask>& plan,
                               const graph::PropertyGraph& task_graph,
                               const graph::PropertyGraph& scene_graph) {
  std::set<std::string> vocabulary;
  for (const auto& [id, n] : task_graph.nodes())
    if (n.has_label("action_primitive")) vocabulary.insert(id);

  ValidationReport report;
  for (size_t i = 0; i < plan.size(); ++i) {
    const Subtask& s = plan[i];
    int idx = static_cast<int>(i);
    if (!vocabulary.count(s.action))
      report.violations.push_back(
          {idx, "unknown-action", "'" + s.action + "' is not in the library"});
    if (!scene_graph.has_node(s.actor))
      report.violations.push_back(
          {idx, "unknown-node", "actor '" + s.actor + "' is not in the scene"});
    if (!scene_graph.has_node(s.target))
      report.violations.push_back(
          {idx, "unknown-node",
           "target '" + s.target + "' is not in the scene"});
    if (s.actor == s.target)
      report.violations.push_back(
          {idx, "actor-equals-target", "actor and target are both '" +
                                           s.actor + "'"});
  }
  return report;
}

PlanResponse transfer_task(llm::ChatProvider& provider,
                           const graph::PropertyGraph& task_graph,
                           const graph::PropertyGraph& scene_graph,
                           const graph::PropertyGraph& state_graph,
                           const std::vector<Subtask>& reference_plan,
                           const std::string& new_task_description,
                           const std::vector<std::string>& notes) {
  auto stages = build_stage_prompts(task_graph, scene_graph, state_graph,
                                    reference_plan, new_task_description,
                                    notes);
  std::vector<llm::Message> conversation;
  std::string last_reply;
  for (const auto& stage : stages) {
    for (const auto& m : stage.messages) conversation.push_back(m);
    last_reply = provider.complete(conversation);
    conversation.push_back({"assistant", last_reply});
  }

  auto attempt = [&](const std::string& text)
      -> std::pair<PlanResponse, ValidationReport> {
    PlanResponse r = parse_plan_response(text);
    ValidationReport v = validate_plan(r.plan, task_graph, scene_graph);
    return {std::move(r), std::move(v)};
  };

  std::string failure;
  try {
    auto [response, report] = attempt(last_reply);
    if (report.ok()) return response;
    failure = report.to_json().dump();
  } catch (const Error& e) {
    failure = e.what();
  }

  // One corrective retry with the violations spelled out.
  std::ostringstream corrective;
  corrective << "The plan was rejected: " << failure
             << "\nReply again with ONLY a corrected JSON array of "
                "{\"action\", \"actor\", \"target\"} objects.";
  conversation.push_back({"user", corrective.str()});
  last_reply = provider.complete(conversation);
  conversation.push_back({"assistant", last_reply});

  try {
    auto [response, report] = attempt(last_reply);
    if (report.ok()) {
      response.diagnostics.push_back("accepted after one corrective retry");
      return response;
    }
    throw Error("plan-invalid-after-retry", report.to_json().dump());
  } catch (const Error& e) {
    if (e.code() == "plan-invalid-after-retry") throw;
    throw Error("plan-invalid-after-retry", e.what());
  }
}

}  // namespace skill::plan
