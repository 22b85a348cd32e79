#include "skill/graph.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

namespace skill::graph {

namespace {

const std::set<std::string> kTaskRelations = {"start", "next", "end",
                                              "contain"};
const std::set<std::string> kStateRelations = {"binds"};

bool valid_identifier(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (c == '-' || std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

void check_json_finite(const Json& v, const std::string& where) {
  if (v.is_number_float() && !std::isfinite(v.get<double>()))
    throw Error("non-finite-attribute", "non-finite number in " + where);
  if (v.is_array() || v.is_object()) {
    for (const auto& item : v) check_json_finite(item, where);
  }
}

std::optional<std::vector<double>> numeric_array(const Json& attrs,
                                                 const std::string& key,
                                                 size_t n) {
  auto it = attrs.find(key);
  if (it == attrs.end()) return std::nullopt;
  if (!it->is_array() || it->size() != n)
    throw Error("invalid-attribute",
                key + " must be an array of " + std::to_string(n) + " numbers");
  std::vector<double> out;
  for (const auto& v : *it) {
    if (!v.is_number())
      throw Error("invalid-attribute", key + " components must be numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

Vec3 parse_xyz(const std::string& text, const std::string& what) {
  std::istringstream ss(text);
  Vec3 v;
  if (!(ss >> v.x >> v.y >> v.z))
    throw Error("malformed-xml", "bad xyz triple in " + what + ": " + text);
  std::string rest;
  if (ss >> rest)
    throw Error("malformed-xml", "trailing content in " + what + ": " + text);
  return v;
}

}  // namespace

std::string to_string(GraphKind kind) {
  switch (kind) {
    case GraphKind::task: return "task";
    case GraphKind::scene: return "scene";
    case GraphKind::state: return "state";
  }
  return "?";
}

GraphKind graph_kind_from_string(const std::string& s) {
  if (s == "task") return GraphKind::task;
  if (s == "scene") return GraphKind::scene;
  if (s == "state") return GraphKind::state;
  throw Error("schema-violation", "unknown graph kind: " + s);
}

std::string to_string(JointType t) {
  switch (t) {
    case JointType::revolute: return "revolute";
    case JointType::prismatic: return "prismatic";
    case JointType::fixed: return "fixed";
  }
  return "?";
}

JointSpec parse_joint_spec(const std::string& xml_text,
                           const JointDefaults& defaults) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream ss(xml_text);
    pt::read_xml(ss, tree);
  } catch (const pt::xml_parser_error& e) {
    throw Error("malformed-xml", e.what());
  }

  auto joint = tree.get_child_optional("joint");
  if (!joint) throw Error("malformed-xml", "no <joint> element");

  JointSpec spec;
  std::string type = joint->get<std::string>("<xmlattr>.type", "");
  if (type == "revolute")
    spec.type = JointType::revolute;
  else if (type == "prismatic")
    spec.type = JointType::prismatic;
  else if (type == "fixed")
    spec.type = JointType::fixed;
  else
    throw Error("unknown-joint-type", "joint type '" + type + "'");

  auto axis = joint->get_optional<std::string>("axis.<xmlattr>.xyz");
  if (!axis) throw Error("missing-field", "joint has no <axis xyz=...>");
  Vec3 raw_axis = parse_xyz(*axis, "axis");
  if (raw_axis.norm() == 0.0)
    throw Error("invalid-axis", "joint axis must be nonzero");
  spec.axis = raw_axis.normalized();

  if (auto origin = joint->get_optional<std::string>("origin.<xmlattr>.xyz"))
    spec.origin = parse_xyz(*origin, "origin");

  auto parent = joint->get_optional<std::string>("parent.<xmlattr>.link");
  if (!parent) throw Error("missing-field", "joint has no <parent link=...>");
  spec.parent = *parent;

  auto child = joint->get_optional<std::string>("child.<xmlattr>.link");
  if (!child) throw Error("missing-field", "joint has no <child link=...>");
  spec.child = *child;

  double default_hi = spec.type == JointType::prismatic ? defaults.prismatic_hi
                      : spec.type == JointType::revolute ? defaults.revolute_hi
                                                         : 0.0;
  spec.limit_lo = joint->get<double>("limit.<xmlattr>.lower", 0.0);
  spec.limit_hi = joint->get<double>("limit.<xmlattr>.upper", default_hi);
  if (!(spec.limit_lo <= spec.limit_hi))
    throw Error("invalid-limits", "joint limits must satisfy lo <= hi");
  return spec;
}

// ---------------------------------------------------------------------------

std::optional<Vec3> Node::vec3_attr(const std::string& key) const {
  auto a = numeric_array(attributes, key, 3);
  if (!a) return std::nullopt;
  return Vec3{(*a)[0], (*a)[1], (*a)[2]};
}

std::optional<Vec3> Node::position() const { return vec3_attr("position"); }

std::optional<Quat> Node::orientation() const {
  auto a = numeric_array(attributes, "orientation", 4);
  if (!a) return std::nullopt;
  return Quat{(*a)[0], (*a)[1], (*a)[2], (*a)[3]};
}

std::optional<Vec3> Node::extent() const { return vec3_attr("extent"); }

Pose Node::pose() const {
  Pose p;
  if (auto pos = position()) p.position = *pos;
  if (auto q = orientation()) p.orientation = *q;
  return p;
}

std::optional<JointSpec> Edge::joint() const {
  auto it = attributes.find("joint_xml");
  if (it == attributes.end()) return std::nullopt;
  if (!it->is_string())
    throw Error("invalid-joint", "joint_xml must be a string on edge " + id);
  return parse_joint_spec(it->get<std::string>());
}

// ---------------------------------------------------------------------------

const Node& PropertyGraph::node(const std::string& id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw Error("unknown-node", "no node '" + id + "'");
  return it->second;
}

const Edge& PropertyGraph::edge(const std::string& id) const {
  auto it = edges_.find(id);
  if (it == edges_.end()) throw Error("unknown-edge", "no edge '" + id + "'");
  return it->second;
}

void PropertyGraph::validate_node_attributes(const Node& node) const {
  check_json_finite(node.attributes, "node " + node.id);
  if (auto pos = node.position()) {
    if (!pos->finite())
      throw Error("invalid-position",
                  "node " + node.id + " has non-finite position");
  }
  if (auto q = node.orientation()) {
    if (std::abs(q->norm() - 1.0) > 1e-9)
      throw Error("invalid-quaternion",
                  "node " + node.id + " orientation is not unit norm");
  }
  if (auto ext = node.extent()) {
    if (!ext->finite() || ext->x <= 0.0 || ext->y <= 0.0 || ext->z <= 0.0)
      throw Error("invalid-extent",
                  "node " + node.id + " extent components must be positive");
  }
}

std::string PropertyGraph::add_node(Node node) {
  if (!valid_identifier(node.id))
    throw Error("invalid-id",
                "node id '" + node.id + "' is empty or contains '-'/space");
  if (nodes_.count(node.id) || edges_.count(node.id))
    throw Error("duplicate-id", "id '" + node.id + "' already present");
  if (!node.attributes.is_object())
    throw Error("invalid-attribute", "attributes must be a JSON object");
  validate_node_attributes(node);
  std::string id = node.id;
  nodes_.emplace(id, std::move(node));
  return id;
}

void PropertyGraph::validate_relation(const std::string& from,
                                      const std::string& to,
                                      const std::string& relation,
                                      const Json& attrs) const {
  if (!valid_identifier(relation))
    throw Error("invalid-relation",
                "relation '" + relation + "' is empty or contains '-'/space");
  switch (kind_) {
    case GraphKind::task:
      if (!kTaskRelations.count(relation))
        throw Error("relation-not-allowed",
                    "'" + relation + "' not allowed in a task graph");
      if (relation == "contain") {
        if (!node(from).has_label("subtask") ||
            !node(to).has_label("action_primitive"))
          throw Error("relation-not-allowed",
                      "contain edges connect a subtask to an action primitive");
      }
      break;
    case GraphKind::scene:
      if (kTaskRelations.count(relation))
        throw Error("relation-not-allowed",
                    "'" + relation + "' not allowed in a scene graph");
      if (relation == "joint") {
        auto it = attrs.find("joint_xml");
        if (it == attrs.end() || !it->is_string())
          throw Error("invalid-joint",
                      "joint edges must carry a joint_xml attribute");
        parse_joint_spec(it->get<std::string>());  // validates
      }
      break;
    case GraphKind::state:
      if (!kStateRelations.count(relation))
        throw Error("relation-not-allowed",
                    "'" + relation + "' not allowed in a state graph");
      break;
  }
}

std::string PropertyGraph::add_edge(const std::string& id,
                                    const std::string& from,
                                    const std::string& to,
                                    const std::string& relation,
                                    const Json& attributes) {
  if (!valid_identifier(id))
    throw Error("invalid-id",
                "edge id '" + id + "' is empty or contains '-'/space");
  if (edges_.count(id) || nodes_.count(id))
    throw Error("duplicate-id", "id '" + id + "' already present");
  if (!nodes_.count(from))
    throw Error("dangling-endpoint",
                "edge " + id + " references missing node '" + from + "'");
  if (!nodes_.count(to))
    throw Error("dangling-endpoint",
                "edge " + id + " references missing node '" + to + "'");
  if (!attributes.is_object())
    throw Error("invalid-attribute", "attributes must be a JSON object");
  check_json_finite(attributes, "edge " + id);
  validate_relation(from, to, relation, attributes);
  edges_.emplace(id, Edge{id, from, to, relation, attributes});
  return id;
}

void PropertyGraph::set_node_attr(const std::string& id, const std::string& key,
                                  const Json& value) {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw Error("unknown-node", "no node '" + id + "'");
  Node updated = it->second;
  updated.attributes[key] = value;
  validate_node_attributes(updated);
  it->second = std::move(updated);
}

void PropertyGraph::set_edge_attr(const std::string& id, const std::string& key,
                                  const Json& value) {
  auto it = edges_.find(id);
  if (it == edges_.end()) throw Error("unknown-edge", "no edge '" + id + "'");
  check_json_finite(value, "edge " + id);
  it->second.attributes[key] = value;
}

bool PropertyGraph::has_subject(const std::string& subject_id) const {
  return has_node(subject_id) || has_edge(subject_id);
}

const Json* PropertyGraph::find_attr(const std::string& subject_id,
                                     const std::string& key) const {
  const Json* attrs = nullptr;
  if (auto it = nodes_.find(subject_id); it != nodes_.end())
    attrs = &it->second.attributes;
  else if (auto et = edges_.find(subject_id); et != edges_.end())
    attrs = &et->second.attributes;
  else
    return nullptr;
  auto a = attrs->find(key);
  return a == attrs->end() ? nullptr : &*a;
}

void PropertyGraph::set_subject_attr(const std::string& subject_id,
                                     const std::string& key,
                                     const Json& value) {
  if (has_node(subject_id))
    set_node_attr(subject_id, key, value);
  else if (has_edge(subject_id))
    set_edge_attr(subject_id, key, value);
  else
    throw Error("unresolvable-subject", "no node or edge '" + subject_id + "'");
}

// ---------------------------------------------------------------------------
// State bindings.

std::string to_string(Comparator c) {
  switch (c) {
    case Comparator::eq: return "eq";
    case Comparator::neq: return "neq";
    case Comparator::lt: return "lt";
    case Comparator::gt: return "gt";
  }
  return "?";
}

Comparator comparator_from_string(const std::string& s) {
  if (s == "eq") return Comparator::eq;
  if (s == "neq") return Comparator::neq;
  if (s == "lt") return Comparator::lt;
  if (s == "gt") return Comparator::gt;
  throw Error("schema-violation", "unknown comparator: " + s);
}

namespace {

std::string resolve_placeholder(const std::string& s,
                                const BindingContext& ctx) {
  if (s == "$actor") {
    if (ctx.actor.empty())
      throw Error("unresolvable-subject", "$actor used without context");
    return ctx.actor;
  }
  if (s == "$target") {
    if (ctx.target.empty())
      throw Error("unresolvable-subject", "$target used without context");
    return ctx.target;
  }
  return s;
}

Json resolve_value(const Json& v, const BindingContext& ctx) {
  if (v.is_string()) {
    const std::string& s = v.get_ref<const std::string&>();
    if (s == "$actor" || s == "$target") return resolve_placeholder(s, ctx);
  }
  return v;
}

bool compare(Comparator c, const Json& actual, const Json& expected) {
  switch (c) {
    case Comparator::eq: return actual == expected;
    case Comparator::neq: return actual != expected;
    case Comparator::lt:
    case Comparator::gt:
      if (!actual.is_number() || !expected.is_number())
        throw Error("non-numeric-comparison",
                    "lt/gt comparators need numeric operands");
      return c == Comparator::lt
                 ? actual.get<double>() < expected.get<double>()
                 : actual.get<double>() > expected.get<double>();
  }
  return false;
}

}  // namespace

void add_binding(PropertyGraph& state, const StateBinding& binding) {
  Json req = Json::array();
  for (const auto& p : binding.require)
    req.push_back(Json::array(
        {p.subject, p.attribute, to_string(p.comparator), p.value}));
  Json obt = Json::array();
  for (const auto& e : binding.obtain)
    obt.push_back(Json::array({e.subject, e.attribute, e.value}));
  Node n;
  n.id = binding.subtask_id;
  n.labels = {"binding"};
  n.attributes = Json{{"require", req}, {"obtain", obt}};
  state.add_node(std::move(n));
}

bool has_binding(const PropertyGraph& state, const std::string& subtask_id) {
  return state.has_node(subtask_id) &&
         state.node(subtask_id).has_label("binding");
}

StateBinding binding_of(const PropertyGraph& state,
                        const std::string& subtask_id) {
  if (!has_binding(state, subtask_id))
    throw Error("unknown-subtask",
                "no binding for subtask '" + subtask_id + "'");
  const Node& n = state.node(subtask_id);
  StateBinding b;
  b.subtask_id = subtask_id;
  const Json& attrs = n.attributes;
  if (auto it = attrs.find("require"); it != attrs.end()) {
    for (const auto& p : *it) {
      if (!p.is_array() || p.size() != 4)
        throw Error("schema-violation",
                    "require predicate must be [subject, attr, cmp, value]");
      b.require.push_back(Predicate{p[0].get<std::string>(),
                                    p[1].get<std::string>(),
                                    comparator_from_string(p[2]), p[3]});
    }
  }
  if (auto it = attrs.find("obtain"); it != attrs.end()) {
    for (const auto& e : *it) {
      if (!e.is_array() || e.size() != 3)
        throw Error("schema-violation",
                    "obtain effect must be [subject, attr, value]");
      b.obtain.push_back(
          Effect{e[0].get<std::string>(), e[1].get<std::string>(), e[2]});
    }
  }
  return b;
}

std::string RequireReport::first_failure() const {
  for (const auto& e : entries) {
    if (!e.satisfied) {
      return e.predicate.subject + "." + e.predicate.attribute + " " +
             to_string(e.predicate.comparator) + " " + e.predicate.value.dump() +
             " (actual " + e.actual.dump() + ")";
    }
  }
  return "";
}

RequireReport query_require(const PropertyGraph& state,
                            const PropertyGraph& scene,
                            const std::string& subtask_id,
                            const BindingContext& ctx) {
  StateBinding b = binding_of(state, subtask_id);
  RequireReport report;
  for (const auto& raw : b.require) {
    Predicate p = raw;
    p.subject = resolve_placeholder(p.subject, ctx);
    p.value = resolve_value(p.value, ctx);
    if (!scene.has_subject(p.subject))
      throw Error("unresolvable-subject", "subtask '" + subtask_id +
                                              "' requires unknown subject '" +
                                              p.subject + "'");
    RequireEntry entry;
    entry.predicate = p;
    const Json* actual = scene.find_attr(p.subject, p.attribute);
    entry.actual = actual ? *actual : Json(nullptr);
    entry.satisfied = actual && compare(p.comparator, *actual, p.value);
    report.satisfied = report.satisfied && entry.satisfied;
    report.entries.push_back(std::move(entry));
  }
  return report;
}

void apply_obtain(const PropertyGraph& state, PropertyGraph& scene,
                  const std::string& subtask_id, const BindingContext& ctx) {
  RequireReport report = query_require(state, scene, subtask_id, ctx);
  if (!report.satisfied)
    throw Error("require-unsatisfied", "subtask '" + subtask_id +
                                           "' precondition failed: " +
                                           report.first_failure());
  StateBinding b = binding_of(state, subtask_id);
  // Resolve everything before mutating so a bad effect leaves the scene
  // untouched.
  std::vector<Effect> resolved;
  for (const auto& raw : b.obtain) {
    Effect e = raw;
    e.subject = resolve_placeholder(e.subject, ctx);
    e.value = resolve_value(e.value, ctx);
    if (!scene.has_subject(e.subject))
      throw Error("unresolvable-subject", "subtask '" + subtask_id +
                                              "' obtains on unknown subject '" +
                                              e.subject + "'");
    resolved.push_back(std::move(e));
  }
  for (const auto& e : resolved)
    scene.set_subject_attr(e.subject, e.attribute, e.value);
}

// ---------------------------------------------------------------------------
// Triples and serialization.

std::vector<std::string> export_triples(const PropertyGraph& graph) {
  std::vector<std::string> lines;
  lines.reserve(graph.edges().size());
  for (const auto& [id, e] : graph.edges())
    lines.push_back(e.from + "-" + e.relation + "-" + e.to);
  return lines;
}

Json graph_to_json(const PropertyGraph& graph) {
  Json doc;
  doc["kind"] = to_string(graph.kind());
  Json nodes = Json::array();
  for (const auto& [id, n] : graph.nodes()) {
    nodes.push_back(Json{{"id", n.id},
                         {"labels", Json(n.labels)},
                         {"attributes", n.attributes}});
  }
  Json edges = Json::array();
  for (const auto& [id, e] : graph.edges()) {
    edges.push_back(Json{{"id", e.id},
                         {"from", e.from},
                         {"to", e.to},
                         {"relation", e.relation},
                         {"attributes", e.attributes}});
  }
  doc["nodes"] = std::move(nodes);
  doc["edges"] = std::move(edges);
  return doc;
}

PropertyGraph graph_from_json(const Json& doc) {
  if (!doc.is_object() || !doc.contains("kind"))
    throw Error("schema-violation", "graph document needs a 'kind' field");
  PropertyGraph g(graph_kind_from_string(doc["kind"].get<std::string>()));
  if (auto it = doc.find("nodes"); it != doc.end()) {
    for (const auto& jn : *it) {
      Node n;
      if (!jn.contains("id") || !jn["id"].is_string())
        throw Error("schema-violation", "node without string id");
      n.id = jn["id"].get<std::string>();
      if (auto lt = jn.find("labels"); lt != jn.end())
        for (const auto& l : *lt) n.labels.insert(l.get<std::string>());
      if (auto at = jn.find("attributes"); at != jn.end()) n.attributes = *at;
      g.add_node(std::move(n));
    }
  }
  if (auto it = doc.find("edges"); it != doc.end()) {
    for (const auto& je : *it) {
      if (!je.contains("id") || !je["id"].is_string())
        throw Error("schema-violation", "edge without string id");
      for (const char* key : {"from", "to", "relation"})
        if (!je.contains(key) || !je[key].is_string())
          throw Error("schema-violation", "edge '" +
                                              je["id"].get<std::string>() +
                                              "' missing field '" + key + "'");
      g.add_edge(je["id"].get<std::string>(), je["from"].get<std::string>(),
                 je["to"].get<std::string>(), je["relation"].get<std::string>(),
                 je.value("attributes", Json::object()));
    }
  }
  return g;
}

void save_graph(const PropertyGraph& graph, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("io", "cannot open '" + path + "' for writing");
  out << graph_to_json(graph).dump(2) << "\n";
  if (!out) throw Error("io", "write failed for '" + path + "'");
}

PropertyGraph load_graph(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io", "cannot open '" + path + "'");
  Json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw Error("schema-violation",
                "invalid JSON in '" + path + "': " + e.what());
  }
  return graph_from_json(doc);
}

}  // namespace skill::graph
