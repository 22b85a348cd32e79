#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "skill/error.hpp"
#include "skill/geometry.hpp"

namespace skill::graph {

using Json = nlohmann::json;

enum class GraphKind { task, scene, state };

std::string to_string(GraphKind kind);
GraphKind graph_kind_from_string(const std::string& s);

// ---------------------------------------------------------------------------
// Joint specification parsed from an URDF-style XML fragment.

enum class JointType { revolute, prismatic, fixed };

std::string to_string(JointType t);

struct JointSpec {
  JointType type = JointType::fixed;
  Vec3 axis{0.0, 0.0, 1.0};  // unit
  Vec3 origin;
  std::string parent;
  std::string child;
  double limit_lo = 0.0;
  double limit_hi = 0.0;  // radians (revolute) or meters (prismatic)
};

struct JointDefaults {
  double prismatic_hi = 0.4;          // meters
  double revolute_hi = M_PI / 2.0;    // radians
};

/// Parses a fragment like
///   <joint type="revolute"><axis xyz="0 0 1"/><origin xyz="0.4 0 0.7"/>
///     <parent link="cabinet_body"/><child link="cabinet_door"/></joint>
/// The axis is normalized; limits default per joint type when absent.
JointSpec parse_joint_spec(const std::string& xml_text,
                           const JointDefaults& defaults = {});

// ---------------------------------------------------------------------------
// Nodes and edges. Attributes are free-form JSON objects; a few keys have
// enforced shapes on scene entities: "position" [x,y,z] meters,
// "orientation" [w,x,y,z] unit quaternion, "extent" [hx,hy,hz] positive
// half-sizes.

struct Node {
  std::string id;
  std::set<std::string> labels;
  Json attributes = Json::object();

  bool has_label(const std::string& l) const { return labels.count(l) > 0; }

  std::optional<Vec3> position() const;
  std::optional<Quat> orientation() const;
  std::optional<Vec3> extent() const;
  std::optional<Vec3> vec3_attr(const std::string& key) const;
  Pose pose() const;  // identity components where absent
};

struct Edge {
  std::string id;
  std::string from;
  std::string to;
  std::string relation;
  Json attributes = Json::object();

  /// Present iff the edge carries a "joint_xml" attribute.
  std::optional<JointSpec> joint() const;
};

// ---------------------------------------------------------------------------
// Property graph: in-process store for the task, scene and state graphs.
// Node and edge ids live in one namespace so that state-binding subjects
// resolve unambiguously. Ids must not contain '-' (reserved as the triple
// delimiter). Single writer, multiple readers.

class PropertyGraph {
 public:
  explicit PropertyGraph(GraphKind kind) : kind_(kind) {}

  GraphKind kind() const { return kind_; }
  const std::map<std::string, Node>& nodes() const { return nodes_; }
  const std::map<std::string, Edge>& edges() const { return edges_; }

  bool has_node(const std::string& id) const { return nodes_.count(id) > 0; }
  bool has_edge(const std::string& id) const { return edges_.count(id) > 0; }

  const Node& node(const std::string& id) const;
  const Edge& edge(const std::string& id) const;

  /// Returns the node id. Throws duplicate-id, invalid-id, or an attribute
  /// validation error (invalid-quaternion, invalid-extent, ...).
  std::string add_node(Node node);

  /// Returns the edge id. Throws dangling-endpoint, relation-not-allowed,
  /// duplicate-id, or invalid-joint for "joint" edges without a valid
  /// joint_xml attribute.
  std::string add_edge(const std::string& id, const std::string& from,
                       const std::string& to, const std::string& relation,
                       const Json& attributes = Json::object());

  void set_node_attr(const std::string& id, const std::string& key,
                     const Json& value);
  void set_edge_attr(const std::string& id, const std::string& key,
                     const Json& value);

  /// Attribute of a node or edge; subject resolution order: nodes, edges.
  const Json* find_attr(const std::string& subject_id,
                        const std::string& key) const;
  bool has_subject(const std::string& subject_id) const;
  void set_subject_attr(const std::string& subject_id, const std::string& key,
                        const Json& value);

 private:
  void validate_node_attributes(const Node& node) const;
  void validate_relation(const std::string& from, const std::string& to,
                         const std::string& relation, const Json& attrs) const;

  GraphKind kind_;
  std::map<std::string, Node> nodes_;
  std::map<std::string, Edge> edges_;
};

// ---------------------------------------------------------------------------
// State bindings: require/obtain predicates keyed by subtask id, stored as
// "binding" nodes in a state graph. Subjects may name a scene node or edge
// directly, or use the placeholders "$actor"/"$target" resolved against the
// executing subtask. Values may use the same placeholders.

enum class Comparator { eq, neq, lt, gt };

std::string to_string(Comparator c);
Comparator comparator_from_string(const std::string& s);

struct Predicate {
  std::string subject;
  std::string attribute;
  Comparator comparator = Comparator::eq;
  Json value;
};

struct Effect {
  std::string subject;
  std::string attribute;
  Json value;
};

struct StateBinding {
  std::string subtask_id;
  std::vector<Predicate> require;
  std::vector<Effect> obtain;
};

struct BindingContext {
  std::string actor;
  std::string target;
};

struct RequireEntry {
  Predicate predicate;    // placeholders already resolved
  Json actual;            // null when the attribute is absent
  bool satisfied = false;
};

struct RequireReport {
  std::vector<RequireEntry> entries;
  bool satisfied = true;  // conjunction over entries

  std::string first_failure() const;
};

void add_binding(PropertyGraph& state, const StateBinding& binding);
bool has_binding(const PropertyGraph& state, const std::string& subtask_id);
StateBinding binding_of(const PropertyGraph& state,
                        const std::string& subtask_id);

/// Evaluates every require predicate of the subtask against the live scene.
/// Throws unknown-subtask and unresolvable-subject.
RequireReport query_require(const PropertyGraph& state,
                            const PropertyGraph& scene,
                            const std::string& subtask_id,
                            const BindingContext& ctx = {});

/// Applies the subtask's obtain effects atomically (all or none).
/// Throws require-unsatisfied and unresolvable-subject.
void apply_obtain(const PropertyGraph& state, PropertyGraph& scene,
                  const std::string& subtask_id,
                  const BindingContext& ctx = {});

// ---------------------------------------------------------------------------
// Triple export and on-disk document format.

/// One line "From-Relation-To" per edge, sorted by edge id.
std::vector<std::string> export_triples(const PropertyGraph& graph);

Json graph_to_json(const PropertyGraph& graph);
PropertyGraph graph_from_json(const Json& doc);

void save_graph(const PropertyGraph& graph, const std::string& path);
PropertyGraph load_graph(const std::string& path);

}  // namespace skill::graph
