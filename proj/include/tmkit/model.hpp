#pragma once

// Static (region) level of a thinging-machine model plus the dynamic
// annotations (events, declared chronology, focus groups) that ride on it.

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tmkit/error.hpp"

namespace tmkit {

enum class ActionKind { Create, Process, Release, Transfer, Receive };
enum class JunctionMode { Or, And };
enum class NodeKind { Action, Storage, Junction };
enum class Polarity { Present, Absent };
enum class Tense { Past, Now };
enum class ChronoKind { Precede, Repeat };

std::string_view to_string(ActionKind kind);
std::string_view to_string(JunctionMode mode);
std::string_view to_string(Polarity polarity);
std::string_view to_string(Tense tense);
std::string_view to_string(ChronoKind kind);

/// ASCII letter followed by letters, digits or underscores.
bool is_identifier(std::string_view text);

/// Case-insensitive; throws InvalidKind for anything outside the five actions
/// ("arrive" and "accept" are folded into Receive and are not kinds).
ActionKind parse_action_kind(std::string_view text);

/// Boolean input tested by a Process node; `negated` selects the `!input` branch.
struct Guard {
  std::string input;
  bool negated = false;

  bool operator==(const Guard&) const = default;
};

struct Thimac {
  std::string id;  // dotted path from the root, e.g. "LocalNetwork.Control"
  std::string name;
  std::optional<std::string> parent;
  bool realizable = true;
  bool delimiter = false;  // quantity/duration delimiter ("one mile", "five houses")
  std::vector<std::string> children;  // sub-thimacs and owned nodes, in order

  bool operator==(const Thimac&) const = default;
};

struct ActionNode {
  std::string id;
  ActionKind kind = ActionKind::Create;
  std::string owner;
  std::string label;
  bool implicit = false;  // synthesized Create, never printed
  std::optional<Guard> guard;

  bool operator==(const ActionNode&) const = default;
};

struct StorageNode {
  std::string id;
  std::string owner;
  std::string label;

  bool operator==(const StorageNode&) const = default;
};

struct JunctionNode {
  std::string id;
  std::string owner;
  JunctionMode mode = JunctionMode::Or;

  bool operator==(const JunctionNode&) const = default;
};

struct FlowEdge {
  std::string id;
  std::string from;
  std::string to;

  bool operator==(const FlowEdge&) const = default;
};

struct TriggerEdge {
  std::string id;
  std::string from;
  std::string to;

  bool operator==(const TriggerEdge&) const = default;
};

struct Duration {
  double magnitude = 1.0;
  std::string unit;

  bool operator==(const Duration&) const = default;
};

struct Event {
  std::string id;
  std::string label;
  std::vector<std::string> covers;  // thimac and node ids, in declaration order
  Polarity polarity = Polarity::Present;
  std::optional<Duration> duration;
  std::optional<Tense> tense;

  bool operator==(const Event&) const = default;
};

struct ChronoEdge {
  std::string from;
  std::string to;
  ChronoKind kind = ChronoKind::Precede;

  bool operator==(const ChronoEdge&) const = default;
};

struct FocusGroup {
  std::string name;
  std::vector<std::string> events;

  bool operator==(const FocusGroup&) const = default;
};

/// Where an id lives inside a Model.
struct ElementRef {
  enum class Kind { Thimac, Action, Storage, Junction } kind;
  std::size_t index;

  bool operator==(const ElementRef&) const = default;
};

class Model {
 public:
  std::string name;
  std::vector<Thimac> thimacs;
  std::vector<ActionNode> actions;
  std::vector<FlowEdge> flows;
  std::vector<TriggerEdge> triggers;
  std::vector<StorageNode> storages;
  std::vector<JunctionNode> junctions;
  std::vector<Event> events;
  std::vector<ChronoEdge> chronology;  // as declared by the modeler
  std::vector<FocusGroup> focus;

  /// Structural equality: element vectors compare by id; edges, events and
  /// chronology compare in order.
  bool operator==(const Model& other) const;

  /// Thimac, action, storage or junction with this id.
  std::optional<ElementRef> find(std::string_view id) const;
  const Thimac* find_thimac(std::string_view id) const;
  const ActionNode* find_action(std::string_view id) const;
  const Event* find_event(std::string_view id) const;
  std::optional<std::size_t> event_index(std::string_view id) const;

  /// True for action, storage and junction ids (graph nodes, not thimacs).
  bool is_node(std::string_view id) const;
  std::optional<NodeKind> node_kind(std::string_view id) const;
  /// Owning thimac of a node, or nullopt for thimacs/unknown ids.
  std::optional<std::string> owner_of(std::string_view id) const;

  /// Position of a node in the containment preorder (each thimac's children in
  /// order). Used for every declaration-order tie-break.
  std::size_t node_order(std::string_view id) const;
  const std::vector<std::string>& nodes_in_order() const { return node_sequence_; }

  /// Recomputes lookup tables after direct edits of the public vectors.
  void reindex();

 private:
  std::map<std::string, ElementRef, std::less<>> index_;
  std::map<std::string, std::size_t, std::less<>> event_index_;
  std::map<std::string, std::size_t, std::less<>> node_order_;
  std::vector<std::string> node_sequence_;
};

// Constructor operations. All throw ModelError on contract violations.

Model new_model(std::string_view name);

std::string add_thimac(Model& model, std::string_view name,
                       std::optional<std::string_view> parent = std::nullopt,
                       bool realizable = true, bool delimiter = false);

/// Appends an action named `name` to `owner`. The first explicit Create of a
/// thimac replaces its implicit one; edges that used the implicit node follow.
std::string add_action(Model& model, std::string_view owner, ActionKind kind,
                       std::string_view name, std::string_view label = {},
                       std::optional<Guard> guard = std::nullopt);
std::string add_action(Model& model, std::string_view owner, std::string_view kind,
                       std::string_view name, std::string_view label = {},
                       std::optional<Guard> guard = std::nullopt);

std::string connect_flow(Model& model, std::string_view from, std::string_view to);
std::string connect_trigger(Model& model, std::string_view from, std::string_view to);

std::string attach_storage(Model& model, std::string_view owner, std::string_view name,
                           std::string_view label = {});
std::string add_junction(Model& model, std::string_view owner, JunctionMode mode,
                         std::string_view name);

void declare_chronology(Model& model, std::string_view from, std::string_view to,
                        ChronoKind kind);
void add_focus_group(Model& model, std::string_view name, std::vector<std::string> events);

/// Local name of the synthesized Create every thimac starts with.
inline constexpr std::string_view kImplicitCreateName = "create";

/// Legal Flow Adjacency: the only relation connect_flow accepts.
/// Returns nullopt when legal, otherwise a short description of the rejected row.
std::optional<std::string> flow_violation(const Model& model, std::string_view from,
                                          std::string_view to);
inline bool is_legal_flow(const Model& model, std::string_view from, std::string_view to) {
  return !flow_violation(model, from, to).has_value();
}

/// Role a node plays at a flow endpoint: storages read as Release and write as
/// Receive; junctions have no action role.
std::optional<ActionKind> source_role(const Model& model, std::string_view id);
std::optional<ActionKind> target_role(const Model& model, std::string_view id);

/// Thimac ids of `root` and every descendant, preorder.
std::vector<std::string> thimac_subtree(const Model& model, std::string_view root);
/// Node ids owned by `root` or any descendant thimac, in node declaration order.
std::vector<std::string> nodes_in_subtree(const Model& model, std::string_view root);
bool is_ancestor(const Model& model, std::string_view ancestor, std::string_view thimac);

}  // namespace tmkit
