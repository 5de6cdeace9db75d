#include "tmkit/model.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <functional>

namespace tmkit {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidName: return "InvalidName";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::UnknownId: return "UnknownId";
    case ErrorCode::InvalidKind: return "InvalidKind";
    case ErrorCode::IllegalFlow: return "IllegalFlow";
    case ErrorCode::RedundantTrigger: return "RedundantTrigger";
    case ErrorCode::DisconnectedCover: return "DisconnectedCover";
    case ErrorCode::ChronoCycle: return "ChronoCycle";
    case ErrorCode::InvalidDuration: return "InvalidDuration";
    case ErrorCode::NoEvents: return "NoEvents";
    case ErrorCode::TooManyInputs: return "TooManyInputs";
    case ErrorCode::UnknownInput: return "UnknownInput";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::MalformedJson: return "MalformedJson";
  }
  return "Unknown";
}

std::string_view to_string(ActionKind kind) {
  switch (kind) {
    case ActionKind::Create: return "create";
    case ActionKind::Process: return "process";
    case ActionKind::Release: return "release";
    case ActionKind::Transfer: return "transfer";
    case ActionKind::Receive: return "receive";
  }
  return "?";
}

std::string_view to_string(JunctionMode mode) { return mode == JunctionMode::Or ? "or" : "and"; }
std::string_view to_string(Polarity polarity) {
  return polarity == Polarity::Present ? "present" : "absent";
}
std::string_view to_string(Tense tense) { return tense == Tense::Past ? "past" : "now"; }
std::string_view to_string(ChronoKind kind) {
  return kind == ChronoKind::Precede ? "precede" : "repeat";
}

bool is_identifier(std::string_view text) {
  if (text.empty() || !std::isalpha(static_cast<unsigned char>(text.front()))) return false;
  return std::all_of(text.begin(), text.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  });
}

ActionKind parse_action_kind(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  static constexpr std::array kinds = {ActionKind::Create, ActionKind::Process,
                                       ActionKind::Release, ActionKind::Transfer,
                                       ActionKind::Receive};
  for (ActionKind kind : kinds) {
    if (lower == to_string(kind)) return kind;
  }
  throw ModelError(ErrorCode::InvalidKind,
                   "'" + std::string(text) +
                       "' is not one of create/process/release/transfer/receive");
}

// ---------------------------------------------------------------------------
// Model

namespace {

// Element vectors are storage, not declaration order (that lives in
// Thimac::children), so they compare as sets keyed by id.
template <typename T>
bool same_by_id(const std::vector<T>& a, const std::vector<T>& b) {
  if (a.size() != b.size()) return false;
  std::vector<const T*> x;
  std::vector<const T*> y;
  for (const auto& e : a) x.push_back(&e);
  for (const auto& e : b) y.push_back(&e);
  auto by_id = [](const T* l, const T* r) { return l->id < r->id; };
  std::sort(x.begin(), x.end(), by_id);
  std::sort(y.begin(), y.end(), by_id);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(*x[i] == *y[i])) return false;
  }
  return true;
}

}  // namespace

bool Model::operator==(const Model& other) const {
  return name == other.name && same_by_id(thimacs, other.thimacs) &&
         same_by_id(actions, other.actions) && flows == other.flows &&
         triggers == other.triggers && same_by_id(storages, other.storages) &&
         same_by_id(junctions, other.junctions) && events == other.events &&
         chronology == other.chronology && focus == other.focus;
}

void Model::reindex() {
  index_.clear();
  event_index_.clear();
  node_order_.clear();
  node_sequence_.clear();
  for (std::size_t i = 0; i < thimacs.size(); ++i)
    index_.emplace(thimacs[i].id, ElementRef{ElementRef::Kind::Thimac, i});
  for (std::size_t i = 0; i < actions.size(); ++i)
    index_.emplace(actions[i].id, ElementRef{ElementRef::Kind::Action, i});
  for (std::size_t i = 0; i < storages.size(); ++i)
    index_.emplace(storages[i].id, ElementRef{ElementRef::Kind::Storage, i});
  for (std::size_t i = 0; i < junctions.size(); ++i)
    index_.emplace(junctions[i].id, ElementRef{ElementRef::Kind::Junction, i});
  for (std::size_t i = 0; i < events.size(); ++i) event_index_.emplace(events[i].id, i);

  // Containment preorder; the depth guard keeps a corrupt (cyclic) forest finite.
  std::function<void(const Thimac&, std::size_t)> walk = [&](const Thimac& t,
                                                              std::size_t depth) {
    if (depth > thimacs.size()) return;
    for (const auto& child : t.children) {
      auto ref = index_.find(child);
      if (ref == index_.end()) continue;
      if (ref->second.kind == ElementRef::Kind::Thimac) {
        walk(thimacs[ref->second.index], depth + 1);
      } else if (!node_order_.contains(child)) {
        node_order_.emplace(child, node_sequence_.size());
        node_sequence_.push_back(child);
      }
    }
  };
  for (const auto& t : thimacs) {
    if (!t.parent) walk(t, 0);
  }
}

std::optional<ElementRef> Model::find(std::string_view id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const Thimac* Model::find_thimac(std::string_view id) const {
  auto ref = find(id);
  if (!ref || ref->kind != ElementRef::Kind::Thimac) return nullptr;
  return &thimacs[ref->index];
}

const ActionNode* Model::find_action(std::string_view id) const {
  auto ref = find(id);
  if (!ref || ref->kind != ElementRef::Kind::Action) return nullptr;
  return &actions[ref->index];
}

const Event* Model::find_event(std::string_view id) const {
  auto it = event_index_.find(id);
  return it == event_index_.end() ? nullptr : &events[it->second];
}

std::optional<std::size_t> Model::event_index(std::string_view id) const {
  auto it = event_index_.find(id);
  if (it == event_index_.end()) return std::nullopt;
  return it->second;
}

bool Model::is_node(std::string_view id) const { return node_kind(id).has_value(); }

std::optional<NodeKind> Model::node_kind(std::string_view id) const {
  auto ref = find(id);
  if (!ref) return std::nullopt;
  switch (ref->kind) {
    case ElementRef::Kind::Action: return NodeKind::Action;
    case ElementRef::Kind::Storage: return NodeKind::Storage;
    case ElementRef::Kind::Junction: return NodeKind::Junction;
    case ElementRef::Kind::Thimac: break;
  }
  return std::nullopt;
}

std::optional<std::string> Model::owner_of(std::string_view id) const {
  auto ref = find(id);
  if (!ref) return std::nullopt;
  switch (ref->kind) {
    case ElementRef::Kind::Action: return actions[ref->index].owner;
    case ElementRef::Kind::Storage: return storages[ref->index].owner;
    case ElementRef::Kind::Junction: return junctions[ref->index].owner;
    case ElementRef::Kind::Thimac: break;
  }
  return std::nullopt;
}

std::size_t Model::node_order(std::string_view id) const {
  auto it = node_order_.find(id);
  return it == node_order_.end() ? node_sequence_.size() : it->second;
}

// ---------------------------------------------------------------------------
// Constructors

namespace {

Thimac& thimac_for_update(Model& model, std::string_view id) {
  auto ref = model.find(id);
  if (!ref || ref->kind != ElementRef::Kind::Thimac)
    throw ModelError(ErrorCode::UnknownId, "unknown thimac '" + std::string(id) + "'");
  return model.thimacs[ref->index];
}

void require_identifier(std::string_view name, std::string_view what) {
  if (!is_identifier(name))
    throw ModelError(ErrorCode::InvalidName,
                     std::string(what) + " name '" + std::string(name) + "' is not an identifier");
}

std::string child_id(std::string_view owner, std::string_view name) {
  std::string id(owner);
  id += '.';
  id += name;
  return id;
}

void require_fresh(const Model& model, const std::string& id) {
  if (model.find(id)) throw ModelError(ErrorCode::DuplicateId, "duplicate id '" + id + "'");
}

void require_node(const Model& model, std::string_view id) {
  if (!model.is_node(id))
    throw ModelError(ErrorCode::UnknownId, "unknown node '" + std::string(id) + "'");
}

void rename_references(Model& model, const std::string& from, const std::string& to) {
  for (auto& f : model.flows) {
    if (f.from == from) f.from = to;
    if (f.to == from) f.to = to;
  }
  for (auto& t : model.triggers) {
    if (t.from == from) t.from = to;
    if (t.to == from) t.to = to;
  }
  for (auto& e : model.events)
    std::replace(e.covers.begin(), e.covers.end(), from, to);
}

}  // namespace

Model new_model(std::string_view name) {
  if (name.empty()) throw ModelError(ErrorCode::InvalidName, "model name must be nonempty");
  Model model;
  model.name = std::string(name);
  model.reindex();
  return model;
}

std::string add_thimac(Model& model, std::string_view name,
                       std::optional<std::string_view> parent, bool realizable,
                       bool delimiter) {
  require_identifier(name, "thimac");
  std::string id = parent ? child_id(*parent, name) : std::string(name);
  if (parent) thimac_for_update(model, *parent);
  require_fresh(model, id);

  Thimac thimac;
  thimac.id = id;
  thimac.name = std::string(name);
  if (parent) thimac.parent = std::string(*parent);
  thimac.realizable = realizable;
  thimac.delimiter = delimiter;

  std::string create_id = child_id(id, kImplicitCreateName);
  thimac.children.push_back(create_id);
  model.thimacs.push_back(std::move(thimac));
  if (parent) thimac_for_update(model, *parent).children.push_back(id);

  ActionNode create;
  create.id = create_id;
  create.kind = ActionKind::Create;
  create.owner = id;
  create.implicit = true;
  model.actions.push_back(std::move(create));
  model.reindex();
  return id;
}

std::string add_action(Model& model, std::string_view owner, ActionKind kind,
                       std::string_view name, std::string_view label,
                       std::optional<Guard> guard) {
  require_identifier(name, "action");
  Thimac& thimac = thimac_for_update(model, owner);
  if (guard && kind != ActionKind::Process)
    throw ModelError(ErrorCode::InvalidKind, "guards attach to process actions only");
  if (guard && !is_identifier(guard->input))
    throw ModelError(ErrorCode::InvalidName, "guard input '" + guard->input + "' is not an identifier");

  std::string id = child_id(owner, name);
  std::optional<std::string> replaced;
  if (auto existing = model.find_action(id); !existing || !existing->implicit)
    require_fresh(model, id);
  if (kind == ActionKind::Create) {
    auto it = std::find_if(model.actions.begin(), model.actions.end(), [&](const ActionNode& a) {
      return a.owner == owner && a.implicit;
    });
    if (it != model.actions.end()) {
      replaced = it->id;
      std::erase(thimac.children, *replaced);
      model.actions.erase(it);
      model.reindex();
    }
  }
  require_fresh(model, id);

  ActionNode node;
  node.id = id;
  node.kind = kind;
  node.owner = std::string(owner);
  node.label = std::string(label);
  node.guard = std::move(guard);
  thimac_for_update(model, owner).children.push_back(id);
  model.actions.push_back(std::move(node));
  if (replaced && *replaced != id) rename_references(model, *replaced, id);
  model.reindex();
  return id;
}

std::string add_action(Model& model, std::string_view owner, std::string_view kind,
                       std::string_view name, std::string_view label,
                       std::optional<Guard> guard) {
  return add_action(model, owner, parse_action_kind(kind), name, label, std::move(guard));
}

std::optional<ActionKind> source_role(const Model& model, std::string_view id) {
  auto ref = model.find(id);
  if (!ref) return std::nullopt;
  if (ref->kind == ElementRef::Kind::Action) return model.actions[ref->index].kind;
  if (ref->kind == ElementRef::Kind::Storage) return ActionKind::Release;
  return std::nullopt;
}

std::optional<ActionKind> target_role(const Model& model, std::string_view id) {
  auto ref = model.find(id);
  if (!ref) return std::nullopt;
  if (ref->kind == ElementRef::Kind::Action) return model.actions[ref->index].kind;
  if (ref->kind == ElementRef::Kind::Storage) return ActionKind::Receive;
  return std::nullopt;
}

namespace {

bool same_owner_row(ActionKind from, ActionKind to) {
  using K = ActionKind;
  static constexpr std::array<std::pair<K, K>, 7> rows = {{
      {K::Create, K::Process},
      {K::Create, K::Release},
      {K::Receive, K::Process},
      {K::Receive, K::Release},
      {K::Process, K::Release},
      {K::Release, K::Transfer},
      {K::Transfer, K::Receive},
  }};
  return std::find(rows.begin(), rows.end(), std::pair{from, to}) != rows.end();
}

std::string describe(const Model& model, std::string_view id) {
  auto kind = model.node_kind(id);
  if (!kind) return "?";
  if (*kind == NodeKind::Storage) return "storage";
  if (*kind == NodeKind::Junction) return "junction";
  return std::string(to_string(model.find_action(id)->kind));
}

}  // namespace

std::optional<std::string> flow_violation(const Model& model, std::string_view from,
                                          std::string_view to) {
  auto from_kind = model.node_kind(from);
  auto to_kind = model.node_kind(to);
  if (!from_kind || !to_kind) return "endpoint is not a node";

  bool same = model.owner_of(from) == model.owner_of(to);
  std::string row = describe(model, from) + "->" + describe(model, to) +
                    (same ? " (same thimac)" : " (across thimacs)");
  if (from == to) return row;

  if (*from_kind == NodeKind::Junction) {
    auto target = model.find_action(to);
    if (!same || !target || target->kind == ActionKind::Create) return row;
    return std::nullopt;
  }
  if (*to_kind == NodeKind::Junction) {
    return same ? std::nullopt : std::optional<std::string>(row);
  }

  auto source = source_role(model, from);
  auto target = target_role(model, to);
  if (same) return same_owner_row(*source, *target) ? std::nullopt : std::optional(row);
  bool both_actions = *from_kind == NodeKind::Action && *to_kind == NodeKind::Action;
  if (both_actions && *source == ActionKind::Transfer && *target == ActionKind::Transfer)
    return std::nullopt;
  return row;
}

std::string connect_flow(Model& model, std::string_view from, std::string_view to) {
  require_node(model, from);
  require_node(model, to);
  if (auto row = flow_violation(model, from, to))
    throw ModelError(ErrorCode::IllegalFlow, "illegal flow " + *row + ": " + std::string(from) +
                                                 " -> " + std::string(to));
  for (const auto& f : model.flows) {
    if (f.from == from && f.to == to)
      throw ModelError(ErrorCode::IllegalFlow,
                       "duplicate flow " + std::string(from) + " -> " + std::string(to));
  }
  std::string id = "flow#" + std::to_string(model.flows.size() + 1);
  model.flows.push_back({id, std::string(from), std::string(to)});
  return id;
}

std::string connect_trigger(Model& model, std::string_view from, std::string_view to) {
  require_node(model, from);
  require_node(model, to);
  for (const auto& f : model.flows) {
    if (f.from == from && f.to == to)
      throw ModelError(ErrorCode::RedundantTrigger, "a flow already runs " + std::string(from) +
                                                        " -> " + std::string(to));
  }
  for (const auto& t : model.triggers) {
    if (t.from == from && t.to == to)
      throw ModelError(ErrorCode::RedundantTrigger,
                       "duplicate trigger " + std::string(from) + " => " + std::string(to));
  }
  std::string id = "trigger#" + std::to_string(model.triggers.size() + 1);
  model.triggers.push_back({id, std::string(from), std::string(to)});
  return id;
}

std::string attach_storage(Model& model, std::string_view owner, std::string_view name,
                           std::string_view label) {
  require_identifier(name, "storage");
  thimac_for_update(model, owner);
  std::string id = child_id(owner, name);
  require_fresh(model, id);
  thimac_for_update(model, owner).children.push_back(id);
  model.storages.push_back({id, std::string(owner), std::string(label)});
  model.reindex();
  return id;
}

std::string add_junction(Model& model, std::string_view owner, JunctionMode mode,
                         std::string_view name) {
  require_identifier(name, "junction");
  thimac_for_update(model, owner);
  std::string id = child_id(owner, name);
  require_fresh(model, id);
  thimac_for_update(model, owner).children.push_back(id);
  model.junctions.push_back({id, std::string(owner), mode});
  model.reindex();
  return id;
}

void declare_chronology(Model& model, std::string_view from, std::string_view to,
                        ChronoKind kind) {
  for (auto id : {from, to}) {
    if (!model.find_event(id))
      throw ModelError(ErrorCode::UnknownId, "unknown event '" + std::string(id) + "'");
  }
  model.chronology.push_back({std::string(from), std::string(to), kind});
}

void add_focus_group(Model& model, std::string_view name, std::vector<std::string> events) {
  require_identifier(name, "focus group");
  for (const auto& g : model.focus) {
    if (g.name == name)
      throw ModelError(ErrorCode::DuplicateId, "duplicate focus group '" + std::string(name) + "'");
  }
  if (events.empty())
    throw ModelError(ErrorCode::InvalidName, "focus group '" + std::string(name) + "' is empty");
  for (const auto& id : events) {
    if (!model.find_event(id))
      throw ModelError(ErrorCode::UnknownId, "unknown event '" + id + "'");
  }
  model.focus.push_back({std::string(name), std::move(events)});
}

// ---------------------------------------------------------------------------
// Containment helpers

std::vector<std::string> thimac_subtree(const Model& model, std::string_view root) {
  std::vector<std::string> out;
  const Thimac* start = model.find_thimac(root);
  if (!start) return out;
  std::vector<const Thimac*> stack{start};
  while (!stack.empty() && out.size() <= model.thimacs.size()) {
    const Thimac* t = stack.back();
    stack.pop_back();
    out.push_back(t->id);
    for (auto it = t->children.rbegin(); it != t->children.rend(); ++it) {
      if (const Thimac* child = model.find_thimac(*it)) stack.push_back(child);
    }
  }
  return out;
}

std::vector<std::string> nodes_in_subtree(const Model& model, std::string_view root) {
  auto subtree = thimac_subtree(model, root);
  std::vector<std::string> out;
  for (const auto& id : model.nodes_in_order()) {
    auto owner = model.owner_of(id);
    if (owner && std::find(subtree.begin(), subtree.end(), *owner) != subtree.end())
      out.push_back(id);
  }
  return out;
}

bool is_ancestor(const Model& model, std::string_view ancestor, std::string_view thimac) {
  const Thimac* t = model.find_thimac(thimac);
  for (std::size_t hops = 0; t && t->parent && hops <= model.thimacs.size(); ++hops) {
    if (*t->parent == ancestor) return true;
    t = model.find_thimac(*t->parent);
  }
  return false;
}

}  // namespace tmkit
