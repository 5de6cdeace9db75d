#include "tmkit/validator.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include <json.hpp>

#include "tmkit/dynamics.hpp"

namespace tmkit {

std::vector<std::string> ValidationReport::codes() const {
  std::vector<std::string> out;
  for (const auto& f : findings) out.push_back(f.code);
  return out;
}

bool ValidationReport::has(const std::string& code) const {
  return std::any_of(findings.begin(), findings.end(),
                     [&](const Diagnostic& d) { return d.code == code; });
}

namespace {

class Collector {
 public:
  explicit Collector(const SourceMap* spans) : spans_(spans) {}

  void error(std::string code, std::string message, std::string_view anchor = {}) {
    add(Severity::Error, std::move(code), std::move(message), anchor);
  }
  void warning(std::string code, std::string message, std::string_view anchor = {}) {
    add(Severity::Warning, std::move(code), std::move(message), anchor);
  }

  ValidationReport finish() {
    report_.ok = !has_errors(report_.findings);
    return std::move(report_);
  }

 private:
  void add(Severity severity, std::string code, std::string message, std::string_view anchor) {
    Diagnostic d{severity, std::move(code), std::move(message), std::nullopt};
    if (spans_ && !anchor.empty()) {
      if (auto it = spans_->find(anchor); it != spans_->end()) d.span = it->second;
    }
    report_.findings.push_back(std::move(d));
  }

  const SourceMap* spans_;
  ValidationReport report_;
};

std::string edge_text(std::string_view from, std::string_view arrow, std::string_view to) {
  return std::string(from) + " " + std::string(arrow) + " " + std::string(to);
}

void check_flow_adjacency(const Model& model, Collector& out) {
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& f : model.flows) {
    if (!model.is_node(f.from) || !model.is_node(f.to)) {
      out.error("FLOW_ADJ", "flow " + edge_text(f.from, "->", f.to) + " has an unknown endpoint",
                f.id);
    } else if (auto row = flow_violation(model, f.from, f.to)) {
      out.error("FLOW_ADJ", "flow " + edge_text(f.from, "->", f.to) + " is not a legal row: " + *row,
                f.id);
    } else if (!seen.emplace(f.from, f.to).second) {
      out.error("FLOW_ADJ", "flow " + edge_text(f.from, "->", f.to) + " is declared twice", f.id);
    }
  }
  std::set<std::pair<std::string, std::string>> triggers;
  for (const auto& t : model.triggers) {
    if (!model.is_node(t.from) || !model.is_node(t.to)) {
      out.error("FLOW_ADJ",
                "trigger " + edge_text(t.from, "=>", t.to) + " has an unknown endpoint", t.id);
    } else if (seen.contains({t.from, t.to})) {
      out.error("FLOW_ADJ",
                "trigger " + edge_text(t.from, "=>", t.to) + " duplicates a flow", t.id);
    } else if (!triggers.emplace(t.from, t.to).second) {
      out.error("FLOW_ADJ", "trigger " + edge_text(t.from, "=>", t.to) + " is declared twice",
                t.id);
    }
  }
}

bool is_transfer(const Model& model, const std::string& id) {
  const ActionNode* a = model.find_action(id);
  return a && a->kind == ActionKind::Transfer;
}

// Walks flows from `start` (backward or forward) through Transfers and
// junctions until a node satisfying `goal` shows up.
bool chain_reaches(const Model& model, const std::string& start, bool backward,
                   const std::function<bool(const std::string&)>& goal) {
  std::set<std::string> seen{start};
  std::vector<std::string> stack{start};
  while (!stack.empty()) {
    std::string at = std::move(stack.back());
    stack.pop_back();
    for (const auto& f : model.flows) {
      const std::string& here = backward ? f.to : f.from;
      const std::string& next = backward ? f.from : f.to;
      if (here != at || !seen.insert(next).second) continue;
      if (goal(next)) return true;
      if (is_transfer(model, next) || model.node_kind(next) == NodeKind::Junction)
        stack.push_back(next);
    }
  }
  return false;
}

void check_transfer_pairs(const Model& model, Collector& out) {
  auto is_upstream_end = [&](const std::string& id) {
    if (model.node_kind(id) == NodeKind::Storage) return true;
    const ActionNode* a = model.find_action(id);
    return a && a->kind == ActionKind::Release;
  };
  auto is_downstream_end = [&](const std::string& id) {
    if (model.node_kind(id) == NodeKind::Storage) return true;
    const ActionNode* a = model.find_action(id);
    return a && a->kind == ActionKind::Receive;
  };
  for (const auto& f : model.flows) {
    if (!is_transfer(model, f.from) || !is_transfer(model, f.to)) continue;
    if (model.owner_of(f.from) == model.owner_of(f.to)) continue;
    if (!chain_reaches(model, f.from, true, is_upstream_end))
      out.error("XFER_PAIR",
                "crossing " + edge_text(f.from, "->", f.to) + " has no release upstream", f.id);
    if (!chain_reaches(model, f.to, false, is_downstream_end))
      out.error("XFER_PAIR",
                "crossing " + edge_text(f.from, "->", f.to) + " has no receive downstream", f.id);
  }
}

void check_junction_arity(const Model& model, Collector& out) {
  for (const auto& j : model.junctions) {
    auto in = std::count_if(model.flows.begin(), model.flows.end(),
                            [&](const FlowEdge& f) { return f.to == j.id; });
    auto outgoing = std::count_if(model.flows.begin(), model.flows.end(),
                                  [&](const FlowEdge& f) { return f.from == j.id; });
    if (in < 2 || outgoing < 1)
      out.error("JUNCTION_ARITY",
                "junction " + j.id + " has " + std::to_string(in) + " inputs and " +
                    std::to_string(outgoing) + " outputs (needs >= 2 and >= 1)",
                j.id);
  }
}

void check_dangling(const Model& model, Collector& out) {
  for (const auto& id : model.nodes_in_order()) {
    if (!is_transfer(model, id)) continue;
    bool in = std::any_of(model.flows.begin(), model.flows.end(),
                          [&](const FlowEdge& f) { return f.to == id; }) ||
              std::any_of(model.triggers.begin(), model.triggers.end(),
                          [&](const TriggerEdge& t) { return t.to == id; });
    bool outgoing = std::any_of(model.flows.begin(), model.flows.end(),
                                [&](const FlowEdge& f) { return f.from == id; });
    if (!in) out.error("DANGLING", "transfer " + id + " is never reached", id);
    if (!outgoing) out.error("DANGLING", "transfer " + id + " leads nowhere", id);
  }
}

void check_containment(const Model& model, Collector& out) {
  for (const auto& t : model.thimacs) {
    std::set<std::string> seen{t.id};
    const Thimac* at = &t;
    while (at && at->parent) {
      if (!seen.insert(*at->parent).second) {
        out.error("CONTAIN_ACYCLIC", "thimac " + t.id + " is its own ancestor", t.id);
        break;
      }
      at = model.find_thimac(*at->parent);
    }
  }
}

void check_unused_storage(const Model& model, Collector& out) {
  for (const auto& s : model.storages) {
    bool used = std::any_of(model.flows.begin(), model.flows.end(), [&](const FlowEdge& f) {
      return f.from == s.id || f.to == s.id;
    });
    if (!used) out.warning("UNUSED_STORAGE", "storage " + s.id + " is never read or written", s.id);
  }
}

// Thimacs an event's region occupies: listed thimacs with their subtrees plus
// the owners of listed nodes.
std::set<std::string> region_thimacs(const Model& model, const Event& e) {
  std::set<std::string> out;
  for (const auto& id : e.covers) {
    if (model.find_thimac(id)) {
      for (auto& t : thimac_subtree(model, id)) out.insert(std::move(t));
    } else if (auto owner = model.owner_of(id)) {
      out.insert(*owner);
    }
  }
  return out;
}

void check_events(const Model& model, Collector& out) {
  for (const auto& e : model.events) {
    auto unknown = unknown_cover_ids(model, e.covers);
    for (const auto& id : unknown)
      out.error("EVENT_KNOWN", "event " + e.id + " covers unknown id '" + id + "'", e.id);
    if (e.covers.empty()) {
      out.error("EVENT_COVER", "event " + e.id + " covers nothing", e.id);
    } else if (unknown.empty() && !cover_is_connected(model, e.covers)) {
      out.error("EVENT_COVER", "event " + e.id + " covers a disconnected region", e.id);
    }
    std::set<std::string> seen;
    for (const auto& id : e.covers) {
      if (!seen.insert(id).second)
        out.error("EVENT_COVER", "event " + e.id + " lists " + id + " twice", e.id);
    }
  }
  for (const auto& c : model.chronology) {
    for (const auto& id : {c.from, c.to}) {
      if (!model.find_event(id))
        out.error("EVENT_KNOWN", "chronology names unknown event '" + id + "'");
    }
  }
  for (const auto& g : model.focus) {
    for (const auto& id : g.events) {
      if (!model.find_event(id))
        out.error("EVENT_KNOWN", "focus group " + g.name + " names unknown event '" + id + "'");
    }
  }
}

bool events_known(const Model& model) {
  for (const auto& e : model.events) {
    if (e.covers.empty() || !unknown_cover_ids(model, e.covers).empty()) return false;
  }
  for (const auto& c : model.chronology) {
    if (!model.find_event(c.from) || !model.find_event(c.to)) return false;
  }
  return true;
}

void check_chronology(const Model& model, Collector& out) {
  if (!events_known(model)) return;
  ChronologyGraph graph = derive_chronology_unchecked(model);
  for (const auto& c : model.chronology) {
    if (c.kind == ChronoKind::Precede && !graph.has_edge(c.from, c.to, ChronoKind::Precede))
      graph.edges.push_back(c);
  }
  if (auto cycle = precede_cycle(graph); !cycle.empty()) {
    std::string names;
    for (const auto& e : cycle) names += (names.empty() ? "" : ", ") + e;
    out.error("CHRONO_ACYCLIC", "precedence cycle through " + names, cycle.front());
  }
  for (const auto& c : model.chronology) {
    if (c.kind == ChronoKind::Repeat && c.from != c.to && !precede_reaches(graph, c.to, c.from))
      out.error("REPEAT_TARGET",
                "repeat " + c.from + " -> " + c.to + " does not point back to an earlier event",
                c.from);
  }
  for (const auto& c : model.chronology) {
    if (c.kind == ChronoKind::Precede && !find_witness(model, c.from, c.to))
      out.warning("CHRONO_UNWITNESSED",
                  "no flow or trigger leads from " + c.from + " to " + c.to, c.from);
  }
}

void check_realizability(const Model& model, Collector& out) {
  for (const auto& e : model.events) {
    for (const auto& t : region_thimacs(model, e)) {
      const Thimac* thimac = model.find_thimac(t);
      if (!thimac || thimac->realizable) continue;
      if (e.polarity == Polarity::Absent) {
        out.error("ABSENT_REALIZABLE",
                  "absent event " + e.id + " negates unrealizable thimac " + t, e.id);
      } else {
        out.error("PRESENT_REALIZABLE",
                  "present event " + e.id + " covers unrealizable thimac " + t, e.id);
      }
    }
  }
}

void check_uncovered(const Model& model, Collector& out) {
  if (model.events.empty()) return;
  std::set<std::string> covered;
  for (const auto& e : model.events) {
    for (auto& n : covered_nodes(model, e)) covered.insert(std::move(n));
  }
  for (const auto& id : model.nodes_in_order()) {
    const ActionNode* a = model.find_action(id);
    if (a && !a->implicit && !covered.contains(id))
      out.warning("UNCOVERED_ACTION", "action " + id + " belongs to no event", id);
  }
}

void run_static(const Model& model, Collector& out) {
  check_flow_adjacency(model, out);
  check_transfer_pairs(model, out);
  check_junction_arity(model, out);
  check_dangling(model, out);
  check_containment(model, out);
  check_unused_storage(model, out);
}

void run_dynamic(const Model& model, Collector& out) {
  check_events(model, out);
  check_chronology(model, out);
  check_realizability(model, out);
  check_uncovered(model, out);
}

}  // namespace

ValidationReport validate_static(const Model& model, const SourceMap* spans) {
  Collector out(spans);
  run_static(model, out);
  return out.finish();
}

ValidationReport validate_dynamic(const Model& model, const SourceMap* spans) {
  Collector out(spans);
  run_dynamic(model, out);
  return out.finish();
}

ValidationReport validate_all(const Model& model, const SourceMap* spans) {
  Collector out(spans);
  run_static(model, out);
  run_dynamic(model, out);
  return out.finish();
}

std::string report_json(const ValidationReport& report) {
  nlohmann::ordered_json doc;
  doc["ok"] = report.ok;
  doc["findings"] = nlohmann::ordered_json::array();
  for (const auto& f : report.findings) {
    nlohmann::ordered_json item;
    item["severity"] = f.severity == Severity::Error ? "error" : "warning";
    item["code"] = f.code;
    item["message"] = f.message;
    if (f.span) item["span"] = {{"line", f.span->line}, {"column", f.span->column}, {"length", f.span->length}};
    doc["findings"].push_back(std::move(item));
  }
  return doc.dump(2) + "\n";
}

}  // namespace tmkit
