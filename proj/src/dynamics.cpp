#include "tmkit/dynamics.hpp"

#include <algorithm>
#include <charconv>
#include <functional>
#include <numeric>
#include <queue>
#include <sstream>

namespace tmkit {

std::string format_number(double value) {
  if (value == 0) return "0";  // folds -0
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------------------
// Regions

std::vector<std::string> unknown_cover_ids(const Model& model,
                                           const std::vector<std::string>& covers) {
  std::vector<std::string> out;
  for (const auto& id : covers) {
    if (!model.find(id)) out.push_back(id);
  }
  return out;
}

std::vector<std::string> covered_nodes(const Model& model, const std::vector<std::string>& covers) {
  std::set<std::string> members;
  for (const auto& id : covers) {
    if (model.is_node(id)) {
      members.insert(id);
    } else if (model.find_thimac(id)) {
      for (auto& n : nodes_in_subtree(model, id)) members.insert(std::move(n));
    }
  }
  std::vector<std::string> out(members.begin(), members.end());
  std::sort(out.begin(), out.end(), [&](const std::string& a, const std::string& b) {
    return model.node_order(a) < model.node_order(b);
  });
  return out;
}

std::vector<std::string> covered_nodes(const Model& model, const Event& event) {
  return covered_nodes(model, event.covers);
}

std::set<std::string> covered_thimacs(const Model& model, const Event& event) {
  std::set<std::string> out;
  for (const auto& id : event.covers) {
    if (model.find_thimac(id)) {
      for (auto& t : thimac_subtree(model, id)) out.insert(std::move(t));
    } else if (auto owner = model.owner_of(id)) {
      const Thimac* t = model.find_thimac(*owner);
      for (std::size_t hops = 0; t && hops <= model.thimacs.size(); ++hops) {
        out.insert(t->id);
        t = t->parent ? model.find_thimac(*t->parent) : nullptr;
      }
    }
  }
  return out;
}

namespace {

struct UnionFind {
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t root(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent[root(a)] = root(b); }
  std::vector<std::size_t> parent;
};

// Thimacs listed directly by an event, with their subtrees.
std::set<std::string> listed_subtrees(const Model& model, const std::vector<std::string>& covers) {
  std::set<std::string> out;
  for (const auto& id : covers) {
    if (model.find_thimac(id)) {
      for (auto& t : thimac_subtree(model, id)) out.insert(std::move(t));
    }
  }
  return out;
}

}  // namespace

bool cover_is_connected(const Model& model, const std::vector<std::string>& covers) {
  if (covers.empty() || !unknown_cover_ids(model, covers).empty()) return false;

  std::map<std::string, std::size_t> vertex;
  auto add = [&](const std::string& id) { vertex.emplace(id, vertex.size()); };
  for (const auto& t : listed_subtrees(model, covers)) add(t);
  for (const auto& n : covered_nodes(model, covers)) add(n);
  for (const auto& id : covers) {
    add(id);
    if (auto owner = model.owner_of(id)) add(*owner);
  }

  UnionFind uf(vertex.size());
  auto link = [&](const std::string& a, const std::string& b) {
    auto ia = vertex.find(a);
    auto ib = vertex.find(b);
    if (ia != vertex.end() && ib != vertex.end()) uf.unite(ia->second, ib->second);
  };
  for (const auto& f : model.flows) link(f.from, f.to);
  for (const auto& t : model.triggers) link(t.from, t.to);
  for (const auto& [id, _] : vertex) {
    if (const Thimac* t = model.find_thimac(id)) {
      if (t->parent) link(id, *t->parent);
    } else if (auto owner = model.owner_of(id)) {
      link(id, *owner);
    }
  }
  std::size_t first = uf.root(0);
  for (std::size_t i = 1; i < vertex.size(); ++i) {
    if (uf.root(i) != first) return false;
  }
  return true;
}

const Event& define_event(Model& model, EventSpec spec) {
  if (!is_identifier(spec.id))
    throw ModelError(ErrorCode::InvalidName, "event id '" + spec.id + "' is not an identifier");
  if (model.find_event(spec.id))
    throw ModelError(ErrorCode::DuplicateId, "duplicate event '" + spec.id + "'");
  if (spec.covers.empty())
    throw ModelError(ErrorCode::DisconnectedCover, "event '" + spec.id + "' covers nothing");
  if (auto unknown = unknown_cover_ids(model, spec.covers); !unknown.empty())
    throw ModelError(ErrorCode::UnknownId,
                     "event '" + spec.id + "' covers unknown id '" + unknown.front() + "'");
  std::set<std::string> seen;
  for (const auto& id : spec.covers) {
    if (!seen.insert(id).second)
      throw ModelError(ErrorCode::DuplicateId,
                       "event '" + spec.id + "' lists '" + id + "' twice");
  }
  if (spec.duration) {
    if (!(spec.duration->magnitude >= 0))
      throw ModelError(ErrorCode::InvalidDuration,
                       "event '" + spec.id + "' has a negative duration");
    if (!is_identifier(spec.duration->unit))
      throw ModelError(ErrorCode::InvalidDuration,
                       "event '" + spec.id + "' needs a duration unit");
  }
  if (!cover_is_connected(model, spec.covers))
    throw ModelError(ErrorCode::DisconnectedCover,
                     "event '" + spec.id + "' covers a disconnected region");

  Event event;
  event.id = std::move(spec.id);
  event.label = std::move(spec.label);
  event.covers = std::move(spec.covers);
  event.polarity = spec.polarity;
  event.duration = std::move(spec.duration);
  event.tense = spec.tense;
  model.events.push_back(std::move(event));
  model.reindex();
  return model.events.back();
}

// ---------------------------------------------------------------------------
// Chronology

bool ChronologyGraph::has_edge(std::string_view from, std::string_view to, ChronoKind kind) const {
  return std::any_of(edges.begin(), edges.end(), [&](const ChronoEdge& e) {
    return e.from == from && e.to == to && e.kind == kind;
  });
}

namespace {

using NodeSet = std::set<std::string, std::less<>>;

NodeSet region(const Model& model, const Event& event) {
  auto nodes = covered_nodes(model, event);
  return NodeSet(nodes.begin(), nodes.end());
}

std::optional<Witness> witness_between(const Model& model, const NodeSet& from, const NodeSet& to) {
  auto crosses = [&](const std::string& u, const std::string& v) {
    return from.contains(u) && to.contains(v) && !to.contains(u) && !from.contains(v);
  };
  for (const auto& f : model.flows) {
    if (crosses(f.from, f.to)) return Witness{f.id, f.from, f.to};
  }
  for (const auto& t : model.triggers) {
    if (crosses(t.from, t.to)) return Witness{t.id, t.from, t.to};
  }
  return std::nullopt;
}

// A directed cycle among flow/trigger edges whose endpoints all lie in `nodes`.
bool has_internal_cycle(const Model& model, const NodeSet& nodes) {
  std::map<std::string, std::vector<std::string>> adj;
  for (const auto& f : model.flows) {
    if (nodes.contains(f.from) && nodes.contains(f.to)) adj[f.from].push_back(f.to);
  }
  for (const auto& t : model.triggers) {
    if (nodes.contains(t.from) && nodes.contains(t.to)) adj[t.from].push_back(t.to);
  }
  std::map<std::string, int> color;  // 0 white, 1 on stack, 2 done
  std::function<bool(const std::string&)> dfs = [&](const std::string& u) {
    color[u] = 1;
    for (const auto& v : adj[u]) {
      if (color[v] == 1) return true;
      if (color[v] == 0 && dfs(v)) return true;
    }
    color[u] = 2;
    return false;
  };
  for (const auto& n : nodes) {
    if (color[n] == 0 && dfs(n)) return true;
  }
  return false;
}

}  // namespace

std::optional<Witness> find_witness(const Model& model, std::string_view from_event,
                                    std::string_view to_event) {
  const Event* a = model.find_event(from_event);
  const Event* b = model.find_event(to_event);
  if (!a || !b || a == b) return std::nullopt;
  return witness_between(model, region(model, *a), region(model, *b));
}

ChronologyGraph derive_chronology_unchecked(const Model& model) {
  ChronologyGraph graph;
  std::vector<NodeSet> regions;
  for (const auto& e : model.events) {
    graph.events.push_back(e.id);
    regions.push_back(region(model, e));
  }
  auto declared_repeat = [&](const std::string& from, const std::string& to) {
    return std::any_of(model.chronology.begin(), model.chronology.end(), [&](const ChronoEdge& c) {
      return c.kind == ChronoKind::Repeat && c.from == from && c.to == to;
    });
  };

  std::set<std::tuple<std::size_t, std::size_t, int>> edges;
  for (std::size_t i = 0; i < regions.size(); ++i) {
    for (std::size_t j = 0; j < regions.size(); ++j) {
      if (i == j) continue;
      if (!witness_between(model, regions[i], regions[j])) continue;
      bool repeat = declared_repeat(graph.events[i], graph.events[j]);
      edges.emplace(i, j, static_cast<int>(repeat ? ChronoKind::Repeat : ChronoKind::Precede));
    }
    if (has_internal_cycle(model, regions[i]))
      edges.emplace(i, i, static_cast<int>(ChronoKind::Repeat));
  }
  for (const auto& c : model.chronology) {
    if (c.kind != ChronoKind::Repeat) continue;
    auto i = model.event_index(c.from);
    auto j = model.event_index(c.to);
    if (i && j) edges.emplace(*i, *j, static_cast<int>(ChronoKind::Repeat));
  }
  for (const auto& [i, j, kind] : edges)
    graph.edges.push_back({graph.events[i], graph.events[j], static_cast<ChronoKind>(kind)});
  return graph;
}

ChronologyGraph derive_chronology(const Model& model) {
  ChronologyGraph graph = derive_chronology_unchecked(model);
  if (auto cycle = precede_cycle(graph); !cycle.empty()) {
    std::string names;
    for (const auto& e : cycle) names += (names.empty() ? "" : ", ") + e;
    throw ModelError(ErrorCode::ChronoCycle, "precedence cycle through " + names);
  }
  return graph;
}

namespace {

std::map<std::string, std::vector<std::string>> precede_successors(const ChronologyGraph& graph) {
  std::map<std::string, std::vector<std::string>> succ;
  for (const auto& e : graph.edges) {
    if (e.kind == ChronoKind::Precede) succ[e.from].push_back(e.to);
  }
  return succ;
}

}  // namespace

bool precede_reaches(const ChronologyGraph& graph, std::string_view from, std::string_view to) {
  auto succ = precede_successors(graph);
  std::set<std::string> seen;
  std::vector<std::string> stack;
  if (auto it = succ.find(std::string(from)); it != succ.end()) stack = it->second;
  while (!stack.empty()) {
    std::string e = std::move(stack.back());
    stack.pop_back();
    if (e == to) return true;
    if (!seen.insert(e).second) continue;
    if (auto it = succ.find(e); it != succ.end())
      stack.insert(stack.end(), it->second.begin(), it->second.end());
  }
  return false;
}

std::vector<std::string> precede_cycle(const ChronologyGraph& graph) {
  std::vector<std::string> out;
  for (const auto& e : graph.events) {
    if (precede_reaches(graph, e, e)) out.push_back(e);
  }
  return out;
}

std::vector<std::string> topological_order(const ChronologyGraph& graph) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < graph.events.size(); ++i) index.emplace(graph.events[i], i);
  std::vector<std::size_t> indegree(graph.events.size(), 0);
  std::vector<std::vector<std::size_t>> succ(graph.events.size());
  for (const auto& e : graph.edges) {
    if (e.kind != ChronoKind::Precede) continue;
    auto i = index.find(e.from);
    auto j = index.find(e.to);
    if (i == index.end() || j == index.end()) continue;
    succ[i->second].push_back(j->second);
    ++indegree[j->second];
  }
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  for (std::size_t i = 0; i < indegree.size(); ++i) {
    if (indegree[i] == 0) ready.push(i);
  }
  std::vector<std::string> order;
  while (!ready.empty()) {
    std::size_t i = ready.top();
    ready.pop();
    order.push_back(graph.events[i]);
    for (std::size_t j : succ[i]) {
      if (--indegree[j] == 0) ready.push(j);
    }
  }
  if (order.size() != graph.events.size())
    throw ModelError(ErrorCode::ChronoCycle, "chronology has a precedence cycle");
  return order;
}

// ---------------------------------------------------------------------------
// Timing

std::vector<std::string> contained_events(const Model& model, std::string_view container) {
  std::vector<std::string> out;
  const Event* a = model.find_event(container);
  if (!a) return out;
  auto thimacs = listed_subtrees(model, a->covers);
  if (thimacs.empty()) return out;
  for (const auto& b : model.events) {
    if (b.id == a->id) continue;
    bool inside = std::all_of(b.covers.begin(), b.covers.end(), [&](const std::string& id) {
      if (model.find_thimac(id)) return thimacs.contains(id);
      auto owner = model.owner_of(id);
      return owner && thimacs.contains(*owner);
    });
    if (inside) out.push_back(b.id);
  }
  return out;
}

TimingTable build_timing(const Model& model, const ChronologyGraph& chronology,
                         const std::map<std::string, double>& durations) {
  TimingTable table;
  table.order = chronology.events;
  for (const auto& id : chronology.events) {
    double d = 1.0;
    if (const Event* e = model.find_event(id); e && e->duration) d = e->duration->magnitude;
    if (auto it = durations.find(id); it != durations.end()) d = it->second;
    if (!(d >= 0))
      throw ModelError(ErrorCode::InvalidDuration, "event '" + id + "' has a negative duration");
    table.durations[id] = d;
  }

  auto order = topological_order(chronology);
  std::map<std::string, std::vector<std::string>> preds;
  for (const auto& e : chronology.edges) {
    if (e.kind == ChronoKind::Precede) preds[e.to].push_back(e.from);
  }
  std::map<std::string, std::vector<std::string>> inside;
  for (const auto& id : chronology.events) inside[id] = contained_events(model, id);

  for (const auto& id : order) table.rows[id] = {0, table.durations[id]};
  // Longest path, then stretch containers; repeat until nothing moves. The
  // round bound keeps containment/precedence conflicts finite.
  for (std::size_t round = 0; round <= 2 * order.size() + 2; ++round) {
    bool changed = false;
    for (const auto& id : order) {
      Interval& row = table.rows[id];
      double start = 0;
      for (const auto& p : preds[id]) start = std::max(start, table.rows[p].end);
      double end = start + table.durations[id];
      for (const auto& b : inside[id]) {
        start = std::min(start, table.rows[b].start);
        end = std::max(end, table.rows[b].end);
      }
      Interval next{start, end};
      if (!(next == row)) {
        row = next;
        changed = true;
      }
    }
    if (!changed) break;
  }
  return table;
}

std::string timing_csv(const TimingTable& table) {
  std::ostringstream out;
  out << "event_id,start,end,duration\n";
  for (const auto& id : table.order) {
    auto it = table.rows.find(id);
    if (it == table.rows.end()) continue;
    out << id << ',' << format_number(it->second.start) << ',' << format_number(it->second.end)
        << ',' << format_number(it->second.length()) << '\n';
  }
  return out.str();
}

}  // namespace tmkit
