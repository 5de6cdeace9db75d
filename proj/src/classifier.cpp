#include "tmkit/classifier.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

#include <json.hpp>

namespace tmkit {

std::string_view to_string(Vendler v) {
  switch (v) {
    case Vendler::State: return "State";
    case Vendler::Activity: return "Activity";
    case Vendler::Accomplishment: return "Accomplishment";
    case Vendler::Achievement: return "Achievement";
  }
  return "?";
}

std::string_view to_string(Bach b) {
  switch (b) {
    case Bach::Atomic: return "Atomic";
    case Bach::Plural: return "Plural";
    case Bach::NotApplicable: return "NotApplicable";
  }
  return "?";
}

std::string_view performance_label(Vendler v) {
  switch (v) {
    case Vendler::State: return "state";
    case Vendler::Activity: return "activity";
    case Vendler::Accomplishment:
    case Vendler::Achievement: return "performance";
  }
  return "?";
}

namespace {

using Adjacency = std::map<std::string, std::vector<std::string>>;

// Precede edges with both ends in the focus.
Adjacency focus_successors(const ChronologyGraph& chronology, const std::set<std::string>& focus) {
  Adjacency succ;
  for (const auto& id : focus) succ[id];
  for (const auto& e : chronology.edges) {
    if (e.kind == ChronoKind::Precede && focus.contains(e.from) && focus.contains(e.to))
      succ[e.from].push_back(e.to);
  }
  return succ;
}

std::set<std::string> reachable(const Adjacency& succ, const std::string& from) {
  std::set<std::string> seen;
  std::vector<std::string> stack = succ.at(from);
  while (!stack.empty()) {
    std::string e = std::move(stack.back());
    stack.pop_back();
    if (!seen.insert(e).second) continue;
    const auto& next = succ.at(e);
    stack.insert(stack.end(), next.begin(), next.end());
  }
  return seen;
}

int longest_chain(const Adjacency& succ) {
  std::map<std::string, int> memo;
  std::function<int(const std::string&, std::size_t)> depth = [&](const std::string& e,
                                                                  std::size_t guard) {
    if (auto it = memo.find(e); it != memo.end()) return it->second;
    int best = 1;
    if (guard <= succ.size()) {
      for (const auto& next : succ.at(e)) best = std::max(best, 1 + depth(next, guard + 1));
    }
    return memo[e] = best;
  };
  int best = 0;
  for (const auto& [e, _] : succ) best = std::max(best, depth(e, 0));
  return best;
}

bool has_process(const Model& model, const std::vector<std::string>& nodes) {
  return std::any_of(nodes.begin(), nodes.end(), [&](const std::string& n) {
    const ActionNode* a = model.find_action(n);
    return a && a->kind == ActionKind::Process;
  });
}

}  // namespace

FeatureVector extract_features(const Model& model, const ChronologyGraph& chronology,
                               const std::vector<std::string>& focus) {
  if (focus.empty()) throw ModelError(ErrorCode::InvalidName, "focus is empty");
  std::set<std::string> members;
  for (const auto& id : focus) {
    if (!model.find_event(id)) throw ModelError(ErrorCode::UnknownId, "unknown event '" + id + "'");
    members.insert(id);
  }

  FeatureVector fv;
  std::map<std::string, std::vector<std::string>> regions;
  std::set<std::string> region;
  for (const auto& id : members) {
    regions[id] = covered_nodes(model, *model.find_event(id));
    region.insert(regions[id].begin(), regions[id].end());
  }

  for (const auto& e : chronology.edges) {
    if (e.kind != ChronoKind::Repeat || !members.contains(e.from) || !members.contains(e.to))
      continue;
    (e.from == e.to ? fv.reflexive : fv.continued) = true;
  }

  for (const auto& id : members) {
    const Event& event = *model.find_event(id);
    if (event.duration) fv.durative = true;
    for (const auto& n : regions[id]) {
      const ActionNode* a = model.find_action(n);
      if (a && a->kind == ActionKind::Process && a->guard) fv.delimited = true;
    }
    for (const auto& c : event.covers) {
      std::vector<std::string> thimacs;
      if (model.find_thimac(c)) {
        thimacs = thimac_subtree(model, c);
      } else if (auto owner = model.owner_of(c)) {
        thimacs.push_back(*owner);
      }
      for (const auto& t : thimacs) {
        if (model.find_thimac(t)->delimiter) fv.delimited = true;
      }
    }
  }

  if (members.size() == 1) {
    const auto& nodes = regions.begin()->second;
    fv.punctual = std::count_if(nodes.begin(), nodes.end(), [&](const std::string& n) {
                    return model.find_action(n) != nullptr;
                  }) == 1;
  }

  Adjacency succ = focus_successors(chronology, members);
  for (const auto& [id, next] : succ) {
    if (next.size() >= 2) fv.branchy = true;
  }
  for (const auto& [id, next] : succ) {
    if (!has_process(model, regions[id])) continue;
    for (const auto& later : reachable(succ, id)) {
      if (succ.at(later).empty() && !has_process(model, regions[later])) fv.terminalized = true;
    }
  }

  bool internal_edge = std::any_of(model.flows.begin(), model.flows.end(), [&](const FlowEdge& f) {
                         return region.contains(f.from) && region.contains(f.to);
                       }) ||
                       std::any_of(model.triggers.begin(), model.triggers.end(),
                                   [&](const TriggerEdge& t) {
                                     return region.contains(t.from) && region.contains(t.to);
                                   });
  fv.stative = !has_process(model, {region.begin(), region.end()}) && !internal_edge;
  fv.chain_length = longest_chain(succ);
  return fv;
}

Vendler classify_vendler(const FeatureVector& f) {
  if (f.stative) return Vendler::State;
  if (f.punctual && f.delimited) return Vendler::Achievement;
  if (f.delimited || f.terminalized) return Vendler::Accomplishment;
  return Vendler::Activity;
}

Bach classify_bach(const ChronologyGraph& chronology, const std::vector<std::string>& focus) {
  std::set<std::string> members(focus.begin(), focus.end());
  if (members.empty()) return Bach::NotApplicable;
  Adjacency succ = focus_successors(chronology, members);
  std::map<std::string, std::set<std::string>> reach;
  for (const auto& id : members) reach[id] = reachable(succ, id);

  for (const auto& c : members) {
    bool culminates = std::all_of(members.begin(), members.end(), [&](const std::string& other) {
      return other == c || reach[other].contains(c);
    });
    if (culminates) return Bach::Atomic;
  }
  std::vector<std::string> sinks;
  for (const auto& id : members) {
    if (succ.at(id).empty()) sinks.push_back(id);
  }
  for (std::size_t i = 0; i < sinks.size(); ++i) {
    for (std::size_t j = i + 1; j < sinks.size(); ++j) {
      for (const auto& p : members) {
        if (reach[p].contains(sinks[i]) && reach[p].contains(sinks[j])) return Bach::Plural;
      }
    }
  }
  return Bach::NotApplicable;
}

std::vector<GroupClassification> classify_model(const Model& model,
                                                const ChronologyGraph& chronology) {
  std::vector<GroupClassification> out;
  if (model.events.empty()) return out;
  std::vector<FocusGroup> groups = model.focus;
  if (groups.empty()) {
    FocusGroup all{"all", {}};
    for (const auto& e : model.events) all.events.push_back(e.id);
    groups.push_back(std::move(all));
  }
  for (const auto& g : groups) {
    GroupClassification gc;
    gc.group = g.name;
    gc.events = g.events;
    gc.features = extract_features(model, chronology, g.events);
    gc.cls.vendler = classify_vendler(gc.features);
    gc.cls.bach = classify_bach(chronology, g.events);
    out.push_back(std::move(gc));
  }
  return out;
}

std::vector<GroupClassification> classify_model(const Model& model) {
  if (model.events.empty()) return {};
  return classify_model(model, derive_chronology(model));
}

std::string classification_json(const std::vector<GroupClassification>& report) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::object();
  for (const auto& g : report) {
    const auto& f = g.features;
    doc[g.group] = {
        {"vendler", to_string(g.cls.vendler)},
        {"performance", performance_label(g.cls.vendler)},
        {"bach", to_string(g.cls.bach)},
        {"events", g.events},
        {"features",
         {{"reflexive", f.reflexive},
          {"continued", f.continued},
          {"delimited", f.delimited},
          {"durative", f.durative},
          {"punctual", f.punctual},
          {"terminalized", f.terminalized},
          {"branchy", f.branchy},
          {"stative", f.stative},
          {"chain_length", f.chain_length}}},
    };
  }
  return doc.dump(2) + "\n";
}

std::string classification_text(const std::vector<GroupClassification>& report) {
  std::ostringstream out;
  for (const auto& g : report) {
    out << g.group << ": " << to_string(g.cls.vendler) << " (" << performance_label(g.cls.vendler)
        << "), bach " << to_string(g.cls.bach) << '\n';
  }
  return out.str();
}

}  // namespace tmkit
