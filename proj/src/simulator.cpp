#include "tmkit/simulator.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>

namespace tmkit {

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::Completed: return "Completed";
    case Outcome::Deadlock: return "Deadlock";
    case Outcome::StepBudgetExhausted: return "StepBudgetExhausted";
  }
  return "?";
}

std::vector<std::string> Trace::fired_events() const {
  std::vector<std::string> out;
  for (const auto& r : records) {
    if (std::find(out.begin(), out.end(), r.event) == out.end()) out.push_back(r.event);
  }
  return out;
}

bool Trace::fired(std::string_view event) const { return first_record(event).has_value(); }

std::optional<std::size_t> Trace::first_record(std::string_view event) const {
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].event == event) return i;
  }
  return std::nullopt;
}

namespace {

enum class State { Pending, Fired, Dead };
enum class Token { None, Live, Dead };
enum class Verdict { Wait, Fire, Die };

struct InEdge {
  std::size_t edge;  // index into Run::tokens
  bool trigger;
};

struct BudgetExhausted {};

class Run {
 public:
  Run(const Model& model, const ChronologyGraph& chronology, const SimConfig& config)
      : m_(model), chrono_(chronology), config_(config) {
    for (const auto& id : m_.nodes_in_order()) state_[id] = State::Pending;
    auto add_edge = [&](const std::string& from, const std::string& to, bool trigger) {
      std::size_t index = tokens_.size();
      tokens_.push_back(Token::None);
      outgoing_[from].push_back(index);
      if (from != to) incoming_[to].push_back({index, trigger});  // self-loops never gate
    };
    for (const auto& f : m_.flows) add_edge(f.from, f.to, false);
    for (const auto& t : m_.triggers) add_edge(t.from, t.to, true);

    for (const auto& e : m_.events) {
      auto nodes = covered_nodes(m_, e);
      for (const auto& n : nodes) {
        covered_.insert(n);
        if (e.polarity == Polarity::Absent) inert_.insert(n);
      }
      region_[e.id] = std::move(nodes);
    }
  }

  Trace execute() {
    try {
      for (const auto& n : m_.nodes_in_order()) {
        if (inert_.contains(n)) settle(n, State::Dead);
      }
      auto order = topological_order(chrono_);
      for (bool progress = true; progress;) {
        progress = false;
        for (const auto& id : order) progress |= visit(id);
      }
      replay(order);
      if (deadlocked()) trace_.outcome = Outcome::Deadlock;
    } catch (const BudgetExhausted&) {
      trace_.outcome = Outcome::StepBudgetExhausted;
    }
    return std::move(trace_);
  }

 private:
  void record(const std::string& event, const std::string& action, std::string note) {
    if (static_cast<std::int64_t>(trace_.records.size()) >= config_.max_steps) throw BudgetExhausted{};
    std::int64_t step = static_cast<std::int64_t>(trace_.records.size()) + 1;
    trace_.records.push_back({step, event, action, std::move(note)});
  }

  void settle(const std::string& node, State state) {
    state_[node] = state;
    Token token = state == State::Fired ? Token::Live : Token::Dead;
    for (std::size_t edge : outgoing_[node]) tokens_[edge] = token;
    if (state == State::Fired) trace_.firings.push_back(node);
  }

  // Live/dead/waiting state of one group of incoming edges.
  static Verdict group(const std::vector<Token>& tokens) {
    if (tokens.empty()) return Verdict::Fire;
    if (std::any_of(tokens.begin(), tokens.end(), [](Token t) { return t == Token::Live; }))
      return Verdict::Fire;
    if (std::all_of(tokens.begin(), tokens.end(), [](Token t) { return t == Token::Dead; }))
      return Verdict::Die;
    return Verdict::Wait;
  }

  Verdict evaluate(const std::string& node) {
    std::vector<Token> flows;
    std::vector<Token> triggers;
    for (const auto& in : incoming_[node]) (in.trigger ? triggers : flows).push_back(tokens_[in.edge]);

    if (m_.node_kind(node) == NodeKind::Junction) {
      std::vector<Token> all = flows;
      all.insert(all.end(), triggers.begin(), triggers.end());
      auto ref = m_.find(node);
      if (m_.junctions[ref->index].mode == JunctionMode::Or) return group(all);
      if (std::any_of(all.begin(), all.end(), [](Token t) { return t == Token::Dead; }))
        return Verdict::Die;
      if (std::all_of(all.begin(), all.end(), [](Token t) { return t == Token::Live; }))
        return Verdict::Fire;
      return Verdict::Wait;
    }

    Verdict f = group(flows);
    Verdict t = group(triggers);
    if (f == Verdict::Die || t == Verdict::Die) return Verdict::Die;
    if (f == Verdict::Wait || t == Verdict::Wait) return Verdict::Wait;
    if (const ActionNode* a = m_.find_action(node); a && a->guard) {
      auto it = config_.inputs.find(a->guard->input);
      bool value = it != config_.inputs.end() && it->second;
      if (value == a->guard->negated) return Verdict::Die;
    }
    return Verdict::Fire;
  }

  // Uncovered nodes fire silently; any pending node may die. Returns true on change.
  bool free_sweep() {
    bool any = false;
    for (bool changed = true; changed;) {
      changed = false;
      for (const auto& n : m_.nodes_in_order()) {
        if (state_[n] != State::Pending) continue;
        Verdict v = evaluate(n);
        if (v == Verdict::Die || (v == Verdict::Fire && !covered_.contains(n))) {
          settle(n, v == Verdict::Fire ? State::Fired : State::Dead);
          changed = any = true;
        }
      }
    }
    return any;
  }

  bool visit(const std::string& event_id) {
    const Event* event = m_.find_event(event_id);
    if (!event) return false;
    if (event->polarity == Polarity::Absent) {
      if (!registered_.insert(event_id).second) return false;
      record(event_id, event->covers.front(), std::string(kAbsentNote));
      return true;
    }
    bool any = false;
    for (bool changed = true; changed;) {
      changed = free_sweep();
      for (const auto& n : region_[event_id]) {
        if (state_[n] != State::Pending) continue;
        Verdict v = evaluate(n);
        if (v == Verdict::Wait) continue;
        if (v == Verdict::Fire) {
          record(event_id, n, "");
          originals_[event_id].push_back(n);
        }
        settle(n, v == Verdict::Fire ? State::Fired : State::Dead);
        changed = true;
      }
      any |= changed;
    }
    return any;
  }

  void replay(const std::vector<std::string>& order) {
    std::map<std::string, int> passes;
    for (const auto& [event, actions] : originals_) passes[event] = 1;
    for (const auto& source : order) {
      if (!passes.contains(source)) continue;
      for (const auto& edge : chrono_.edges) {
        if (edge.kind != ChronoKind::Repeat || edge.from != source) continue;
        auto it = originals_.find(edge.to);
        if (it == originals_.end()) continue;
        for (int k = 0; k < config_.max_repeats && passes[edge.to] < 1 + config_.max_repeats; ++k) {
          int pass = passes[edge.to]++;
          for (const auto& action : it->second)
            record(edge.to, action, "repeat " + std::to_string(pass));
        }
      }
    }
  }

  bool deadlocked() {
    for (const auto& n : m_.nodes_in_order()) {
      if (state_[n] != State::Pending) continue;
      for (const auto& in : incoming_[n]) {
        if (tokens_[in.edge] == Token::Live) return true;
      }
    }
    return false;
  }

  const Model& m_;
  const ChronologyGraph& chrono_;
  const SimConfig& config_;
  Trace trace_;
  std::map<std::string, State> state_;
  std::vector<Token> tokens_;
  std::map<std::string, std::vector<std::size_t>> outgoing_;
  std::map<std::string, std::vector<InEdge>> incoming_;
  std::set<std::string> covered_;
  std::set<std::string> inert_;
  std::map<std::string, std::vector<std::string>> region_;
  std::map<std::string, std::vector<std::string>> originals_;
  std::set<std::string> registered_;
};

}  // namespace

Trace simulate(const Model& model, const ChronologyGraph& chronology, const SimConfig& config) {
  if (config.max_steps <= 0) throw ModelError(ErrorCode::InvalidConfig, "max_steps must be positive");
  if (config.max_repeats < 0)
    throw ModelError(ErrorCode::InvalidConfig, "max_repeats must not be negative");
  return Run(model, chronology, config).execute();
}

std::string trace_jsonl(const Trace& trace) {
  std::ostringstream out;
  for (const auto& r : trace.records) {
    nlohmann::ordered_json line{{"step", r.step}, {"event", r.event}, {"action", r.action},
                                {"note", r.note}};
    out << line.dump() << '\n';
  }
  out << nlohmann::ordered_json{{"outcome", to_string(trace.outcome)}}.dump() << '\n';
  return out.str();
}

std::set<std::string> guard_inputs(const Model& model) {
  std::set<std::string> out;
  for (const auto& a : model.actions) {
    if (a.guard) out.insert(a.guard->input);
  }
  return out;
}

ScenarioMatrix scenario_matrix(const Model& model, const ChronologyGraph& chronology,
                               const std::vector<std::string>& input_names,
                               const SimConfig& base) {
  if (input_names.size() > kMaxScenarioInputs)
    throw ModelError(ErrorCode::TooManyInputs, "scenario matrices take at most " +
                                                   std::to_string(kMaxScenarioInputs) + " inputs");
  auto known = guard_inputs(model);
  std::set<std::string> seen;
  for (const auto& name : input_names) {
    if (!known.contains(name))
      throw ModelError(ErrorCode::UnknownInput, "no guard tests input '" + name + "'");
    if (!seen.insert(name).second)
      throw ModelError(ErrorCode::InvalidConfig, "input '" + name + "' listed twice");
  }

  ScenarioMatrix matrix;
  matrix.inputs = input_names;
  matrix.events = chronology.events;
  const std::size_t n = input_names.size();
  for (std::size_t bits = 0; bits < (std::size_t{1} << n); ++bits) {
    SimConfig config = base;
    ScenarioRow row;
    for (std::size_t k = 0; k < n; ++k) {
      bool value = (bits >> (n - 1 - k)) & 1U;
      row.assignment[input_names[k]] = value;
      config.inputs[input_names[k]] = value;
    }
    Trace trace = simulate(model, chronology, config);
    for (const auto& e : trace.fired_events()) row.fired.insert(e);
    row.outcome = trace.outcome;
    matrix.rows.push_back(std::move(row));
  }
  return matrix;
}

std::string scenario_csv(const ScenarioMatrix& matrix) {
  std::ostringstream out;
  for (const auto& name : matrix.inputs) out << name << ',';
  for (const auto& e : matrix.events) out << e << ',';
  out << "outcome\n";
  for (const auto& row : matrix.rows) {
    for (const auto& name : matrix.inputs) out << (row.assignment.at(name) ? 1 : 0) << ',';
    for (const auto& e : matrix.events) out << (row.fired.contains(e) ? 1 : 0) << ',';
    out << to_string(row.outcome) << '\n';
  }
  return out.str();
}

}  // namespace tmkit
