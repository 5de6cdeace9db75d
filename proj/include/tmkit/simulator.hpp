#pragma once

// Token-game execution of a validated dynamic model.
//
// Events are visited in a topological order of the chronology's Precede edges
// (declaration order breaks ties). While an event is visited, its covered nodes
// fire as soon as they are enabled:
//   - a node without incoming edges is enabled immediately;
//   - otherwise it needs a live token on some incoming flow (if it has any) and a
//     live token on some incoming trigger (if it has any);
//   - an Or junction forwards on its first live input, an And junction waits for
//     all of them.
// A node becomes dead when one of its required edge groups has only dead tokens
// (for And junctions: when any input is dead); dead nodes pass dead tokens on.
// A guarded Process whose guard evaluates false becomes dead instead of firing.
// Nodes covered by an Absent event are dead from the start; the event itself
// emits one registration record. Nodes outside every event fire silently.
// After an event has fired, each Repeat edge leaving it replays its target's
// firings up to max_repeats times.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tmkit/dynamics.hpp"
#include "tmkit/model.hpp"

namespace tmkit {

struct SimConfig {
  int max_repeats = 1;
  std::map<std::string, bool> inputs;  // guard input -> value (missing means false)
  std::int64_t max_steps = 10000;
};

enum class Outcome { Completed, Deadlock, StepBudgetExhausted };
std::string_view to_string(Outcome outcome);

struct TraceRecord {
  std::int64_t step = 0;
  std::string event;
  std::string action;
  std::string note;

  bool operator==(const TraceRecord&) const = default;
};

inline constexpr std::string_view kAbsentNote = "absent: registered";

struct Trace {
  std::vector<TraceRecord> records;
  Outcome outcome = Outcome::Completed;
  /// Every node that fired outside replays, silent ones included, in order.
  std::vector<std::string> firings;

  /// Events with at least one record, in order of first appearance.
  std::vector<std::string> fired_events() const;
  bool fired(std::string_view event) const;
  /// Index of the first record of `event`, or nullopt.
  std::optional<std::size_t> first_record(std::string_view event) const;

  bool operator==(const Trace&) const = default;
};

/// Throws InvalidConfig for max_steps <= 0 or max_repeats < 0.
Trace simulate(const Model& model, const ChronologyGraph& chronology, const SimConfig& config);

/// JSON lines: one {"step","event","action","note"} object per record, then
/// {"outcome": ...}.
std::string trace_jsonl(const Trace& trace);

/// Guard inputs referenced anywhere in the model, sorted.
std::set<std::string> guard_inputs(const Model& model);

struct ScenarioRow {
  std::map<std::string, bool> assignment;
  std::set<std::string> fired;
  Outcome outcome = Outcome::Completed;
};

struct ScenarioMatrix {
  std::vector<std::string> inputs;
  std::vector<std::string> events;  // declaration order, one CSV column each
  std::vector<ScenarioRow> rows;    // binary counting, first input most significant
};

inline constexpr std::size_t kMaxScenarioInputs = 16;

/// One simulation per assignment over {false,true}^n. Throws TooManyInputs for
/// n > 16 and UnknownInput for names no guard tests.
ScenarioMatrix scenario_matrix(const Model& model, const ChronologyGraph& chronology,
                               const std::vector<std::string>& input_names,
                               const SimConfig& base = {});

/// CSV: inputs..., one 0/1 column per event, outcome.
std::string scenario_csv(const ScenarioMatrix& matrix);

}  // namespace tmkit
