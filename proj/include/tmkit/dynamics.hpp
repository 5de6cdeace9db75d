#pragma once

// The dynamic level: events as timed subregions, chronology derived from the
// static edges between their regions, and longest-path timing tables.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "tmkit/model.hpp"

namespace tmkit {

struct EventSpec {
  std::string id;
  std::string label;
  std::vector<std::string> covers;
  Polarity polarity = Polarity::Present;
  std::optional<Duration> duration;
  std::optional<Tense> tense;
};

/// Registers an event. Throws UnknownId for unknown covered ids,
/// DisconnectedCover for an empty or disconnected region, DuplicateId and
/// InvalidDuration (negative magnitude) as usual.
const Event& define_event(Model& model, EventSpec spec);

/// Node ids in the region of an event: listed nodes plus every node inside a
/// listed thimac's subtree. Containment preorder.
std::vector<std::string> covered_nodes(const Model& model, const Event& event);
std::vector<std::string> covered_nodes(const Model& model, const std::vector<std::string>& covers);

/// Thimacs an event touches: listed thimacs with their subtrees, and the owners of
/// listed nodes together with all their ancestors.
std::set<std::string> covered_thimacs(const Model& model, const Event& event);

/// Weak connectivity of a region over flow, trigger and containment links.
/// Vertices are the listed ids, the subtrees of listed thimacs, and the owner of
/// each listed node.
bool cover_is_connected(const Model& model, const std::vector<std::string>& covers);

/// Ids of unknown entries in `covers` (neither thimac nor node).
std::vector<std::string> unknown_cover_ids(const Model& model,
                                           const std::vector<std::string>& covers);

struct ChronologyGraph {
  std::vector<std::string> events;  // declaration order
  std::vector<ChronoEdge> edges;    // sorted by (from, to, kind) declaration order

  bool has_edge(std::string_view from, std::string_view to, ChronoKind kind) const;
  bool operator==(const ChronologyGraph&) const = default;
};

/// Static edge that witnesses precedence from `from` to `to`: it leaves the
/// region of `from` and enters the region of `to`.
struct Witness {
  std::string edge_id;
  std::string from_node;
  std::string to_node;
};
std::optional<Witness> find_witness(const Model& model, std::string_view from_event,
                                    std::string_view to_event);

/// Precede e->f for every witnessed pair unless the modeler declared `repeat e -> f`
/// (then Repeat). A cycle of flow/trigger edges inside one region yields a Repeat
/// self-edge. Declared repeat edges are always kept. Throws ChronoCycle when the
/// Precede part is cyclic.
ChronologyGraph derive_chronology(const Model& model);

/// Same edges as derive_chronology without the acyclicity check.
ChronologyGraph derive_chronology_unchecked(const Model& model);

/// Events on a Precede cycle, empty when acyclic.
std::vector<std::string> precede_cycle(const ChronologyGraph& graph);

/// Kahn order over Precede edges; ties broken by declaration order.
/// Throws ChronoCycle on a cycle.
std::vector<std::string> topological_order(const ChronologyGraph& graph);

/// Precede-reachability (transitive, excluding the trivial path).
bool precede_reaches(const ChronologyGraph& graph, std::string_view from, std::string_view to);

struct Interval {
  double start = 0;
  double end = 0;

  double length() const { return end - start; }
  bool operator==(const Interval&) const = default;
};

struct TimingTable {
  std::vector<std::string> order;  // event declaration order
  std::map<std::string, Interval> rows;
  std::map<std::string, double> durations;

  const Interval& at(const std::string& event) const { return rows.at(event); }
};

/// Longest-path schedule: sources start at 0, start(e) = max end of Precede
/// predecessors, end = start + duration (1 by default or from the event's
/// annotation, overridden by `durations`). An event whose region lies inside the
/// thimacs covered by another event is contained: the container is stretched to
/// enclose it. Throws InvalidDuration on a negative duration.
TimingTable build_timing(const Model& model, const ChronologyGraph& chronology,
                         const std::map<std::string, double>& durations = {});

/// Events whose region lies within the covered thimac subtrees of `container`.
std::vector<std::string> contained_events(const Model& model, std::string_view container);

/// CSV: event_id,start,end,duration
std::string timing_csv(const TimingTable& table);

/// Shortest round-tripping decimal text ("1", "0.5", "2.25").
std::string format_number(double value);

}  // namespace tmkit
