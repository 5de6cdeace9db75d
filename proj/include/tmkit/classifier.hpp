#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "tmkit/dynamics.hpp"
#include "tmkit/model.hpp"

namespace tmkit {

/// Structural features of a group of events.
struct FeatureVector {
  bool reflexive = false;     // Repeat self-edge on a focus event
  bool continued = false;     // Repeat edge back to an earlier focus event
  bool delimited = false;     // guarded completion test or delimiter thimac in the region
  bool durative = false;      // some focus event carries a duration
  bool punctual = false;      // a single event covering exactly one action
  bool terminalized = false;  // a process-free sink event reached from a process event
  bool branchy = false;       // some focus event has >= 2 Precede successors
  bool stative = false;       // create-only region: no process, no flow, no trigger
  int chain_length = 0;       // events on the longest Precede path

  bool operator==(const FeatureVector&) const = default;
};

enum class Vendler { State, Activity, Accomplishment, Achievement };
enum class Bach { Atomic, Plural, NotApplicable };

std::string_view to_string(Vendler v);
std::string_view to_string(Bach b);
/// The states/activities/performances naming of the same split.
std::string_view performance_label(Vendler v);

struct EventClass {
  Vendler vendler = Vendler::Activity;
  Bach bach = Bach::NotApplicable;

  bool operator==(const EventClass&) const = default;
};

/// Throws UnknownId for unknown focus ids and InvalidName for an empty focus.
FeatureVector extract_features(const Model& model, const ChronologyGraph& chronology,
                               const std::vector<std::string>& focus);

/// First matching rule: stative => State; punctual and delimited => Achievement;
/// delimited or terminalized => Accomplishment; otherwise Activity.
Vendler classify_vendler(const FeatureVector& features);

/// Atomic when one focus event is Precede-reached by every other one; Plural when
/// there is no such event but two sinks share a Precede predecessor; otherwise
/// NotApplicable.
Bach classify_bach(const ChronologyGraph& chronology, const std::vector<std::string>& focus);

struct GroupClassification {
  std::string group;
  std::vector<std::string> events;
  FeatureVector features;
  EventClass cls;
};

/// One entry per declared focus group, or a single "all" group over every event
/// when none is declared; empty for eventless models.
std::vector<GroupClassification> classify_model(const Model& model);
std::vector<GroupClassification> classify_model(const Model& model,
                                                const ChronologyGraph& chronology);

/// {group: {vendler, performance, bach, events:[...], features:{...}}}
std::string classification_json(const std::vector<GroupClassification>& report);
/// "group: Vendler (performance label), bach X" per line.
std::string classification_text(const std::vector<GroupClassification>& report);

}  // namespace tmkit
