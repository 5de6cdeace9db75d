#pragma once

// Fixture corpus: `.tm` files plus a manifest of machine-checkable expectations.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tmkit/dynamics.hpp"
#include "tmkit/simulator.hpp"

namespace tmkit {

struct ClassExpectation {
  std::optional<std::string> vendler;
  std::optional<std::string> bach;
  std::map<std::string, bool> features;  // subset of the boolean features
};

struct TraceExpectation {
  std::map<std::string, bool> inputs;
  int max_repeats = 1;
  std::vector<std::string> fires;    // events with at least one record
  std::vector<std::string> silent;   // events with no record
  std::vector<std::string> absent;   // exactly one registration record each
  std::string outcome = "Completed";
};

struct FixtureExpectation {
  bool validates = true;
  std::map<std::string, ClassExpectation> classes;  // focus group -> labels
  std::optional<TraceExpectation> trace;
  std::map<std::string, Interval> timing;
};

struct Fixture {
  std::string id;
  std::string file;  // relative to the corpus directory
  std::string caption;
  FixtureExpectation expect;
};

/// Reads `<dir>/manifest.json`. Throws ModelError(MalformedJson) on schema errors.
std::vector<Fixture> load_manifest(const std::string& dir);

struct FixtureResult {
  std::string id;
  bool missing = false;
  std::vector<std::string> failures;
  /// Output files keyed by suffix ("trace.jsonl", "report.json", ...).
  std::map<std::string, std::string> artifacts;

  bool passed() const { return !missing && failures.empty(); }
};

FixtureResult run_fixture(const Fixture& fixture, const std::string& dir);

struct CorpusSummary {
  std::vector<FixtureResult> results;

  bool any_missing() const;
  bool all_passed() const;
  /// One "id PASS" / "id FAIL: reason" line per fixture, then a totals line.
  std::string text() const;
};

CorpusSummary run_corpus(const std::string& dir);

/// Writes every artifact as `<out>/<id>.<suffix>` plus `<out>/summary.txt`.
void write_artifacts(const CorpusSummary& summary, const std::string& out_dir);

}  // namespace tmkit
