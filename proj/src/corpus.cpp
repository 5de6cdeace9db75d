#include "tmkit/corpus.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "tmkit/classifier.hpp"
#include "tmkit/dsl.hpp"
#include "tmkit/export.hpp"
#include "tmkit/validator.hpp"

namespace tmkit {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

ClassExpectation parse_class(const json& j) {
  ClassExpectation c;
  if (j.contains("vendler")) c.vendler = j.at("vendler").get<std::string>();
  if (j.contains("bach")) c.bach = j.at("bach").get<std::string>();
  if (j.contains("features")) c.features = j.at("features").get<std::map<std::string, bool>>();
  return c;
}

TraceExpectation parse_trace(const json& j) {
  TraceExpectation t;
  if (j.contains("inputs")) t.inputs = j.at("inputs").get<std::map<std::string, bool>>();
  t.max_repeats = j.value("max_repeats", 1);
  if (j.contains("fires")) t.fires = j.at("fires").get<std::vector<std::string>>();
  if (j.contains("silent")) t.silent = j.at("silent").get<std::vector<std::string>>();
  if (j.contains("absent")) t.absent = j.at("absent").get<std::vector<std::string>>();
  t.outcome = j.value("outcome", std::string("Completed"));
  return t;
}

bool feature(const FeatureVector& f, const std::string& name, bool& value) {
  static const std::map<std::string, bool FeatureVector::*> fields = {
      {"reflexive", &FeatureVector::reflexive},   {"continued", &FeatureVector::continued},
      {"delimited", &FeatureVector::delimited},   {"durative", &FeatureVector::durative},
      {"punctual", &FeatureVector::punctual},     {"terminalized", &FeatureVector::terminalized},
      {"branchy", &FeatureVector::branchy},       {"stative", &FeatureVector::stative},
  };
  auto it = fields.find(name);
  if (it == fields.end()) return false;
  value = f.*(it->second);
  return true;
}

void check_classes(const FixtureExpectation& expect, const std::vector<GroupClassification>& report,
                   std::vector<std::string>& failures) {
  for (const auto& [group, want] : expect.classes) {
    auto it = std::find_if(report.begin(), report.end(),
                           [&](const GroupClassification& g) { return g.group == group; });
    if (it == report.end()) {
      failures.push_back("no focus group '" + group + "'");
      continue;
    }
    if (want.vendler && *want.vendler != to_string(it->cls.vendler))
      failures.push_back(group + ": vendler " + std::string(to_string(it->cls.vendler)) +
                         ", expected " + *want.vendler);
    if (want.bach && *want.bach != to_string(it->cls.bach))
      failures.push_back(group + ": bach " + std::string(to_string(it->cls.bach)) + ", expected " +
                         *want.bach);
    for (const auto& [name, value] : want.features) {
      bool got = false;
      if (!feature(it->features, name, got)) {
        failures.push_back(group + ": unknown feature '" + name + "'");
      } else if (got != value) {
        failures.push_back(group + ": feature " + name + " is " + (got ? "true" : "false"));
      }
    }
  }
}

void check_trace(const TraceExpectation& want, const Trace& trace,
                 std::vector<std::string>& failures) {
  for (const auto& e : want.fires) {
    if (!trace.fired(e)) failures.push_back("event " + e + " did not fire");
  }
  for (const auto& e : want.silent) {
    if (trace.fired(e)) failures.push_back("event " + e + " fired");
  }
  for (const auto& e : want.absent) {
    std::size_t count = 0;
    bool registered = false;
    for (const auto& r : trace.records) {
      if (r.event != e) continue;
      ++count;
      registered = r.note == kAbsentNote;
    }
    if (count != 1 || !registered)
      failures.push_back("absent event " + e + " has " + std::to_string(count) + " records");
  }
  if (want.outcome != to_string(trace.outcome))
    failures.push_back("outcome " + std::string(to_string(trace.outcome)));
}

}  // namespace

std::vector<Fixture> load_manifest(const std::string& dir) {
  fs::path path = fs::path(dir) / "manifest.json";
  std::ifstream in(path);
  if (!in) throw ModelError(ErrorCode::MalformedJson, "cannot read " + path.string());
  try {
    json doc = json::parse(in);
    std::vector<Fixture> out;
    for (const auto& item : doc.at("fixtures")) {
      Fixture f;
      f.id = item.at("id").get<std::string>();
      f.file = item.at("file").get<std::string>();
      f.caption = item.value("caption", std::string());
      const json& e = item.at("expect");
      f.expect.validates = e.value("validates", true);
      if (e.contains("classes")) {
        for (const auto& [group, c] : e.at("classes").items()) f.expect.classes[group] = parse_class(c);
      }
      if (e.contains("trace")) f.expect.trace = parse_trace(e.at("trace"));
      if (e.contains("timing")) {
        for (const auto& [event, bounds] : e.at("timing").items())
          f.expect.timing[event] = Interval{bounds.at(0).get<double>(), bounds.at(1).get<double>()};
      }
      out.push_back(std::move(f));
    }
    return out;
  } catch (const json::exception& e) {
    throw ModelError(ErrorCode::MalformedJson, path.string() + ": " + e.what());
  }
}

FixtureResult run_fixture(const Fixture& fixture, const std::string& dir) {
  FixtureResult result;
  result.id = fixture.id;
  fs::path path = fs::path(dir) / fixture.file;
  if (!fs::exists(path)) {
    result.missing = true;
    result.failures.push_back("missing file " + fixture.file);
    return result;
  }
  auto& failures = result.failures;
  ParseResult parsed = parse_model(read_text(path));
  if (!parsed.ok()) {
    for (const auto& d : parsed.diagnostics) failures.push_back(format_diagnostic(d, fixture.file));
    return result;
  }
  const Model& model = *parsed.model;
  result.artifacts["canonical.tm"] = render_model(model);

  ValidationReport report = validate_all(model, &parsed.spans);
  result.artifacts["report.json"] = report_json(report);
  if (report.ok != fixture.expect.validates) {
    failures.push_back(report.ok ? "validated but was expected to fail" : "validation failed");
    for (const auto& d : report.findings) {
      if (d.severity == Severity::Error) failures.push_back(format_diagnostic(d, fixture.file));
    }
  }
  result.artifacts["export.json"] = export_json(model);
  result.artifacts["static.dot"] = export_dot(model, DotLevel::Static);
  if (!report.ok || model.events.empty()) return result;

  try {
    ChronologyGraph chronology = derive_chronology(model);
    result.artifacts["dynamic.dot"] = export_dot(model, DotLevel::Dynamic);
    TimingTable timing = build_timing(model, chronology);
    result.artifacts["timing.csv"] = timing_csv(timing);
    for (const auto& [event, want] : fixture.expect.timing) {
      auto it = timing.rows.find(event);
      if (it == timing.rows.end()) {
        failures.push_back("no timing row for " + event);
      } else if (!(it->second == want)) {
        failures.push_back("timing " + event + " = [" + format_number(it->second.start) + "," +
                           format_number(it->second.end) + "]");
      }
    }

    SimConfig config;
    if (fixture.expect.trace) {
      config.inputs = fixture.expect.trace->inputs;
      config.max_repeats = fixture.expect.trace->max_repeats;
    }
    Trace trace = simulate(model, chronology, config);
    result.artifacts["trace.jsonl"] = trace_jsonl(trace);
    if (fixture.expect.trace) check_trace(*fixture.expect.trace, trace, failures);

    auto classes = classify_model(model, chronology);
    result.artifacts["classify.json"] = classification_json(classes);
    check_classes(fixture.expect, classes, failures);
  } catch (const ModelError& e) {
    failures.push_back(std::string(to_string(e.code())) + ": " + e.what());
  }
  return result;
}

bool CorpusSummary::any_missing() const {
  return std::any_of(results.begin(), results.end(), [](const FixtureResult& r) { return r.missing; });
}

bool CorpusSummary::all_passed() const {
  return std::all_of(results.begin(), results.end(), [](const FixtureResult& r) { return r.passed(); });
}

std::string CorpusSummary::text() const {
  std::ostringstream out;
  std::size_t passed = 0;
  for (const auto& r : results) {
    if (r.passed()) {
      ++passed;
      out << r.id << " PASS\n";
      continue;
    }
    out << r.id << " FAIL: " << r.failures.front() << '\n';
    for (std::size_t i = 1; i < r.failures.size(); ++i) out << "  " << r.failures[i] << '\n';
  }
  out << passed << '/' << results.size() << " fixtures passed\n";
  return out.str();
}

CorpusSummary run_corpus(const std::string& dir) {
  CorpusSummary summary;
  for (const auto& fixture : load_manifest(dir)) summary.results.push_back(run_fixture(fixture, dir));
  return summary;
}

void write_artifacts(const CorpusSummary& summary, const std::string& out_dir) {
  fs::create_directories(out_dir);
  for (const auto& r : summary.results) {
    for (const auto& [suffix, content] : r.artifacts) {
      std::ofstream out(fs::path(out_dir) / (r.id + "." + suffix), std::ios::binary);
      out << content;
    }
  }
  std::ofstream out(fs::path(out_dir) / "summary.txt", std::ios::binary);
  out << summary.text();
}

}  // namespace tmkit
