#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "fixtures.hpp"
#include "generator.hpp"
#include "tmkit/classifier.hpp"

using namespace tmkit;

namespace {

GroupClassification group(const std::string& fixture, const std::string& name = "all") {
  auto report = classify_model(tmtest::load_fixture(fixture));
  auto it = std::find_if(report.begin(), report.end(),
                         [&](const GroupClassification& g) { return g.group == name; });
  if (it == report.end()) throw std::runtime_error("no group " + name + " in " + fixture);
  return *it;
}

std::string prefixed(const std::string& id) {
  std::string out = "q";
  for (char c : id) {
    out += c;
    if (c == '.') out += 'q';
  }
  return out;
}

// Same structure, every identifier renamed and root thimacs and events listed
// in reverse.
Model renamed_and_permuted(const Model& m) {
  Model out = m;
  for (auto& t : out.thimacs) {
    t.id = prefixed(t.id);
    t.name = "q" + t.name;
    if (t.parent) t.parent = prefixed(*t.parent);
    for (auto& c : t.children) c = prefixed(c);
  }
  for (auto& a : out.actions) {
    a.id = prefixed(a.id);
    a.owner = prefixed(a.owner);
  }
  for (auto& s : out.storages) {
    s.id = prefixed(s.id);
    s.owner = prefixed(s.owner);
  }
  for (auto& j : out.junctions) {
    j.id = prefixed(j.id);
    j.owner = prefixed(j.owner);
  }
  for (auto& f : out.flows) f = {f.id, prefixed(f.from), prefixed(f.to)};
  for (auto& t : out.triggers) t = {t.id, prefixed(t.from), prefixed(t.to)};
  for (auto& e : out.events) {
    e.id = prefixed(e.id);
    for (auto& c : e.covers) c = prefixed(c);
  }
  for (auto& c : out.chronology) c = {prefixed(c.from), prefixed(c.to), c.kind};
  for (auto& g : out.focus) {
    for (auto& e : g.events) e = prefixed(e);
    std::reverse(g.events.begin(), g.events.end());
  }
  std::reverse(out.events.begin(), out.events.end());
  std::stable_partition(out.thimacs.begin(), out.thimacs.end(),
                        [](const Thimac& t) { return !t.parent; });
  auto roots = std::count_if(out.thimacs.begin(), out.thimacs.end(),
                             [](const Thimac& t) { return !t.parent; });
  std::reverse(out.thimacs.begin(), out.thimacs.begin() + roots);
  out.reindex();
  return out;
}

Vendler rule_table(bool stative, bool punctual, bool delimited, bool terminalized) {
  if (stative) return Vendler::State;
  if (punctual && delimited) return Vendler::Achievement;
  if (delimited || terminalized) return Vendler::Accomplishment;
  return Vendler::Activity;
}

}  // namespace

TEST(Classify, AgreementTable) {
  EXPECT_EQ(group("fig19_terry.tm", "running").cls.vendler, Vendler::Activity);
  EXPECT_EQ(group("fig19_terry.tm", "building").cls.vendler, Vendler::Accomplishment);
  EXPECT_EQ(performance_label(Vendler::Accomplishment), "performance");
  auto walked = group("fig20_walked.tm");
  EXPECT_EQ(walked.cls.vendler, Vendler::Activity);
  EXPECT_TRUE(walked.features.durative);
  EXPECT_EQ(group("fig22_five_houses.tm").cls.vendler, Vendler::Accomplishment);
  EXPECT_EQ(group("fig24_kiss.tm").cls.bach, Bach::Atomic);
  EXPECT_EQ(group("fig25_stumble.tm").cls.bach, Bach::Plural);
}

TEST(Classify, FeatureExamples) {
  auto driving = group("fig21_driving.tm").features;
  EXPECT_TRUE(driving.reflexive);
  EXPECT_FALSE(driving.delimited);
  auto building = group("fig19_terry.tm", "building").features;
  EXPECT_TRUE(building.continued);
  EXPECT_TRUE(building.terminalized);
  EXPECT_TRUE(building.delimited);
  auto walked = group("fig20_walked.tm").features;
  EXPECT_TRUE(walked.durative);
  EXPECT_FALSE(walked.delimited);
  EXPECT_TRUE(group("fig18_run_mile.tm").features.delimited);
  EXPECT_EQ(group("fig17_run.tm").cls.vendler, Vendler::Activity);
  EXPECT_EQ(group("fig23_circle.tm").cls.vendler, Vendler::Accomplishment);
}

TEST(Classify, SingleEventIsAtomicAndPunctual) {
  Model m = tmtest::parse_or_throw(R"(model "one" {
  thimac Door {
    create exists
    process open guard pushed
  }
  flow Door.exists -> Door.open
  event opened covers { Door.open }
})");
  auto g = derive_chronology(m);
  auto f = extract_features(m, g, {"opened"});
  EXPECT_TRUE(f.punctual);
  EXPECT_EQ(f.chain_length, 1);
  EXPECT_EQ(classify_bach(g, {"opened"}), Bach::Atomic);
  EXPECT_EQ(classify_vendler(f), Vendler::Achievement);
}

TEST(Classify, CreateAndStorageRegionIsState) {
  Model m = tmtest::parse_or_throw(R"(model "state" {
  thimac Shelf {
    create exists
    storage books
  }
  event there covers { Shelf }
})");
  auto report = classify_model(m);
  ASSERT_EQ(report.size(), 1u);
  EXPECT_TRUE(report[0].features.stative);
  EXPECT_EQ(report[0].cls.vendler, Vendler::State);
  EXPECT_EQ(performance_label(Vendler::State), "state");
}

TEST(Classify, EventlessModelHasEmptyReport) {
  EXPECT_TRUE(classify_model(tmtest::load_fixture("fig26_report.tm")).empty());
  EXPECT_EQ(classification_json({}), "{}\n");
}

TEST(Classify, FocusErrors) {
  Model m = tmtest::load_fixture("fig17_run.tm");
  auto g = derive_chronology(m);
  try {
    extract_features(m, g, {"nope"});
    FAIL();
  } catch (const ModelError& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownId);
  }
  EXPECT_THROW(extract_features(m, g, {}), ModelError);
}

TEST(Classify, TotalOverAllFeatureCombinations) {
  std::set<Vendler> seen;
  for (unsigned bits = 0; bits < 256; ++bits) {
    FeatureVector f;
    f.reflexive = bits & 1;
    f.continued = bits & 2;
    f.delimited = bits & 4;
    f.durative = bits & 8;
    f.punctual = bits & 16;
    f.terminalized = bits & 32;
    f.branchy = bits & 64;
    f.stative = bits & 128;
    Vendler v = classify_vendler(f);
    EXPECT_EQ(v, rule_table(f.stative, f.punctual, f.delimited, f.terminalized)) << bits;
    seen.insert(v);
  }
  EXPECT_EQ(seen.size(), 4u);
}

TEST(Classify, StableUnderRenamingAndReordering) {
  std::vector<Model> models;
  for (const auto& path : tmtest::fixture_files()) models.push_back(*parse_file(path).model);
  std::mt19937 rng(11);
  for (int i = 0; i < 60; ++i) models.push_back(tmtest::random_model(rng));
  for (const auto& m : models) {
    if (m.events.empty()) continue;
    Model other = renamed_and_permuted(m);
    auto a = classify_model(m);
    auto b = classify_model(other);
    ASSERT_EQ(a.size(), b.size()) << m.name;
    for (std::size_t k = 0; k < a.size(); ++k) {
      auto& match = *std::find_if(b.begin(), b.end(),
                                  [&](const GroupClassification& g) { return g.group == a[k].group; });
      EXPECT_EQ(a[k].cls, match.cls) << m.name << " " << a[k].group;
      EXPECT_EQ(a[k].features, match.features) << m.name << " " << a[k].group;
    }
  }
}

TEST(Classify, CompletionTestDelimitsActivities) {
  for (const auto& path : tmtest::fixture_files()) {
    Model m = *parse_file(path).model;
    for (const auto& before : classify_model(m)) {
      if (before.cls.vendler != Vendler::Activity) continue;
      // Attach a guarded check to the first process of the group.
      Model changed = m;
      std::string process;
      std::size_t event = 0;
      for (const auto& id : before.events) {
        for (const auto& n : covered_nodes(m, *m.find_event(id))) {
          const ActionNode* a = m.find_action(n);
          if (process.empty() && a && a->kind == ActionKind::Process) {
            process = n;
            event = *m.event_index(id);
          }
        }
      }
      if (process.empty()) continue;
      std::string check = add_action(changed, *m.owner_of(process), ActionKind::Process,
                                     "completion_check", "", Guard{"done", false});
      connect_trigger(changed, process, check);
      auto covered = covered_nodes(changed, changed.events[event]);
      if (std::find(covered.begin(), covered.end(), check) == covered.end()) {
        changed.events[event].covers.push_back(check);
        changed.reindex();
      }
      auto after = classify_model(changed);
      auto& g = *std::find_if(after.begin(), after.end(),
                              [&](const GroupClassification& x) { return x.group == before.group; });
      EXPECT_EQ(g.cls.vendler, Vendler::Accomplishment) << path << " " << before.group;
      FeatureVector expect = before.features;
      expect.delimited = g.features.delimited;
      expect.terminalized = g.features.terminalized;
      EXPECT_EQ(g.features, expect) << path;
      EXPECT_TRUE(g.features.delimited) << path;
    }
  }
}

TEST(Classify, JsonAndText) {
  auto report = classify_model(tmtest::load_fixture("fig21_driving.tm"));
  EXPECT_EQ(classification_text(report), "all: Activity (activity), bach Atomic\n");
  std::string json = classification_json(report);
  EXPECT_NE(json.find("\"vendler\": \"Activity\""), std::string::npos);
  EXPECT_NE(json.find("\"reflexive\": true"), std::string::npos);
  EXPECT_NE(json.find("\"chain_length\": 2"), std::string::npos);
}
