#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "fixtures.hpp"
#include "generator.hpp"
#include "tmkit/dynamics.hpp"
#include "tmkit/validator.hpp"

using namespace tmkit;

namespace {

// Edits that bypass the constructors, for models the constructors refuse.
void raw_flow(Model& m, const std::string& from, const std::string& to) {
  m.flows.push_back({"flow#" + std::to_string(m.flows.size() + 1), from, to});
}

void raw_event(Model& m, const std::string& id, std::vector<std::string> covers,
               Polarity polarity = Polarity::Present) {
  Event e;
  e.id = id;
  e.covers = std::move(covers);
  e.polarity = polarity;
  m.events.push_back(std::move(e));
  m.reindex();
}

std::multiset<std::string> findings_with(const ValidationReport& r, std::initializer_list<std::string> codes) {
  std::multiset<std::string> out;
  for (const auto& d : r.findings) {
    if (std::find(codes.begin(), codes.end(), d.code) != codes.end()) out.insert(d.code + " " + d.message);
  }
  return out;
}

Model two_machines() {
  return tmtest::parse_or_throw(R"(model "pair" {
  thimac A {
    create c
    release out
    transfer send
  }
  thimac B {
    transfer in
    receive take
    process p
  }
  flow A.c -> A.out
  flow A.out -> A.send
  flow A.send -> B.in
  flow B.in -> B.take
  flow B.take -> B.p
})");
}

long count_code(const ValidationReport& r, const std::string& code) {
  auto codes = r.codes();
  return std::count(codes.begin(), codes.end(), code);
}

}  // namespace

TEST(ValidateStatic, EmptyModelIsClean) {
  auto r = validate_all(new_model("empty"));
  EXPECT_TRUE(r.ok);
  EXPECT_TRUE(r.findings.empty());
}

TEST(ValidateStatic, InternetFixtureIsOk) {
  auto r = validate_all(tmtest::load_fixture("fig05_internet.tm"));
  EXPECT_TRUE(r.ok) << report_json(r);
}

TEST(ValidateStatic, CrossingWithoutReceiveDownstream) {
  Model m = new_model("m");
  add_thimac(m, "A");
  add_thimac(m, "B");
  std::string rel = add_action(m, "A", ActionKind::Release, "r");
  std::string ta = add_action(m, "A", ActionKind::Transfer, "t");
  std::string tb = add_action(m, "B", ActionKind::Transfer, "t");
  std::string pb = add_action(m, "B", ActionKind::Process, "p");
  connect_flow(m, rel, ta);
  connect_flow(m, ta, tb);
  raw_flow(m, tb, pb);
  auto r = validate_static(m);
  EXPECT_FALSE(r.ok);
  EXPECT_TRUE(r.has("XFER_PAIR"));
  EXPECT_TRUE(r.has("FLOW_ADJ"));
}

TEST(ValidateStatic, CrossingWithoutReleaseUpstream) {
  Model m = two_machines();
  m.flows.erase(m.flows.begin() + 1);  // A.out -> A.send
  auto r = validate_static(m);
  EXPECT_TRUE(r.has("XFER_PAIR"));
  EXPECT_TRUE(r.has("DANGLING"));
}

TEST(ValidateStatic, JunctionArity) {
  Model m = tmtest::parse_or_throw(R"(model "j" {
  thimac G {
    process a
    junction or any
    release out
  }
  flow G.a -> G.any
  flow G.any -> G.out
})");
  auto r = validate_static(m);
  EXPECT_EQ(r.codes(), std::vector<std::string>{"JUNCTION_ARITY"});
}

TEST(ValidateStatic, DanglingTransfer) {
  Model m = tmtest::parse_or_throw("model \"d\" { thimac A { transfer t } }");
  auto r = validate_static(m);
  EXPECT_EQ(r.codes(), (std::vector<std::string>{"DANGLING", "DANGLING"}));
}

TEST(ValidateStatic, ContainmentCycle) {
  Model m = new_model("m");
  add_thimac(m, "A");
  add_thimac(m, "B", "A");
  m.thimacs[0].parent = "A.B";
  auto r = validate_static(m);
  EXPECT_TRUE(r.has("CONTAIN_ACYCLIC"));
}

TEST(ValidateStatic, UnusedStorageIsOnlyAWarning) {
  Model m = tmtest::parse_or_throw("model \"s\" { thimac A { storage s } }");
  auto r = validate_static(m);
  EXPECT_TRUE(r.ok);
  ASSERT_EQ(r.findings.size(), 1u);
  EXPECT_EQ(r.findings[0].code, "UNUSED_STORAGE");
  EXPECT_EQ(r.findings[0].severity, Severity::Warning);
}

TEST(ValidateStatic, BadEdgesFromRawEdits) {
  Model m = two_machines();
  raw_flow(m, "A.c", "A.out");                  // duplicate
  raw_flow(m, "A.c", "B.nothing");              // unknown
  m.triggers.push_back({"trigger#1", "A.c", "A.out"});  // parallels a flow
  auto r = validate_static(m);
  EXPECT_EQ(count_code(r, "FLOW_ADJ"), 3);
}

TEST(ValidateStatic, MonotoneUnderAddedEdges) {
  std::mt19937 rng(99);
  for (int i = 0; i < 40; ++i) {
    Model m = tmtest::random_model(rng);
    const auto& nodes = m.nodes_in_order();
    std::uniform_int_distribution<std::size_t> any(0, nodes.size() - 1);
    for (int k = 0; k < 5; ++k) {
      auto before = findings_with(validate_static(m), {"FLOW_ADJ", "CONTAIN_ACYCLIC"});
      std::string from = nodes[any(rng)];
      std::string to = nodes[any(rng)];
      if (k % 2) raw_flow(m, from, to);
      else m.triggers.push_back({"trigger#" + std::to_string(m.triggers.size() + 1), from, to});
      auto after = findings_with(validate_static(m), {"FLOW_ADJ", "CONTAIN_ACYCLIC"});
      EXPECT_TRUE(std::includes(after.begin(), after.end(), before.begin(), before.end()))
          << from << " -> " << to;
    }
  }
}

TEST(ValidateStatic, ReportsAreDeterministic) {
  std::mt19937 rng(5);
  for (int i = 0; i < 20; ++i) {
    Model m = tmtest::random_model(rng);
    raw_flow(m, m.nodes_in_order().back(), m.nodes_in_order().front());
    EXPECT_EQ(report_json(validate_all(m)), report_json(validate_all(m)));
  }
}

TEST(ValidateDynamic, FalseGoldIsOk) {
  auto r = validate_all(tmtest::load_fixture("fig12_false_gold.tm"));
  EXPECT_TRUE(r.ok) << report_json(r);
}

TEST(ValidateDynamic, RoundSquare) {
  auto parsed = parse_file(tmtest::data_dir() + "/round_square.tm");
  ASSERT_TRUE(parsed.ok());
  auto r = validate_all(*parsed.model, &parsed.spans);
  EXPECT_FALSE(r.ok);
  EXPECT_EQ(r.codes(), std::vector<std::string>{"ABSENT_REALIZABLE"});
  ASSERT_TRUE(r.findings[0].span);
}

TEST(ValidateDynamic, RealizabilityRulesAreExclusive) {
  for (auto polarity : {Polarity::Present, Polarity::Absent}) {
    Model m = new_model("m");
    add_thimac(m, "RoundSquare", std::nullopt, false);
    add_thimac(m, "Inner", "RoundSquare");
    raw_event(m, "e", {"RoundSquare.Inner"}, polarity);
    EXPECT_TRUE(validate_dynamic(m).ok) << "realizable child";
    raw_event(m, "f", {"RoundSquare"}, polarity);
    auto r = validate_dynamic(m);
    bool absent = r.has("ABSENT_REALIZABLE");
    bool present = r.has("PRESENT_REALIZABLE");
    EXPECT_NE(absent, present);
    EXPECT_EQ(absent, polarity == Polarity::Absent);
  }
}

TEST(ValidateDynamic, ChronologyCycle) {
  Model m = tmtest::parse_or_throw(R"(model "c" {
  thimac A {
    create c
    process p
  }
  flow A.c -> A.p
  event e1 covers { A.c }
  event e2 covers { A.p }
})");
  EXPECT_TRUE(validate_dynamic(m).ok);
  declare_chronology(m, "e2", "e1", ChronoKind::Precede);
  auto r = validate_dynamic(m);
  EXPECT_TRUE(r.has("CHRONO_ACYCLIC"));
  EXPECT_TRUE(r.has("CHRONO_UNWITNESSED"));
}

TEST(ValidateDynamic, RepeatMustPointBack) {
  Model m = tmtest::parse_or_throw(R"(model "r" {
  thimac A {
    create c
    process p
  }
  flow A.c -> A.p
  event e1 covers { A.c }
  event e2 covers { A.p }
  chronology {
    repeat e2 -> e1
    repeat e2 -> e2
  }
})");
  EXPECT_TRUE(validate_dynamic(m).ok) << report_json(validate_dynamic(m));
  declare_chronology(m, "e1", "e2", ChronoKind::Repeat);
  EXPECT_TRUE(validate_dynamic(m).has("REPEAT_TARGET"));
}

TEST(ValidateDynamic, CoverRules) {
  Model m = new_model("m");
  add_thimac(m, "Left");
  add_thimac(m, "Right");
  raw_event(m, "siblings", {"Left", "Right"});
  raw_event(m, "empty", {});
  raw_event(m, "ghost", {"Nowhere"});
  raw_event(m, "twice", {"Left", "Left"});
  auto r = validate_dynamic(m);
  EXPECT_EQ(count_code(r, "EVENT_COVER"), 3) << report_json(r);
  EXPECT_TRUE(r.has("EVENT_KNOWN"));
}

TEST(ValidateDynamic, UnknownEventReferences) {
  Model m = new_model("m");
  add_thimac(m, "A");
  raw_event(m, "e", {"A"});
  m.chronology.push_back({"e", "nope", ChronoKind::Precede});
  m.focus.push_back({"f", {"missing"}});
  auto r = validate_dynamic(m);
  EXPECT_EQ(count_code(r, "EVENT_KNOWN"), 2);
}

TEST(ValidateDynamic, UncoveredActionWarning) {
  Model m = tmtest::parse_or_throw(R"(model "u" {
  thimac A {
    create c
    process p
  }
  flow A.c -> A.p
  event e covers { A.c }
})");
  auto r = validate_all(m);
  EXPECT_TRUE(r.ok);
  ASSERT_EQ(r.codes(), std::vector<std::string>{"UNCOVERED_ACTION"});
}

TEST(ValidateDynamic, GeneratedModelsValidate) {
  std::mt19937 rng(1234);
  for (int i = 0; i < 200; ++i) {
    Model m = tmtest::random_model(rng);
    auto r = validate_all(m);
    ASSERT_TRUE(r.ok) << report_json(r);
  }
}

TEST(ValidationReport, Json) {
  Model m = tmtest::parse_or_throw("model \"s\" { thimac A { storage s } }");
  EXPECT_EQ(report_json(validate_all(m)),
            "{\n  \"ok\": true,\n  \"findings\": [\n    {\n      \"severity\": \"warning\",\n"
            "      \"code\": \"UNUSED_STORAGE\",\n      \"message\": \"storage A.s is never read or written\"\n"
            "    }\n  ]\n}\n");
}
