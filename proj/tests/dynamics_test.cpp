#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"
#include "generator.hpp"
#include "oracles.hpp"
#include "tmkit/dynamics.hpp"
#include "tmkit/validator.hpp"

using namespace tmkit;

namespace {

EventSpec spec(std::string id, std::vector<std::string> covers, std::string label = "") {
  EventSpec out;
  out.id = std::move(id);
  out.label = std::move(label);
  out.covers = std::move(covers);
  return out;
}

Model chain3() {
  return tmtest::parse_or_throw(R"(model "chain" {
  thimac A {
    create c
    process p
    release r
  }
  flow A.c -> A.p
  flow A.p -> A.r
  event e1 covers { A.c }
  event e2 covers { A.p }
  event e3 covers { A.r }
})");
}

}  // namespace

TEST(DefineEvent, ComputerMessageChain) {
  Model m = tmtest::load_fixture("fig05_internet.tm");
  Model fresh = m;
  fresh.events.clear();
  fresh.chronology.clear();
  fresh.focus.clear();
  fresh.reindex();
  const Event& e = define_event(fresh, spec("e1", {"Computer.msg", "Computer.out", "Computer.send"},
                                             "the computer generates a message"));
  EXPECT_EQ(e.polarity, Polarity::Present);
  EXPECT_EQ(covered_nodes(fresh, e).size(), 3u);
}

TEST(DefineEvent, AbsentInsidePresent) {
  Model m = tmtest::load_fixture("fig15_room.tm");
  EXPECT_EQ(m.find_event("john")->polarity, Polarity::Absent);
  EXPECT_EQ(covered_thimacs(m, *m.find_event("john")), std::set<std::string>{"Room.John"});
  EXPECT_TRUE(covered_thimacs(m, *m.find_event("room")).contains("Room"));
}

TEST(DefineEvent, Errors) {
  Model m = chain3();
  auto code_of = [&](EventSpec spec) {
    try {
      define_event(m, std::move(spec));
    } catch (const ModelError& e) {
      return e.code();
    }
    return ErrorCode::InvalidConfig;  // no error: never expected below
  };
  EXPECT_EQ(code_of(spec("x", {})), ErrorCode::DisconnectedCover);
  EXPECT_EQ(code_of(spec("x", {"A.nope"})), ErrorCode::UnknownId);
  EXPECT_EQ(code_of(spec("e1", {"A.c"})), ErrorCode::DuplicateId);
  EXPECT_EQ(code_of(spec("x", {"A.c", "A.c"})), ErrorCode::DuplicateId);
  EventSpec negative = spec("x", {"A.c"});
  negative.duration = Duration{-1, "hour"};
  EXPECT_EQ(code_of(negative), ErrorCode::InvalidDuration);

  add_thimac(m, "B");
  EXPECT_EQ(code_of(spec("x", {"A", "B"})), ErrorCode::DisconnectedCover);
}

TEST(DefineEvent, ContainmentCountsForConnectivity) {
  Model m = tmtest::load_fixture("fig18_run_mile.tm");
  EXPECT_TRUE(cover_is_connected(m, {"Thing.exists", "Thing.Distance"}));
  EXPECT_FALSE(cover_is_connected(m, {}));
}

TEST(Chronology, InternetDependencies) {
  Model m = tmtest::load_fixture("fig05_internet.tm");
  ChronologyGraph g = derive_chronology(m);
  for (auto [from, to] : std::vector<std::pair<const char*, const char*>>{
           {"e1", "e2"}, {"e2", "a1"}, {"e2", "not_a1"}, {"not_a1", "b1"}, {"a1", "d1"}, {"c1", "d1"}}) {
    EXPECT_TRUE(g.has_edge(from, to, ChronoKind::Precede)) << from << " -> " << to;
  }
  // b reaches d through the conjunction event.
  EXPECT_TRUE(precede_reaches(g, "b1", "d1"));
  EXPECT_TRUE(precede_reaches(g, "b2", "d2"));
  EXPECT_FALSE(precede_reaches(g, "d1", "e1"));
  EXPECT_TRUE(precede_cycle(g).empty());
}

TEST(Chronology, DrivingRepeatsItself) {
  ChronologyGraph g = derive_chronology(tmtest::load_fixture("fig21_driving.tm"));
  EXPECT_TRUE(g.has_edge("E2", "E2", ChronoKind::Repeat));
  EXPECT_TRUE(g.has_edge("E1", "E2", ChronoKind::Precede));
}

TEST(Chronology, InternalCycleGivesRepeatWithoutDeclaration) {
  Model m = tmtest::parse_or_throw(R"(model "loop" {
  thimac A {
    create c
    process p
  }
  flow A.c -> A.p
  trigger A.p => A.p
  event e covers { A }
})");
  ChronologyGraph g = derive_chronology(m);
  ASSERT_EQ(g.edges.size(), 1u);
  EXPECT_EQ(g.edges[0], (ChronoEdge{"e", "e", ChronoKind::Repeat}));
}

TEST(Chronology, IndependentEventsHaveNoEdge) {
  Model m = tmtest::parse_or_throw(
      "model \"i\" { thimac A { create c } thimac B { create c } event x covers { A } event y covers { B } }");
  EXPECT_TRUE(derive_chronology(m).edges.empty());
  EXPECT_FALSE(find_witness(m, "x", "y"));
}

TEST(Chronology, WitnessNamesTheEdge) {
  Model m = chain3();
  auto w = find_witness(m, "e1", "e2");
  ASSERT_TRUE(w);
  EXPECT_EQ(w->edge_id, "flow#1");
  EXPECT_EQ(w->from_node, "A.c");
  EXPECT_EQ(w->to_node, "A.p");
}

TEST(Chronology, CycleIsReportedNotBroken) {
  Model m = tmtest::parse_or_throw(R"(model "cyc" {
  thimac A {
    create c
    process p
    release r
  }
  flow A.c -> A.p
  flow A.p -> A.r
  trigger A.r => A.c
  event x covers { A.c, A.r }
  event y covers { A.p }
})");
  try {
    derive_chronology(m);
    FAIL();
  } catch (const ModelError& e) {
    EXPECT_EQ(e.code(), ErrorCode::ChronoCycle);
  }
  auto g = derive_chronology_unchecked(m);
  EXPECT_EQ(precede_cycle(g), (std::vector<std::string>{"x", "y"}));
  EXPECT_THROW(topological_order(g), ModelError);
}

TEST(Chronology, MatchesBruteForceOnCorpus) {
  for (const auto& path : tmtest::fixture_files()) {
    Model m = *parse_file(path).model;
    if (m.events.empty()) continue;
    ChronologyGraph g = derive_chronology(m);
    EXPECT_EQ(tmtest::as_triples(g), tmtest::chronology_oracle(m)) << path;
    EXPECT_TRUE(tmtest::witness_violations(m, g).empty()) << path;
  }
}

TEST(Chronology, MatchesBruteForceOnRandomModels) {
  std::mt19937 rng(42);
  for (int i = 0; i < 150; ++i) {
    Model m = tmtest::random_model(rng);
    ChronologyGraph g = derive_chronology(m);
    ASSERT_EQ(tmtest::as_triples(g), tmtest::chronology_oracle(m)) << render_model(m);
    auto v = tmtest::witness_violations(m, g);
    ASSERT_TRUE(v.empty()) << v.front();
    EXPECT_EQ(g, derive_chronology(m));
  }
}

TEST(Chronology, EdgesAreSortedByDeclaration) {
  ChronologyGraph g = derive_chronology(tmtest::load_fixture("fig05_internet.tm"));
  Model m = tmtest::load_fixture("fig05_internet.tm");
  for (std::size_t i = 1; i < g.edges.size(); ++i) {
    auto key = [&](const ChronoEdge& e) {
      return std::make_tuple(*m.event_index(e.from), *m.event_index(e.to), e.kind);
    };
    EXPECT_LT(key(g.edges[i - 1]), key(g.edges[i]));
  }
}

TEST(Chronology, AbsentEventsRelayNothing) {
  std::mt19937 rng(77);
  for (int i = 0; i < 60; ++i) {
    Model m = tmtest::random_model(rng);
    ChronologyGraph full = derive_chronology(m);
    Model present = m;
    std::erase_if(present.events, [](const Event& e) { return e.polarity == Polarity::Absent; });
    present.reindex();
    std::erase_if(present.chronology, [&](const ChronoEdge& c) {
      return !present.find_event(c.from) || !present.find_event(c.to);
    });
    ChronologyGraph reduced = derive_chronology(present);
    for (const auto& e : full.edges) {
      if (e.kind != ChronoKind::Precede || !present.find_event(e.from) || !present.find_event(e.to)) continue;
      EXPECT_TRUE(reduced.has_edge(e.from, e.to, ChronoKind::Precede));
    }
    for (const auto& e : reduced.edges) {
      if (e.kind == ChronoKind::Precede) { EXPECT_TRUE(full.has_edge(e.from, e.to, ChronoKind::Precede)); }
    }
  }
}

TEST(Timing, SingleEvent) {
  Model m = tmtest::parse_or_throw("model \"s\" { thimac A { create c } event e covers { A } }");
  auto t = build_timing(m, derive_chronology(m));
  EXPECT_EQ(t.at("e"), (Interval{0, 1}));
}

TEST(Timing, ChainOfUnitEvents) {
  Model m = chain3();
  auto t = build_timing(m, derive_chronology(m));
  EXPECT_EQ(t.at("e1"), (Interval{0, 1}));
  EXPECT_EQ(t.at("e2"), (Interval{1, 2}));
  EXPECT_EQ(t.at("e3"), (Interval{2, 3}));
  EXPECT_EQ(timing_csv(t), "event_id,start,end,duration\ne1,0,1,1\ne2,1,2,1\ne3,2,3,1\n");
}

TEST(Timing, DurationsAndOverrides) {
  Model m = chain3();
  auto g = derive_chronology(m);
  auto t = build_timing(m, g, {{"e2", 2.5}});
  EXPECT_EQ(t.at("e3"), (Interval{3.5, 4.5}));
  try {
    build_timing(m, g, {{"e1", -1}});
    FAIL();
  } catch (const ModelError& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidDuration);
  }
}

TEST(Timing, ManOutlastsWalking) {
  Model m = tmtest::load_fixture("fig08_man_walks.tm");
  auto g = derive_chronology(m);
  auto t = build_timing(m, g);
  EXPECT_EQ(t.at("walking"), (Interval{1, 2}));
  EXPECT_EQ(t.at("man"), (Interval{0, 3}));
  EXPECT_LT(t.at("man").start, t.at("walking").start);
  EXPECT_GT(t.at("man").end, t.at("walking").end);
  auto oracle = tmtest::timing_oracle(m, g);
  for (const auto& [id, row] : t.rows) EXPECT_EQ(row, oracle.at(id)) << id;
  EXPECT_EQ(contained_events(m, "man"), (std::vector<std::string>{"born", "walking", "stopped"}));
}

TEST(Timing, MatchesOracleAndLawsOnRandomModels) {
  std::mt19937 rng(8);
  for (int i = 0; i < 150; ++i) {
    Model m = tmtest::random_model(rng);
    auto g = derive_chronology(m);
    auto t = build_timing(m, g);
    auto oracle = tmtest::timing_oracle(m, g);
    for (const auto& e : m.events) {
      ASSERT_EQ(t.at(e.id), oracle.at(e.id)) << e.id << "\n" << render_model(m);
      for (const auto& b : contained_events(m, e.id)) {
        EXPECT_LE(t.at(e.id).start, t.at(b).start);
        EXPECT_GE(t.at(e.id).end, t.at(b).end);
      }
    }
    for (const auto& c : g.edges) {
      if (c.kind == ChronoKind::Precede && contained_events(m, c.to).empty()) {
        EXPECT_LE(t.at(c.from).end, t.at(c.to).start);
      }
    }
  }
}

TEST(Timing, NumberFormat) {
  EXPECT_EQ(format_number(1), "1");
  EXPECT_EQ(format_number(0.5), "0.5");
  EXPECT_EQ(format_number(2.25), "2.25");
  EXPECT_EQ(format_number(-0.0), "0");
}

TEST(Order, TopologicalTiesFollowDeclaration) {
  Model m = tmtest::parse_or_throw(
      "model \"t\" { thimac A { create c } thimac B { create c } event y covers { B } event x covers { A } }");
  EXPECT_EQ(topological_order(derive_chronology(m)), (std::vector<std::string>{"y", "x"}));
}
