#include <doctest.h>

#include <cmath>

#include "pitcheval/error.hpp"
#include "pitcheval/meta.hpp"
#include "pitcheval/rng.hpp"
#include "pitcheval/valuation.hpp"

using namespace pitcheval;

namespace {

BaseOutState state(int outs, bool first = false, bool second = false, bool third = false) {
  return BaseOutState{outs, {first, second, third}};
}

InningEvent transition(BaseOutState before, std::optional<BaseOutState> after,
                       EventCode code, int runs) {
  InningEvent ev;
  ev.before = before;
  ev.after = after;
  ev.outcome = code;
  ev.runs_scored = runs;
  return ev;
}

HalfInning inning_of(std::vector<InningEvent> events, const std::string& game = "g") {
  HalfInning inning;
  inning.game_id = game;
  inning.season = 2024;
  inning.events = std::move(events);
  return inning;
}

}  // namespace

TEST_CASE("delta_re spec examples") {
  RunExpectancyTable table;
  table.value[state(0).index()] = 0.44;
  table.value[state(1).index()] = 0.25;

  // before == after, no runs.
  CHECK(delta_re(state(0), state(0), 0, table) == doctest::Approx(0.0));
  // Strikeout from (0, empty) to (1, empty): 0.25 - 0.44 = -0.19.
  CHECK(delta_re(state(0), state(1), 0, table) == doctest::Approx(-0.19).epsilon(1e-12));
  // Solo home run, state unchanged: +1 with the runs term, 0 without.
  CHECK(delta_re(state(0), state(0), 1, table, true) == doctest::Approx(1.0));
  CHECK(delta_re(state(0), state(0), 1, table, false) == doctest::Approx(0.0));
  // Inning-ending event uses RE_after = 0.
  CHECK(delta_re(state(1), std::nullopt, 0, table) == doctest::Approx(-0.25));
}

TEST_CASE("build_re_table: events contribute runs to end of inning") {
  // Bases-empty 0-out single, then 3 outs, 0 runs: (0, empty) contributes 0.
  std::vector<HalfInning> innings;
  innings.push_back(inning_of({
      transition(state(0), state(0, true), EventCode::Single, 0),
      transition(state(0, true), state(1, true), EventCode::FieldOut, 0),
      transition(state(1, true), state(2, true), EventCode::FieldOut, 0),
      transition(state(2, true), std::nullopt, EventCode::FieldOut, 0),
  }));
  const RunExpectancyTable table = build_re_table(innings);
  CHECK(table.value[state(0).index()] == doctest::Approx(0.0));
  CHECK(table.sample_n[state(0).index()] == 1);
  CHECK(table.sample_n[state(1, true).index()] == 1);
  // Unobserved states carry value 0, n 0, and a warning.
  CHECK(table.sample_n[state(0, true, true, true).index()] == 0);
  CHECK(!table.warnings.empty());
}

TEST_CASE("build_re_table: constant outcome gives value 1") {
  // Every (0, empty) occurrence is followed by exactly one run to the end
  // of its half-inning.
  std::vector<HalfInning> innings;
  for (int i = 0; i < 5; ++i) {
    innings.push_back(inning_of({
        transition(state(0), state(0, false, false, true), EventCode::Triple, 0),
        transition(state(0, false, false, true), state(1), EventCode::SacrificeFly, 1),
        transition(state(1), state(2), EventCode::FieldOut, 0),
        transition(state(2), std::nullopt, EventCode::FieldOut, 0),
    }, "g" + std::to_string(i)));
  }
  const RunExpectancyTable table = build_re_table(innings);
  CHECK(table.value[state(0).index()] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("build_re_table rejects incomplete innings") {
  std::vector<HalfInning> innings;
  innings.push_back(inning_of({
      transition(state(0), state(1), EventCode::FieldOut, 0),
  }));
  CHECK_THROWS_AS(build_re_table(innings), Error);
  try {
    build_re_table(innings);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IncompleteInning);
  }
}

TEST_CASE("event value table: means, counts and permutation invariance") {
  // Two-point mean from the spec.
  std::vector<std::pair<EventCode, double>> occurrences = {
      {EventCode::Strike, -0.04}, {EventCode::Strike, -0.036}};
  EventValueTable table = build_event_value_table(occurrences);
  CHECK(table.value.at(EventCode::Strike) == doctest::Approx(-0.038).epsilon(1e-12));
  CHECK(table.sample_n.at(EventCode::Strike) == 2);

  // Single occurrence.
  EventValueTable single = build_event_value_table({{EventCode::Walk, 0.292}});
  CHECK(single.value.at(EventCode::Walk) == doctest::Approx(0.292));
  CHECK(single.sample_n.at(EventCode::Walk) == 1);

  // Permutation invariance on a random occurrence list.
  Rng rng(99);
  std::vector<std::pair<EventCode, double>> sample;
  for (int i = 0; i < 500; ++i) {
    sample.emplace_back(static_cast<EventCode>(rng.below(kEventCodeCount)),
                        rng.normal() * 0.3);
  }
  auto shuffled = sample;
  rng.shuffle(shuffled);
  const EventValueTable a = build_event_value_table(sample);
  const EventValueTable b = build_event_value_table(shuffled);
  REQUIRE(a.value.size() == b.value.size());
  for (const auto& [code, value] : a.value) {
    CHECK(b.value.at(code) == doctest::Approx(value).epsilon(1e-12));
    CHECK(b.sample_n.at(code) == a.sample_n.at(code));
  }
}

TEST_CASE("telescoping identity over complete half-innings") {
  // Sum of per-event delta RE (runs term on) equals runs scored minus the
  // first state's run expectancy.
  std::vector<HalfInning> innings;
  innings.push_back(inning_of({
      transition(state(0), state(0, true), EventCode::Single, 0),
      transition(state(0, true), state(0), EventCode::HomeRun, 2),
      transition(state(0), state(1), EventCode::FieldOut, 0),
      transition(state(1), state(2), EventCode::FieldOut, 0),
      transition(state(2), std::nullopt, EventCode::FieldOut, 0),
  }));
  const RunExpectancyTable table = build_re_table(innings);
  double total = 0.0;
  int runs = 0;
  for (const auto& ev : innings[0].events) {
    total += delta_re(ev.before, ev.after, ev.runs_scored, table, true);
    runs += ev.runs_scored;
  }
  CHECK(total == doctest::Approx(runs - table.at(innings[0].events[0].before)).epsilon(1e-12));
}

TEST_CASE("delta_re is linear in the table values") {
  RunExpectancyTable t1;
  RunExpectancyTable t2;
  for (int i = 0; i < kBaseOutStateCount; ++i) {
    t1.value[i] = 0.1 * i;
    t2.value[i] = 0.1 * i * 3.0;
  }
  const double d1 = delta_re(state(0), state(1, true), 0, t1, false);
  const double d2 = delta_re(state(0), state(1, true), 0, t2, false);
  CHECK(d2 == doctest::Approx(3.0 * d1).epsilon(1e-12));
}

TEST_CASE("innings_from_pitch_events chains terminal events") {
  std::vector<PitchEvent> events;
  auto pitch = [](int outs, bool first, EventCode code, int runs, int inning) {
    PitchEvent ev;
    ev.game_id = "g";
    ev.date = *Date::parse("2024-07-02");
    ev.inning = inning;
    ev.outs = outs;
    ev.bases.first = first;
    ev.outcome = code;
    ev.runs_scored_on_play = runs;
    return ev;
  };
  events.push_back(pitch(0, false, EventCode::Ball, 0, 1));    // mid-PA, skipped
  events.push_back(pitch(0, false, EventCode::Single, 0, 1));
  events.push_back(pitch(0, true, EventCode::DoublePlay, 0, 1));
  events.push_back(pitch(2, false, EventCode::FieldOut, 0, 1));
  events.push_back(pitch(0, false, EventCode::FieldOut, 0, 2));  // next inning

  const auto innings = innings_from_pitch_events(events);
  REQUIRE(innings.size() == 2);
  REQUIRE(innings[0].events.size() == 3);
  CHECK(innings[0].events[0].after.has_value());
  CHECK(innings[0].events[0].after->bases.first);
  CHECK(!innings[0].events[2].after.has_value());  // inning assumed complete
  CHECK(innings[1].events.size() == 1);
}

TEST_CASE("re table and event values round-trip through csv") {
  std::vector<HalfInning> innings;
  innings.push_back(inning_of({
      transition(state(0), state(1), EventCode::FieldOut, 0),
      transition(state(1), state(2), EventCode::FieldOut, 0),
      transition(state(2), std::nullopt, EventCode::FieldOut, 0),
  }));
  const RunExpectancyTable table = build_re_table(innings);
  const std::string path = "/tmp/pitcheval_test_re.csv";
  write_re_table_csv(path, table, MetaBlock{});
  const RunExpectancyTable back = read_re_table_csv(path);
  for (int i = 0; i < kBaseOutStateCount; ++i) {
    CHECK(back.value[i] == table.value[i]);
    CHECK(back.sample_n[i] == table.sample_n[i]);
  }

  const EventValueTable events_table =
      build_event_value_table(delta_re_occurrences(innings, table));
  const std::string events_path = "/tmp/pitcheval_test_ev.csv";
  write_event_values_csv(events_path, events_table, MetaBlock{});
  const EventValueTable events_back = read_event_values_csv(events_path);
  CHECK(events_back.value.at(EventCode::FieldOut) ==
        doctest::Approx(events_table.value.at(EventCode::FieldOut)));

  // Innings round-trip, including the terminal marker.
  const std::string innings_path = "/tmp/pitcheval_test_innings.csv";
  write_innings_csv(innings_path, innings, MetaBlock{});
  const auto innings_back = read_innings_csv(innings_path);
  REQUIRE(innings_back.size() == 1);
  REQUIRE(innings_back[0].events.size() == 3);
  CHECK(!innings_back[0].events[2].after.has_value());
  CHECK(innings_back[0].events[1].after->outs == 2);
}
