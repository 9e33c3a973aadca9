#include <doctest.h>

#include "pitcheval/error.hpp"
#include "pitcheval/ingest.hpp"
#include "pitcheval/meta.hpp"

using namespace pitcheval;

namespace {

// Straight restatement of the published threshold rules, kept independent
// of the implementation it checks.
DemandZone brute_force_zone(double x, double y, Hand hand) {
  if (y > 80.0) return DemandZone::Excluded;
  if (hand == Hand::Right) {
    if (x >= 96.0) return DemandZone::Inside;
    if (x <= 64.0) return DemandZone::Outside;
    return DemandZone::Excluded;
  }
  if (x <= 64.0) return DemandZone::Inside;
  if (x >= 96.0) return DemandZone::Outside;
  return DemandZone::Excluded;
}

const char* kHeader =
    "game_id,date,inning,half,pitcher_id,batter_id,catcher_id,balls,strikes,outs,"
    "base_first,base_second,base_third,run_diff,pitch_seq_no,pitcher_total_pitches,"
    "pitch_type,pitch_speed,demand_x,demand_y,actual_x,actual_y,pitcher_hand,"
    "batter_hand,outcome,runs_scored_on_play";

std::string sample_row(const std::string& date, int seq, const std::string& outcome,
                       const std::string& pitch_type = "four-seam",
                       const std::string& batter = "b1",
                       const std::string& pitcher = "p1") {
  return "g1," + date + ",1,top," + pitcher + "," + batter + ",c1,0,0,0,0,0,0,0," +
         std::to_string(seq) + ",10," + pitch_type + ",144.5,100,70,,,R,R," + outcome +
         ",0";
}

}  // namespace

TEST_CASE("zone classification matches the spec examples") {
  CHECK(classify_demand_zone(100, 70, Hand::Right) == DemandZone::Inside);
  CHECK(classify_demand_zone(60, 70, Hand::Right) == DemandZone::Outside);
  CHECK(classify_demand_zone(80, 70, Hand::Right) == DemandZone::Excluded);
  CHECK(classify_demand_zone(100, 90, Hand::Right) == DemandZone::Excluded);
  CHECK(classify_demand_zone(60, 70, Hand::Left) == DemandZone::Inside);
  // Boundary inclusions.
  CHECK(classify_demand_zone(96, 80, Hand::Right) == DemandZone::Inside);
  CHECK(classify_demand_zone(64, 80, Hand::Right) == DemandZone::Outside);
  CHECK_THROWS_AS(classify_demand_zone(-1, 50, Hand::Right), Error);
  CHECK_THROWS_AS(classify_demand_zone(50, 201, Hand::Right), Error);
}

TEST_CASE("zone classification: exhaustive grid against brute force with mirror") {
  for (int x = 0; x <= 160; ++x) {
    for (int y = 0; y <= 200; ++y) {
      const auto right = classify_demand_zone(x, y, Hand::Right);
      const auto left = classify_demand_zone(x, y, Hand::Left);
      REQUIRE(right == brute_force_zone(x, y, Hand::Right));
      REQUIRE(left == brute_force_zone(x, y, Hand::Left));
      // Mirror symmetry about the canvas midline.
      REQUIRE(left == classify_demand_zone(160 - x, y, Hand::Right));
    }
  }
}

TEST_CASE("parse_pitch_csv: well-formed rows parse in order") {
  const std::string path = "/tmp/pitcheval_test_parse.csv";
  write_text_file(path, std::string(kHeader) + "\n" + sample_row("2024-07-02", 1, "strike") +
                            "\n" + sample_row("2024-07-02", 2, "ball") + "\n" +
                            sample_row("2024-07-02", 3, "single") + "\n");
  const ParseResult result = parse_pitch_csv(path);
  REQUIRE(result.events.size() == 3);
  CHECK(result.rejected.empty());
  CHECK(result.events[0].outcome == EventCode::Strike);
  CHECK(result.events[1].outcome == EventCode::Ball);
  CHECK(result.events[2].outcome == EventCode::Single);
  CHECK(result.events[0].date.to_string() == "2024-07-02");
  CHECK(result.events[0].pitch_speed == doctest::Approx(144.5));
}

TEST_CASE("parse_pitch_csv: bad rows are rejected with row numbers") {
  const std::string path = "/tmp/pitcheval_test_badrow.csv";
  std::string bad = sample_row("2024-07-02", 2, "strike");
  // balls=5 violates the count invariant.
  bad.replace(bad.find(",0,0,0,0,0,0,0,"), 15, ",5,0,0,0,0,0,0,");
  write_text_file(path, std::string(kHeader) + "\n" + sample_row("2024-07-02", 1, "strike") +
                            "\n" + bad + "\n" + sample_row("2024-07-02", 3, "ball") + "\n");
  const ParseResult result = parse_pitch_csv(path);
  CHECK(result.events.size() == 2);
  REQUIRE(result.rejected.size() == 1);
  CHECK(result.rejected[0].row_number == 2);
  CHECK(result.rejected[0].column == "balls");
}

TEST_CASE("parse_pitch_csv: missing demand column is a schema violation") {
  const std::string path = "/tmp/pitcheval_test_nocol.csv";
  std::string header(kHeader);
  const auto pos = header.find("demand_x");
  header.replace(pos, 8, "demand_q");
  write_text_file(path, header + "\n");
  CHECK_THROWS_AS(parse_pitch_csv(path), Error);
  try {
    parse_pitch_csv(path);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingColumn);
  }
}

TEST_CASE("parse_pitch_csv: column map renames sources") {
  const std::string path = "/tmp/pitcheval_test_map.csv";
  std::string header(kHeader);
  header.replace(header.find("demand_x"), 8, "mitt_x");
  write_text_file(path, header + "\n" + sample_row("2024-07-02", 1, "strike") + "\n");
  ColumnMap map;
  map.columns["demand_x"] = "mitt_x";
  const ParseResult result = parse_pitch_csv(path, map);
  CHECK(result.events.size() == 1);
}

TEST_CASE("parse_pitch_csv: missing demand location rejects the row") {
  const std::string path = "/tmp/pitcheval_test_nodemand.csv";
  std::string row = sample_row("2024-07-02", 1, "strike");
  row.replace(row.find(",100,70,"), 8, ",,70,");
  write_text_file(path, std::string(kHeader) + "\n" + row + "\n");
  const ParseResult result = parse_pitch_csv(path);
  CHECK(result.events.empty());
  REQUIRE(result.rejected.size() == 1);
  CHECK(result.rejected[0].column == "demand_x");
}

TEST_CASE("filter_analysis_set applies the published rules") {
  std::vector<PitchEvent> events;
  auto make = [](const std::string& date, PitchType type, const std::string& batter,
                 const std::string& pitcher, double dx) {
    PitchEvent ev;
    ev.game_id = "g";
    ev.date = *Date::parse(date);
    ev.pitch_type = type;
    ev.batter_id = batter;
    ev.pitcher_id = pitcher;
    ev.demand_x = dx;
    ev.demand_y = 70;
    ev.outcome = EventCode::FieldOut;
    return ev;
  };
  // Volume so b1/p1 clear the 100 threshold and b2/p2 do not.
  for (int i = 0; i < 120; ++i) events.push_back(make("2024-04-10", PitchType::FourSeam, "b1", "p1", 80));
  for (int i = 0; i < 99; ++i) events.push_back(make("2024-04-11", PitchType::FourSeam, "b2", "p2", 80));

  events.push_back(make("2024-07-05", PitchType::Other, "b1", "p1", 100));     // slider in July
  events.push_back(make("2024-07-06", PitchType::FourSeam, "b1", "p1", 100));  // retained
  PitchEvent low_volume = make("2024-07-07", PitchType::FourSeam, "b1", "p2", 100);
  low_volume.outcome = EventCode::Ball;  // keeps p2's season TBF at 99
  events.push_back(low_volume);
  events.push_back(make("2024-07-08", PitchType::FourSeam, "b1", "p1", 80));   // zone excluded
  events.push_back(make("2024-05-08", PitchType::FourSeam, "b1", "p1", 100));  // feature window

  const PlayerCounts counts = compute_player_counts(events);
  CHECK(counts.batter_pa.at("b1") >= 100);
  CHECK(counts.pitcher_tbf.at("p2") == 99);

  FilterConfig cfg;
  FilterReport report;
  const auto kept = filter_analysis_set(events, cfg, counts, &report);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].date.to_string() == "2024-07-06");
  CHECK(report.wrong_pitch_type == 1);
  CHECK(report.pitcher_below_min_tbf == 1);
  CHECK(report.zone_excluded == 1);
  CHECK(report.retained == 1);

  // Idempotence: filtering the filtered set changes nothing.
  const auto twice = filter_analysis_set(kept, cfg, counts, nullptr);
  CHECK(twice.size() == kept.size());
}

TEST_CASE("events csv round-trips through the canonical schema") {
  const std::string path = "/tmp/pitcheval_test_events_rt.csv";
  std::vector<PitchEvent> events;
  PitchEvent ev;
  ev.game_id = "g1";
  ev.date = *Date::parse("2024-07-02");
  ev.pitcher_id = "p1";
  ev.batter_id = "b1";
  ev.catcher_id = "c1";
  ev.balls = 2;
  ev.strikes = 1;
  ev.outs = 2;
  ev.bases = {true, false, true};
  ev.run_diff = -3;
  ev.pitch_seq_no = 4;
  ev.pitcher_total_pitches = 55;
  ev.pitch_speed.reset();  // missing speed survives the round trip
  ev.demand_x = 100.5;
  ev.demand_y = 64.25;
  ev.batter_hand = Hand::Left;
  ev.outcome = EventCode::UncaughtThirdStrike;
  ev.runs_scored_on_play = 1;
  events.push_back(ev);

  write_events_csv(path, events, MetaBlock{});
  const auto back = read_events_csv(path);
  REQUIRE(back.size() == 1);
  CHECK(back[0].game_id == "g1");
  CHECK(back[0].bases.code() == 5);
  CHECK(!back[0].pitch_speed.has_value());
  CHECK(back[0].demand_x == 100.5);
  CHECK(back[0].batter_hand == Hand::Left);
  CHECK(back[0].outcome == EventCode::UncaughtThirdStrike);
}

TEST_CASE("filter config validation") {
  FilterConfig bad;
  bad.feature_window = {3, 1, 8, 30};  // overlaps the estimation window
  CHECK_THROWS_AS(bad.validate(), Error);
}
