#include <doctest.h>

#include <cmath>

#include "pitcheval/error.hpp"
#include "pitcheval/features.hpp"
#include "pitcheval/rng.hpp"

using namespace pitcheval;

TEST_CASE("confidence recursion: spec examples") {
  // alpha=0.6, fresh state, previous pitch inside with dRE=-0.038.
  ConfidenceState s = make_confidence_state(0.6);
  s = update_confidence(s, DemandZone::Inside, -0.038);
  CHECK(s.c_in() == doctest::Approx(0.6 * -0.038).epsilon(1e-15));
  CHECK(s.c_out() == 0.0);
  CHECK(confidence_signal(s) == doctest::Approx(-0.0228).epsilon(1e-12));

  // Previous pitch outside leaves c_in unchanged.
  const double before = s.c_in();
  s = update_confidence(s, DemandZone::Outside, 0.5);
  CHECK(s.c_in() == before);
  CHECK(s.c_out() == doctest::Approx(0.6 * 0.5));

  // Fresh state has zero signal.
  CHECK(confidence_signal(make_confidence_state(0.6)) == 0.0);
}

TEST_CASE("confidence recursion: literal n-2 indexing, hand evaluation") {
  // Five pitches: zones and run values applied one step at a time; the
  // expected values replay the published recurrence by hand, with the
  // same-zone branch recursing two indices back.
  ConfidenceState s = make_confidence_state(0.6, ConfidenceIndexMode::Literal);

  s = update_confidence(s, DemandZone::Inside, -0.038);  // C_in(2)
  CHECK(s.c_in() == doctest::Approx(0.6 * -0.038 + 0.4 * 0.0).epsilon(1e-15));

  s = update_confidence(s, DemandZone::Inside, 0.032);  // C_in(3) uses C_in(1)=0
  CHECK(s.c_in() == doctest::Approx(0.6 * 0.032 + 0.4 * 0.0).epsilon(1e-15));
  CHECK(s.c_in() == doctest::Approx(0.0192).epsilon(1e-12));

  s = update_confidence(s, DemandZone::Outside, -0.235);  // C_out(4) uses C_out(2)=0
  CHECK(s.c_in() == doctest::Approx(0.0192).epsilon(1e-12));
  CHECK(s.c_out() == doctest::Approx(-0.141).epsilon(1e-12));

  s = update_confidence(s, DemandZone::Inside, 0.437);  // C_in(5) uses C_in(3)
  CHECK(s.c_in() == doctest::Approx(0.6 * 0.437 + 0.4 * 0.0192).epsilon(1e-12));
  CHECK(s.c_in() == doctest::Approx(0.26988).epsilon(1e-12));

  s = update_confidence(s, DemandZone::Outside, -0.038);  // C_out(6) uses C_out(4)
  CHECK(s.c_out() == doctest::Approx(0.6 * -0.038 + 0.4 * -0.141).epsilon(1e-12));
  CHECK(confidence_signal(s) == doctest::Approx(0.26988 + 0.0792).epsilon(1e-12));
}

TEST_CASE("confidence recursion: contiguous mode recurses on n-1") {
  ConfidenceState s = make_confidence_state(0.6, ConfidenceIndexMode::Contiguous);
  s = update_confidence(s, DemandZone::Inside, 0.1);
  s = update_confidence(s, DemandZone::Inside, 0.1);
  // 0.6*0.1 + 0.4*(0.6*0.1) = 0.084, not the literal 0.6*0.1 + 0.4*0 = 0.06.
  CHECK(s.c_in() == doctest::Approx(0.084).epsilon(1e-12));
}

TEST_CASE("confidence properties: alpha=1 tracking and degenerate cases") {
  // alpha -> 1 limit makes c_in the most recent inside run value. alpha must
  // stay inside (0,1), so probe just below 1.
  ConfidenceState track = make_confidence_state(1.0 - 1e-12);
  track = update_confidence(track, DemandZone::Inside, 0.25);
  track = update_confidence(track, DemandZone::Inside, -0.4);
  CHECK(track.c_in() == doctest::Approx(-0.4).epsilon(1e-9));

  // A sequence with no inside pitches leaves c_in at initialization exactly.
  ConfidenceState none = make_confidence_state(0.6);
  for (int i = 0; i < 20; ++i) none = update_confidence(none, DemandZone::Outside, 1.0);
  CHECK(none.c_in() == 0.0);

  // alpha -> 0: c_in stays within n*alpha*max|dRE| of its initialization.
  const double alpha = 1e-15;
  ConfidenceState frozen = make_confidence_state(alpha);
  for (int i = 0; i < 100; ++i) frozen = update_confidence(frozen, DemandZone::Inside, 1.0);
  CHECK(std::fabs(frozen.c_in()) <= 100 * alpha * 1.0);

  // Excluded zones carry both channels forward.
  ConfidenceState carried = make_confidence_state(0.6);
  carried = update_confidence(carried, DemandZone::Inside, 0.1);
  const double in_before = carried.c_in();
  carried = update_confidence(carried, DemandZone::Excluded, 9.9);
  CHECK(carried.c_in() == in_before);
  CHECK(carried.c_out() == 0.0);

  CHECK_THROWS_AS(make_confidence_state(0.0), Error);
  CHECK_THROWS_AS(make_confidence_state(1.0), Error);
}

TEST_CASE("four-seam confidence keys on pitch type") {
  ConfidenceState s = make_confidence_state(0.6);
  s = update_fourseam_confidence(s, true, -0.1);
  CHECK(s.c_fourseam() == doctest::Approx(-0.06));
  const double before = s.c_fourseam();
  s = update_fourseam_confidence(s, false, 1.0);
  CHECK(s.c_fourseam() == before);
}

TEST_CASE("rolling inside ratio") {
  std::vector<DemandZone> zones;
  for (int i = 0; i < 3; ++i) zones.push_back(DemandZone::Inside);
  for (int i = 0; i < 7; ++i) zones.push_back(DemandZone::Outside);
  CHECK(rolling_inside_ratio(zones) == doctest::Approx(0.3).epsilon(1e-12));

  const std::vector<DemandZone> all_inside(5, DemandZone::Inside);
  CHECK(rolling_inside_ratio(all_inside) == doctest::Approx(1.0));

  // Excluded pitches do not count toward either side.
  std::vector<DemandZone> with_excluded = zones;
  with_excluded.push_back(DemandZone::Excluded);
  CHECK(rolling_inside_ratio(with_excluded) == doctest::Approx(0.3).epsilon(1e-12));

  const std::vector<DemandZone> only_excluded(4, DemandZone::Excluded);
  CHECK_THROWS_AS(rolling_inside_ratio(only_excluded), Error);
}

TEST_CASE("compute_woba") {
  WobaWeights weights = WobaWeights::standard();
  weights.weights[EventCode::HomeRun] = 2.0;

  // One home run in one plate appearance with weight 2 scores 2.
  const std::vector<EventCode> one_hr{EventCode::HomeRun};
  CHECK(compute_woba(one_hr, weights) == doctest::Approx(2.0));

  // All outs score 0.
  const std::vector<EventCode> outs(7, EventCode::FieldOut);
  CHECK(compute_woba(outs, weights) == doctest::Approx(0.0));

  // Intentional walks are excluded from the denominator.
  const std::vector<EventCode> only_ibb(3, EventCode::IntendedWalk);
  CHECK_THROWS_AS(compute_woba(only_ibb, weights), Error);

  // Mixed line: (0.69 + 0.89) / 4 with standard weights.
  const WobaWeights standard = WobaWeights::standard();
  const std::vector<EventCode> mixed{EventCode::Walk, EventCode::Single,
                                     EventCode::FieldOut, EventCode::SwingingStrikeOut};
  CHECK(compute_woba(mixed, standard) == doctest::Approx((0.69 + 0.89) / 4.0).epsilon(1e-12));
}

TEST_CASE("league-shaped synthetic season: mean woba near the configured target") {
  // Batters draw plate-appearance outcomes from a fixed multinomial; each
  // batter's woba concentrates on the analytic value of that mix.
  const WobaWeights weights = WobaWeights::standard();
  struct Outcome {
    EventCode code;
    double prob;
  };
  const std::vector<Outcome> mix = {
      {EventCode::Walk, 0.08},        {EventCode::Single, 0.15},
      {EventCode::Double, 0.045},     {EventCode::Triple, 0.004},
      {EventCode::HomeRun, 0.03},     {EventCode::FieldOut, 0.50},
      {EventCode::SwingingStrikeOut, 0.191},
  };
  double expected_num = 0.0;
  for (const auto& o : mix) {
    const auto it = weights.weights.find(o.code);
    if (it != weights.weights.end()) expected_num += o.prob * it->second;
  }
  const double expected = expected_num;  // every mix outcome is in the denominator

  Rng rng(2024);
  double total = 0.0;
  const int batters = 200;
  for (int b = 0; b < batters; ++b) {
    std::vector<EventCode> outcomes;
    for (int pa = 0; pa < 400; ++pa) {
      double u = rng.uniform();
      for (const auto& o : mix) {
        if (u < o.prob) {
          outcomes.push_back(o.code);
          break;
        }
        u -= o.prob;
      }
    }
    total += compute_woba(outcomes, weights);
  }
  CHECK(total / batters == doctest::Approx(expected).epsilon(0.06));
  CHECK(std::fabs(total / batters - expected) < 0.02);
}

TEST_CASE("assemble_features: sentinels, same_hand, 18 dimensions") {
  PitchEvent pitch;
  pitch.balls = 2;
  pitch.outs = 1;
  pitch.bases = {true, false, true};
  pitch.run_diff = -1;
  pitch.pitcher_hand = Hand::Right;
  pitch.batter_hand = Hand::Right;
  pitch.pitcher_total_pitches = 37;

  FeatureContext ctx;  // first pitch of a game: no lags
  ctx.pitcher_mean_speed = 143.0;
  ctx.pitcher_inside_ratio = 0.31;
  ctx.batter_inside_ratio = 0.29;
  ctx.batter_woba = 0.33;

  const auto x = assemble_features(pitch, ctx);
  CHECK(x.size() == 18);
  CHECK(x[0] == 2.0);
  CHECK(x[1] == 1.0);
  CHECK(x[2] == 5.0);  // first+third = 1 + 4
  CHECK(x[3] == -1.0);
  CHECK(x[4] == 1.0);  // same hands
  CHECK(x[5] == 37.0);
  CHECK(x[6] == 0.0);            // result lag sentinel
  CHECK(x[8] == 143.0);          // speed lag imputed to the window mean
  CHECK(x[15] == 0.31);
  CHECK(x[17] == 0.33);

  pitch.batter_hand = Hand::Left;
  CHECK(assemble_features(pitch, ctx)[4] == 0.0);
}

TEST_CASE("build_feature_matrix over a crafted two-window season") {
  std::vector<PitchEvent> season;
  auto pitch = [](const std::string& date, const std::string& game, int seq, double dx,
                  EventCode outcome, double speed, int total) {
    PitchEvent ev;
    ev.game_id = game;
    ev.date = *Date::parse(date);
    ev.inning = 1;
    ev.pitcher_id = "p1";
    ev.batter_id = "b1";
    ev.pitch_seq_no = seq;
    ev.pitcher_total_pitches = total;
    ev.demand_x = dx;
    ev.demand_y = 70;
    ev.pitch_speed = speed;
    ev.outcome = outcome;
    return ev;
  };

  // Feature window: enough volume for thresholds (PA terminal events) and
  // the window aggregates: 60 inside, 60 outside; all PAs are field outs.
  for (int i = 0; i < 120; ++i) {
    season.push_back(pitch("2024-04-10", "gw" + std::to_string(i / 20),
                           (i % 20) + 1, i % 2 == 0 ? 100.0 : 60.0,
                           EventCode::FieldOut, 140.0, i % 20 + 1));
  }
  // Estimation window: one game, three pitches.
  season.push_back(pitch("2024-07-05", "ge", 1, 100.0, EventCode::Strike, 145.0, 1));
  season.push_back(pitch("2024-07-05", "ge", 2, 60.0, EventCode::Ball, 146.0, 2));
  season.push_back(pitch("2024-07-05", "ge", 3, 100.0, EventCode::Single, 147.0, 3));

  FilterConfig filter;
  filter.min_batter_pa = 100;
  filter.min_pitcher_tbf = 100;

  RunExpectancyTable re;  // zero table is fine for event-value outcomes

  FeatureBuildConfig cfg;
  const FeaturizeOutput out = build_feature_matrix(season, filter, re, std::nullopt,
                                                   WobaWeights::standard(), cfg);

  REQUIRE(out.matrix.n() == 3);
  CHECK(out.log.analysis_pitches == 3);
  CHECK(out.matrix.z[0] == 1);  // inside demand
  CHECK(out.matrix.z[1] == 0);
  CHECK(out.matrix.z[2] == 1);

  const int ratio_col = feature_index("pitcher_inside_ratio");
  CHECK(out.matrix.at(0, ratio_col) == doctest::Approx(0.5));  // 60/120 in window
  const int woba_col = feature_index("batter_woba");
  CHECK(out.matrix.at(0, woba_col) == doctest::Approx(0.0));  // all outs in window

  // First estimation pitch of the game has sentinel lags; the third sees
  // the second's speed.
  const int speed1_col = feature_index("speed_1_ago");
  CHECK(out.matrix.at(0, speed1_col) == doctest::Approx(140.0));  // window mean
  CHECK(out.matrix.at(2, speed1_col) == doctest::Approx(146.0));

  // Outcomes on the event-value scale: with a zero RE table every field out
  // maps to 0, so strike/ball/single all value 0 here.
  CHECK(out.matrix.y[0] == doctest::Approx(0.0));

  // Determinism of the whole pass.
  const FeaturizeOutput again = build_feature_matrix(season, filter, re, std::nullopt,
                                                     WobaWeights::standard(), cfg);
  CHECK(again.matrix.x == out.matrix.x);
  CHECK(again.matrix.y == out.matrix.y);
}
