#include "pitcheval/features.hpp"

#include <algorithm>
#include <cmath>

#include "pitcheval/error.hpp"
#include "pitcheval/ingest.hpp"

namespace pitcheval {

namespace {

void advance_channel(ConfidenceState::Channel& channel, bool updated, double alpha,
                     ConfidenceIndexMode mode, double prev_delta_re) {
  const double basis =
      (mode == ConfidenceIndexMode::Literal) ? channel.prev : channel.cur;
  const double next =
      updated ? alpha * prev_delta_re + (1.0 - alpha) * basis : channel.cur;
  channel.prev = channel.cur;
  channel.cur = next;
}

}  // namespace

ConfidenceState make_confidence_state(double alpha, ConfidenceIndexMode mode) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "confidence alpha must be in (0,1)");
  }
  ConfidenceState state;
  state.alpha = alpha;
  state.mode = mode;
  return state;
}

ConfidenceState update_confidence(const ConfidenceState& state, DemandZone prev_pitch_zone,
                                  double prev_delta_re) {
  ConfidenceState next = state;
  advance_channel(next.in, prev_pitch_zone == DemandZone::Inside, state.alpha,
                  state.mode, prev_delta_re);
  advance_channel(next.out, prev_pitch_zone == DemandZone::Outside, state.alpha,
                  state.mode, prev_delta_re);
  return next;
}

ConfidenceState update_fourseam_confidence(const ConfidenceState& state,
                                           bool prev_was_fourseam, double prev_delta_re) {
  ConfidenceState next = state;
  advance_channel(next.fourseam, prev_was_fourseam, state.alpha, state.mode,
                  prev_delta_re);
  return next;
}

double confidence_signal(const ConfidenceState& state) {
  return state.in.cur - state.out.cur;
}

double rolling_inside_ratio(std::span<const DemandZone> zones) {
  std::int64_t inside = 0;
  std::int64_t classified = 0;
  for (DemandZone zone : zones) {
    if (zone == DemandZone::Inside) {
      ++inside;
      ++classified;
    } else if (zone == DemandZone::Outside) {
      ++classified;
    }
  }
  if (classified == 0) {
    throw Error(ErrorCode::NoEligiblePitches, "no inside/outside pitches in window");
  }
  return static_cast<double>(inside) / static_cast<double>(classified);
}

WobaWeights WobaWeights::standard() {
  WobaWeights w;
  w.weights = {
      {EventCode::Walk, 0.69},   {EventCode::HitByPitch, 0.72},
      {EventCode::Single, 0.89}, {EventCode::Double, 1.27},
      {EventCode::Triple, 1.62}, {EventCode::HomeRun, 2.10},
  };
  // All plate appearances except intentional walks and sacrifice bunts.
  for (int i = 0; i < kEventCodeCount; ++i) {
    const auto code = static_cast<EventCode>(i);
    if (!is_pa_terminal(code)) continue;
    if (code == EventCode::IntendedWalk || code == EventCode::Bunt) continue;
    w.denominator.insert(code);
  }
  return w;
}

double compute_woba(std::span<const EventCode> pa_outcomes, const WobaWeights& weights) {
  double numerator = 0.0;
  std::int64_t denominator = 0;
  for (EventCode code : pa_outcomes) {
    if (weights.denominator.count(code) != 0) ++denominator;
    const auto it = weights.weights.find(code);
    if (it != weights.weights.end()) numerator += it->second;
  }
  if (denominator == 0) {
    throw Error(ErrorCode::EmptyDenominator, "no qualifying plate appearances");
  }
  return numerator / static_cast<double>(denominator);
}

std::array<double, kFeatureCount> assemble_features(const PitchEvent& pitch,
                                                    const FeatureContext& context) {
  std::array<double, kFeatureCount> x{};
  x[0] = pitch.balls;
  x[1] = pitch.outs;
  x[2] = pitch.bases.code();
  x[3] = pitch.run_diff;
  x[4] = pitch.pitcher_hand == pitch.batter_hand ? 1.0 : 0.0;
  x[5] = pitch.pitcher_total_pitches;
  x[6] = context.result_1_ago;
  x[7] = context.result_2_ago;
  x[8] = context.speed_1_ago.value_or(context.pitcher_mean_speed);
  x[9] = context.speed_2_ago.value_or(context.pitcher_mean_speed);
  x[10] = context.conf_inside_fast;
  x[11] = context.conf_inside_slow;
  x[12] = context.conf_fourseam_fast;
  x[13] = context.conf_fourseam_slow;
  x[14] = context.prev_batting_result;
  x[15] = context.pitcher_inside_ratio;
  x[16] = context.batter_inside_ratio;
  x[17] = context.batter_woba;
  return x;
}

namespace {

using PlayerSeason = std::pair<std::string, int>;

struct WindowAggregates {
  std::map<PlayerSeason, std::pair<std::int64_t, std::int64_t>> pitcher_zone;  // inside, classified
  std::map<PlayerSeason, std::pair<std::int64_t, std::int64_t>> batter_zone;
  std::map<PlayerSeason, std::pair<double, std::int64_t>> pitcher_speed;  // sum, n
  std::map<PlayerSeason, std::vector<EventCode>> batter_pa;
  double league_speed_sum = 0.0;
  std::int64_t league_speed_n = 0;
};

struct LagState {
  double result_1 = 0.0;
  double result_2 = 0.0;
  std::optional<double> speed_1;
  std::optional<double> speed_2;
  int depth = 0;

  void push(double result, std::optional<double> speed) {
    result_2 = result_1;
    speed_2 = speed_1;
    result_1 = result;
    speed_1 = speed;
    if (depth < 2) ++depth;
  }
  void reset() { *this = LagState{}; }
};

struct PitcherState {
  ConfidenceState fast;
  ConfidenceState slow;
  LagState lags;
  std::string current_game;
  bool prev_pitch_ended_pa = false;
};

}  // namespace

FeaturizeOutput build_feature_matrix(std::vector<PitchEvent> season_events,
                                     const FilterConfig& filter,
                                     const RunExpectancyTable& re_table,
                                     const std::optional<EventValueTable>& event_values,
                                     const WobaWeights& woba_weights,
                                     const FeatureBuildConfig& cfg) {
  filter.validate();
  std::stable_sort(season_events.begin(), season_events.end(),
                   [](const PitchEvent& a, const PitchEvent& b) { return a.date < b.date; });

  const std::size_t n = season_events.size();
  std::vector<DemandZone> zones(n);
  for (std::size_t i = 0; i < n; ++i) {
    zones[i] = classify_demand_zone(season_events[i].demand_x, season_events[i].demand_y,
                                    season_events[i].batter_hand);
  }

  const PlayerCounts counts = compute_player_counts(season_events);

  WindowAggregates agg;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& ev = season_events[i];
    if (!filter.feature_window.contains(ev.date)) continue;
    const PlayerSeason pitcher{ev.pitcher_id, ev.date.year};
    const PlayerSeason batter{ev.batter_id, ev.date.year};
    auto& pz = agg.pitcher_zone[pitcher];
    auto& bz = agg.batter_zone[batter];
    if (zones[i] != DemandZone::Excluded) {
      ++pz.second;
      ++bz.second;
      if (zones[i] == DemandZone::Inside) {
        ++pz.first;
        ++bz.first;
      }
    }
    if (ev.pitch_speed) {
      auto& ps = agg.pitcher_speed[pitcher];
      ps.first += *ev.pitch_speed;
      ps.second += 1;
      agg.league_speed_sum += *ev.pitch_speed;
      agg.league_speed_n += 1;
    }
    if (is_pa_terminal(ev.outcome)) agg.batter_pa[batter].push_back(ev.outcome);
  }

  EventValueTable evt;
  if (event_values) {
    evt = *event_values;
  } else {
    evt = build_event_value_table(delta_re_occurrences(
        innings_from_pitch_events(season_events), re_table, cfg.include_runs_on_play));
  }

  // Realized base-out delta per pitch: after-state is the next pitch's state
  // within the half-inning, or inning end for the last one.
  std::vector<double> realized;
  if (cfg.outcome_mode == OutcomeMode::Realized) {
    realized.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& ev = season_events[i];
      std::optional<BaseOutState> after;
      if (i + 1 < n && season_events[i + 1].game_id == ev.game_id &&
          season_events[i + 1].inning == ev.inning &&
          season_events[i + 1].half == ev.half) {
        after = season_events[i + 1].state();
      }
      realized[i] = delta_re(ev.state(), after, ev.runs_scored_on_play, re_table,
                             cfg.include_runs_on_play);
    }
  }

  auto run_value = [&](std::size_t i) {
    return cfg.outcome_mode == OutcomeMode::EventValue
               ? evt.at(season_events[i].outcome)
               : realized[i];
  };

  const double league_mean_speed =
      agg.league_speed_n > 0 ? agg.league_speed_sum / static_cast<double>(agg.league_speed_n)
                             : 0.0;

  FeaturizeOutput output;
  output.matrix = make_canonical_matrix();
  output.event_values = evt;

  std::map<PlayerSeason, PitcherState> pitcher_state;
  std::map<PlayerSeason, std::pair<bool, double>> batter_prev_pa;  // seen, value

  // Cached window-derived context per player-season; missing entries mean
  // the player cannot be featurized.
  std::map<PlayerSeason, double> pitcher_ratio_cache;
  std::map<PlayerSeason, double> batter_ratio_cache;
  std::map<PlayerSeason, double> batter_woba_cache;

  auto pitcher_ratio = [&](const PlayerSeason& key) -> std::optional<double> {
    const auto cached = pitcher_ratio_cache.find(key);
    if (cached != pitcher_ratio_cache.end()) return cached->second;
    const auto it = agg.pitcher_zone.find(key);
    if (it == agg.pitcher_zone.end() || it->second.second == 0) return std::nullopt;
    const double ratio =
        static_cast<double>(it->second.first) / static_cast<double>(it->second.second);
    pitcher_ratio_cache[key] = ratio;
    return ratio;
  };
  auto batter_ratio = [&](const PlayerSeason& key) -> std::optional<double> {
    const auto cached = batter_ratio_cache.find(key);
    if (cached != batter_ratio_cache.end()) return cached->second;
    const auto it = agg.batter_zone.find(key);
    if (it == agg.batter_zone.end() || it->second.second == 0) return std::nullopt;
    const double ratio =
        static_cast<double>(it->second.first) / static_cast<double>(it->second.second);
    batter_ratio_cache[key] = ratio;
    return ratio;
  };
  auto batter_woba = [&](const PlayerSeason& key) -> std::optional<double> {
    const auto cached = batter_woba_cache.find(key);
    if (cached != batter_woba_cache.end()) return cached->second;
    const auto it = agg.batter_pa.find(key);
    if (it == agg.batter_pa.end()) return std::nullopt;
    try {
      const double woba = compute_woba(it->second, woba_weights);
      batter_woba_cache[key] = woba;
      return woba;
    } catch (const Error&) {
      return std::nullopt;
    }
  };

  auto in_analysis_set = [&](std::size_t i) {
    const auto& ev = season_events[i];
    if (!filter.estimation_window.contains(ev.date)) return false;
    if (!filter.allows_pitch_type(ev.pitch_type)) return false;
    const auto pa = counts.batter_pa.find(ev.batter_id);
    if (pa == counts.batter_pa.end() || pa->second < filter.min_batter_pa) return false;
    const auto tbf = counts.pitcher_tbf.find(ev.pitcher_id);
    if (tbf == counts.pitcher_tbf.end() || tbf->second < filter.min_pitcher_tbf) return false;
    return zones[i] != DemandZone::Excluded;
  };

  std::int64_t next_unit = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& ev = season_events[i];
    const PlayerSeason pitcher_key{ev.pitcher_id, ev.date.year};
    const PlayerSeason batter_key{ev.batter_id, ev.date.year};

    auto [ps_it, inserted] = pitcher_state.try_emplace(pitcher_key);
    PitcherState& ps = ps_it->second;
    if (inserted) {
      ps.fast = make_confidence_state(cfg.alpha_fast, cfg.confidence_mode);
      ps.slow = make_confidence_state(cfg.alpha_slow, cfg.confidence_mode);
      ps.current_game = ev.game_id;
    }
    if (ps.current_game != ev.game_id) {
      ps.lags.reset();
      ps.current_game = ev.game_id;
      ps.prev_pitch_ended_pa = false;
    } else if (cfg.lag_scope == LagScope::PlateAppearance && ps.prev_pitch_ended_pa) {
      ps.lags.reset();
    }

    if (in_analysis_set(i)) {
      ++output.log.analysis_pitches;
      const auto p_ratio = pitcher_ratio(pitcher_key);
      const auto b_ratio = batter_ratio(batter_key);
      const auto b_woba = batter_woba(batter_key);
      if (!p_ratio || !b_ratio || !b_woba) {
        ++output.log.missing_aggregate_skipped;
      } else {
        FeatureContext ctx;
        ctx.result_1_ago = ps.lags.depth >= 1 ? ps.lags.result_1 : 0.0;
        ctx.result_2_ago = ps.lags.depth >= 2 ? ps.lags.result_2 : 0.0;
        ctx.speed_1_ago = ps.lags.depth >= 1 ? ps.lags.speed_1 : std::nullopt;
        ctx.speed_2_ago = ps.lags.depth >= 2 ? ps.lags.speed_2 : std::nullopt;
        ctx.conf_inside_fast = ps.fast.c_in() - ps.fast.c_out();
        ctx.conf_inside_slow = ps.slow.c_in() - ps.slow.c_out();
        ctx.conf_fourseam_fast = ps.fast.c_fourseam();
        ctx.conf_fourseam_slow = ps.slow.c_fourseam();
        const auto prev_pa = batter_prev_pa.find(batter_key);
        ctx.prev_batting_result =
            (prev_pa != batter_prev_pa.end() && prev_pa->second.first)
                ? prev_pa->second.second
                : 0.0;
        ctx.pitcher_inside_ratio = *p_ratio;
        ctx.batter_inside_ratio = *b_ratio;
        ctx.batter_woba = *b_woba;
        const auto speed_agg = agg.pitcher_speed.find(pitcher_key);
        ctx.pitcher_mean_speed =
            (speed_agg != agg.pitcher_speed.end() && speed_agg->second.second > 0)
                ? speed_agg->second.first / static_cast<double>(speed_agg->second.second)
                : league_mean_speed;
        if (!ctx.speed_1_ago) ++output.log.speed_imputations;
        if (!ctx.speed_2_ago) ++output.log.speed_imputations;

        const auto row = assemble_features(ev, ctx);
        output.matrix.push_row(next_unit++, row,
                               zones[i] == DemandZone::Inside ? 1 : 0, run_value(i));
        output.matrix.game_id.push_back(ev.game_id);
        ++output.log.emitted_units;
      }
    }

    // Advance state with this pitch's zone, type and run value.
    const double value = run_value(i);
    ps.fast = update_fourseam_confidence(update_confidence(ps.fast, zones[i], value),
                                         ev.pitch_type == PitchType::FourSeam, value);
    ps.slow = update_fourseam_confidence(update_confidence(ps.slow, zones[i], value),
                                         ev.pitch_type == PitchType::FourSeam, value);
    ps.lags.push(value, ev.pitch_speed);
    ps.prev_pitch_ended_pa = is_pa_terminal(ev.outcome);
    if (is_pa_terminal(ev.outcome)) {
      batter_prev_pa[batter_key] = {true, value};
    }
  }

  if (output.log.speed_imputations > 0) {
    output.log.notes.push_back("imputed " + std::to_string(output.log.speed_imputations) +
                               " lagged pitch speeds with window means");
  }
  if (output.log.missing_aggregate_skipped > 0) {
    output.log.notes.push_back(
        "skipped " + std::to_string(output.log.missing_aggregate_skipped) +
        " analysis pitches lacking feature-window aggregates");
  }
  return output;
}

}  // namespace pitcheval
