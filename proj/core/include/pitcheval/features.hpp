#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "pitcheval/events.hpp"
#include "pitcheval/matrix.hpp"
#include "pitcheval/valuation.hpp"

namespace pitcheval {

// The published recurrence indexes the same-zone branch at n-2 while the
// carry-forward branch uses n-1. Literal implements exactly that; Contiguous
// is the conventional exponentially weighted form recursing on n-1 in both
// branches.
enum class ConfidenceIndexMode { Literal, Contiguous };

// Exponentially weighted "confidence" summaries of recent results on the run
// scale, one channel each for inside pitches, outside pitches, and four-seam
// pitches. cur/prev hold the channel values at the current and previous
// pitch index; negative values favor the pitcher.
struct ConfidenceState {
  struct Channel {
    double cur = 0.0;
    double prev = 0.0;
  };

  double alpha = 0.6;  // strictly in (0,1)
  ConfidenceIndexMode mode = ConfidenceIndexMode::Literal;
  Channel in;
  Channel out;
  Channel fourseam;

  double c_in() const { return in.cur; }
  double c_out() const { return out.cur; }
  double c_fourseam() const { return fourseam.cur; }
};

ConfidenceState make_confidence_state(double alpha,
                                      ConfidenceIndexMode mode = ConfidenceIndexMode::Literal);

// Advances the inside/outside channels by one pitch. The updated channel is
// the zone of the previous pitch; the other carries forward. Excluded zones
// carry both channels forward.
ConfidenceState update_confidence(const ConfidenceState& state, DemandZone prev_pitch_zone,
                                  double prev_delta_re);

// Same recursion keyed on whether the previous pitch was a four-seam.
ConfidenceState update_fourseam_confidence(const ConfidenceState& state,
                                           bool prev_was_fourseam, double prev_delta_re);

// C(n) = C_in(n) - C_out(n).
double confidence_signal(const ConfidenceState& state);

// count(inside) / count(inside or outside) over a player's feature-window
// pitches. Throws Error(NoEligiblePitches) when no pitch is classified.
double rolling_inside_ratio(std::span<const DemandZone> zones);

struct WobaWeights {
  std::map<EventCode, double> weights;  // numerator linear weights
  std::set<EventCode> denominator;      // plate appearances that count

  static WobaWeights standard();
};

// Weighted sum over outcomes divided by denominator count. Throws
// Error(EmptyDenominator) when no outcome is in the denominator set.
double compute_woba(std::span<const EventCode> pa_outcomes, const WobaWeights& weights);

// Whether lag features carry across plate appearances within a game or
// reset at each plate appearance.
enum class LagScope { Game, PlateAppearance };

// Unit outcome definition: the event's mean run value from the event value
// table, or the realized base-out delta of that pitch.
enum class OutcomeMode { EventValue, Realized };

struct FeatureBuildConfig {
  double alpha_fast = 0.6;
  double alpha_slow = 0.001;
  ConfidenceIndexMode confidence_mode = ConfidenceIndexMode::Literal;
  LagScope lag_scope = LagScope::Game;
  OutcomeMode outcome_mode = OutcomeMode::EventValue;
  bool include_runs_on_play = true;
};

// History snapshot for one pitch, resolved by the featurize driver.
struct FeatureContext {
  double result_1_ago = 0.0;  // run scale; 0 when no history
  double result_2_ago = 0.0;
  std::optional<double> speed_1_ago;  // empty -> imputed
  std::optional<double> speed_2_ago;
  double conf_inside_fast = 0.0;
  double conf_inside_slow = 0.0;
  double conf_fourseam_fast = 0.0;
  double conf_fourseam_slow = 0.0;
  double prev_batting_result = 0.0;  // batter's last completed PA, run scale
  double pitcher_inside_ratio = 0.0;
  double batter_inside_ratio = 0.0;
  double batter_woba = 0.0;
  double pitcher_mean_speed = 0.0;  // imputation value for missing speeds
};

std::array<double, kFeatureCount> assemble_features(const PitchEvent& pitch,
                                                    const FeatureContext& context);

struct ProvenanceLog {
  std::int64_t analysis_pitches = 0;
  std::int64_t emitted_units = 0;
  std::int64_t speed_imputations = 0;
  std::int64_t missing_aggregate_skipped = 0;
  std::vector<std::string> notes;
};

struct FeaturizeOutput {
  FeatureMatrix matrix;
  EventValueTable event_values;
  ProvenanceLog log;
};

// Full featurize pass over a season of pitch events (chronological within
// games; events are stable-sorted by date). Confidence and lag state evolve
// over every pitch; rows are emitted for the filtered analysis set only.
FeaturizeOutput build_feature_matrix(std::vector<PitchEvent> season_events,
                                     const FilterConfig& filter,
                                     const RunExpectancyTable& re_table,
                                     const std::optional<EventValueTable>& event_values,
                                     const WobaWeights& woba_weights,
                                     const FeatureBuildConfig& cfg);

}  // namespace pitcheval
