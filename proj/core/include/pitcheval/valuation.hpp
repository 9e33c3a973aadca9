#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pitcheval/events.hpp"
#include "pitcheval/meta.hpp"

namespace pitcheval {

// Expected runs from each of the 24 base-out states to the end of the
// half-inning. States never observed carry value 0 with sample_n 0; the
// warnings list records them along with any monotonicity violations.
struct RunExpectancyTable {
  std::array<double, kBaseOutStateCount> value{};
  std::array<std::int64_t, kBaseOutStateCount> sample_n{};
  std::vector<std::string> warnings;

  double at(const BaseOutState& state) const { return value[static_cast<std::size_t>(state.index())]; }
};

// Mean run value per event code (Table-style linear weights).
struct EventValueTable {
  std::map<EventCode, double> value;
  std::map<EventCode, std::int64_t> sample_n;
  std::vector<std::string> warnings;

  double at(EventCode code) const {
    auto it = value.find(code);
    return it == value.end() ? 0.0 : it->second;
  }
};

// Builds the run-expectancy table from complete half-innings. Each event's
// state contributes the runs scored from that point to the end of its
// half-inning. Throws Error(IncompleteInning) when a half-inning does not
// reach three outs.
RunExpectancyTable build_re_table(const std::vector<HalfInning>& innings);

// RE_after - RE_before (+ runs scored on the play when include_runs_on_play).
// An empty `after` means the inning ended; RE_after is 0.
double delta_re(const BaseOutState& before, const std::optional<BaseOutState>& after,
                int runs_scored, const RunExpectancyTable& table,
                bool include_runs_on_play = true);

EventValueTable build_event_value_table(
    const std::vector<std::pair<EventCode, double>>& occurrences);

// Per-occurrence run values over whole half-innings, the input to
// build_event_value_table.
std::vector<std::pair<EventCode, double>> delta_re_occurrences(
    const std::vector<HalfInning>& innings, const RunExpectancyTable& table,
    bool include_runs_on_play = true);

// Groups plate-appearance-terminal pitch events into half-inning transition
// sequences. The after-state of each transition is the next terminal event's
// before-state; the final transition of each half-inning is assumed to end
// the inning (after = 3 outs).
std::vector<HalfInning> innings_from_pitch_events(const std::vector<PitchEvent>& events);

// Flat CSV with explicit before/after states, one row per transition.
void write_innings_csv(const std::string& path, const std::vector<HalfInning>& innings,
                       const MetaBlock& meta);
std::vector<HalfInning> read_innings_csv(const std::string& path,
                                         std::optional<int> season_filter = {});

// Detects the transitions schema by header; otherwise reads the file as a
// canonical pitch events CSV and derives transitions.
std::vector<HalfInning> read_innings_any(const std::string& path,
                                         std::optional<int> season_filter = {});

void write_re_table_csv(const std::string& path, const RunExpectancyTable& table,
                        const MetaBlock& meta);
RunExpectancyTable read_re_table_csv(const std::string& path);
std::string re_table_to_json(const RunExpectancyTable& table, const MetaBlock& meta);

void write_event_values_csv(const std::string& path, const EventValueTable& table,
                            const MetaBlock& meta);
EventValueTable read_event_values_csv(const std::string& path);
std::string event_values_to_json(const EventValueTable& table, const MetaBlock& meta);

}  // namespace pitcheval
