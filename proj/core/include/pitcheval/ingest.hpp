#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pitcheval/events.hpp"
#include "pitcheval/meta.hpp"

namespace pitcheval {

// Inside/outside demand classification on the 160x200 px canvas. For a
// right-handed batter: inside means demand_x >= 96 and demand_y <= 80,
// outside means demand_x <= 64 and demand_y <= 80, everything else is
// excluded. For a left-handed batter the x conditions mirror about the
// canvas midline (x = 80); the y condition is unchanged. Throws
// Error(OutOfCanvas) for coordinates outside the canvas.
DemandZone classify_demand_zone(double demand_x, double demand_y, Hand batter_hand);

// Mapping from the canonical PitchEvent field names to the column names used
// in a third-party CSV export. Fields not present in the map keep their
// canonical names.
struct ColumnMap {
  std::map<std::string, std::string> columns;

  std::string source_column(const std::string& canonical) const {
    auto it = columns.find(canonical);
    return it == columns.end() ? canonical : it->second;
  }
};

struct RejectedRow {
  std::int64_t row_number = 0;  // 1-based data-row number (header excluded)
  std::string column;
  std::string message;
};

struct ParseResult {
  std::vector<PitchEvent> events;
  std::vector<RejectedRow> rejected;
};

// Parses a pitch-by-pitch CSV. Throws Error(MissingColumn) when a required
// column is absent and Error(EmptyFile) when there is no header; row-level
// problems (bad values, invariant violations) reject the row and are
// collected in the result.
ParseResult parse_pitch_csv(const std::string& path, const ColumnMap& schema = {});

// Season-level plate-appearance / total-batters-faced tallies, counted over
// plate-appearance-terminal events.
struct PlayerCounts {
  std::map<std::string, std::int64_t> batter_pa;
  std::map<std::string, std::int64_t> pitcher_tbf;
};

PlayerCounts compute_player_counts(const std::vector<PitchEvent>& events);

// Removal counts per filtering rule, in application order. Each removed
// event is attributed to the first rule it fails.
struct FilterReport {
  std::int64_t input = 0;
  std::int64_t outside_estimation_window = 0;
  std::int64_t wrong_pitch_type = 0;
  std::int64_t batter_below_min_pa = 0;
  std::int64_t pitcher_below_min_tbf = 0;
  std::int64_t zone_excluded = 0;
  std::int64_t retained = 0;
};

// Applies the estimation-window / pitch-type / player-volume / zone rules.
// Order of retained events equals input order.
std::vector<PitchEvent> filter_analysis_set(const std::vector<PitchEvent>& events,
                                            const FilterConfig& cfg,
                                            const PlayerCounts& counts,
                                            FilterReport* report = nullptr);

// Canonical events file (CSV, one row per pitch, demand_zone column derived).
void write_events_csv(const std::string& path, const std::vector<PitchEvent>& events,
                      const MetaBlock& meta);
std::vector<PitchEvent> read_events_csv(const std::string& path);

void write_rejected_csv(const std::string& path, const std::vector<RejectedRow>& rows,
                        const MetaBlock& meta);

}  // namespace pitcheval
