#include "pitcheval/ingest.hpp"

#include <array>
#include <optional>

#include "pitcheval/csv.hpp"
#include "pitcheval/error.hpp"

namespace pitcheval {

namespace {

constexpr double kInsideXThreshold = 96.0;   // right-handed batter
constexpr double kOutsideXThreshold = 64.0;
constexpr double kMaxZoneY = 80.0;  // top-third boundary; no lower bound

const std::array<std::string, 27> kEventColumns = {
    "game_id", "date", "inning", "half", "pitcher_id", "batter_id",
    "catcher_id", "balls", "strikes", "outs", "base_first", "base_second",
    "base_third", "run_diff", "pitch_seq_no", "pitcher_total_pitches",
    "pitch_type", "pitch_speed", "demand_x", "demand_y", "actual_x",
    "actual_y", "pitcher_hand", "batter_hand", "outcome",
    "runs_scored_on_play", "demand_zone"};

// demand_zone is derived on write and optional on read.
constexpr std::size_t kRequiredColumnCount = 26;

struct RowError {
  std::string column;
  std::string message;
};

class RowReader {
 public:
  RowReader(const std::vector<std::string>& fields,
            const std::vector<int>& column_index)
      : fields_(fields), index_(column_index) {}

  const std::string& raw(int canonical) const {
    static const std::string empty;
    const int idx = index_[static_cast<std::size_t>(canonical)];
    if (idx < 0 || static_cast<std::size_t>(idx) >= fields_.size()) return empty;
    return fields_[static_cast<std::size_t>(idx)];
  }

 private:
  const std::vector<std::string>& fields_;
  const std::vector<int>& index_;
};

int column_id(const std::string& name) {
  for (std::size_t i = 0; i < kEventColumns.size(); ++i) {
    if (kEventColumns[i] == name) return static_cast<int>(i);
  }
  return -1;
}

std::optional<RowError> parse_row(const RowReader& row, PitchEvent& ev) {
  auto fail = [](const char* column, const std::string& message) {
    return RowError{column, message};
  };

  auto need_int = [&](const char* name, int lo, int hi, int& out) -> std::optional<RowError> {
    const auto parsed = parse_int(row.raw(column_id(name)));
    if (!parsed) return fail(name, "not an integer");
    if (*parsed < lo || *parsed > hi) return fail(name, "out of range");
    out = static_cast<int>(*parsed);
    return std::nullopt;
  };
  auto need_bool = [&](const char* name, bool& out) -> std::optional<RowError> {
    const std::string& text = row.raw(column_id(name));
    if (text == "0") { out = false; return std::nullopt; }
    if (text == "1") { out = true; return std::nullopt; }
    return fail(name, "expected 0 or 1");
  };

  ev.game_id = row.raw(column_id("game_id"));
  if (ev.game_id.empty()) return fail("game_id", "empty");

  const auto date = Date::parse(row.raw(column_id("date")));
  if (!date) return fail("date", "expected ISO-8601 YYYY-MM-DD");
  ev.date = *date;

  if (auto e = need_int("inning", 1, 99, ev.inning)) return e;

  const std::string& half = row.raw(column_id("half"));
  if (half == "top") ev.half = Half::Top;
  else if (half == "bottom") ev.half = Half::Bottom;
  else return fail("half", "expected top or bottom");

  ev.pitcher_id = row.raw(column_id("pitcher_id"));
  ev.batter_id = row.raw(column_id("batter_id"));
  ev.catcher_id = row.raw(column_id("catcher_id"));
  if (ev.pitcher_id.empty()) return fail("pitcher_id", "empty");
  if (ev.batter_id.empty()) return fail("batter_id", "empty");

  if (auto e = need_int("balls", 0, 3, ev.balls)) return e;
  if (auto e = need_int("strikes", 0, 2, ev.strikes)) return e;
  if (auto e = need_int("outs", 0, 2, ev.outs)) return e;
  if (auto e = need_bool("base_first", ev.bases.first)) return e;
  if (auto e = need_bool("base_second", ev.bases.second)) return e;
  if (auto e = need_bool("base_third", ev.bases.third)) return e;
  if (auto e = need_int("run_diff", -99, 99, ev.run_diff)) return e;
  if (auto e = need_int("pitch_seq_no", 1, 999, ev.pitch_seq_no)) return e;
  if (auto e = need_int("pitcher_total_pitches", 1, 999, ev.pitcher_total_pitches)) return e;

  const std::string& type = row.raw(column_id("pitch_type"));
  if (type == "four-seam") ev.pitch_type = PitchType::FourSeam;
  else if (type == "other") ev.pitch_type = PitchType::Other;
  else return fail("pitch_type", "expected four-seam or other");

  const std::string& speed = row.raw(column_id("pitch_speed"));
  if (speed.empty()) {
    ev.pitch_speed.reset();
  } else {
    const auto parsed = parse_double(speed);
    if (!parsed || *parsed <= 0) return fail("pitch_speed", "not a positive number");
    ev.pitch_speed = *parsed;
  }

  // Demand location defines the treatment; a missing or out-of-canvas demand
  // rejects the row.
  const auto dx = parse_double(row.raw(column_id("demand_x")));
  const auto dy = parse_double(row.raw(column_id("demand_y")));
  if (!dx) return fail("demand_x", "missing or not a number");
  if (!dy) return fail("demand_y", "missing or not a number");
  if (*dx < 0 || *dx > kCanvasWidthPx) return fail("demand_x", "outside canvas");
  if (*dy < 0 || *dy > kCanvasHeightPx) return fail("demand_y", "outside canvas");
  ev.demand_x = *dx;
  ev.demand_y = *dy;

  auto optional_px = [&](const char* name, std::optional<double>& out) -> std::optional<RowError> {
    const std::string& text = row.raw(column_id(name));
    if (text.empty()) { out.reset(); return std::nullopt; }
    const auto parsed = parse_double(text);
    if (!parsed) return fail(name, "not a number");
    out = *parsed;
    return std::nullopt;
  };
  if (auto e = optional_px("actual_x", ev.actual_x)) return e;
  if (auto e = optional_px("actual_y", ev.actual_y)) return e;

  auto need_hand = [&](const char* name, Hand& out) -> std::optional<RowError> {
    const std::string& text = row.raw(column_id(name));
    if (text == "L") { out = Hand::Left; return std::nullopt; }
    if (text == "R") { out = Hand::Right; return std::nullopt; }
    return fail(name, "expected L or R");
  };
  if (auto e = need_hand("pitcher_hand", ev.pitcher_hand)) return e;
  if (auto e = need_hand("batter_hand", ev.batter_hand)) return e;

  const auto outcome = parse_event_code(row.raw(column_id("outcome")));
  if (!outcome) return fail("outcome", "unknown event code");
  ev.outcome = *outcome;

  int runs = 0;
  if (auto e = need_int("runs_scored_on_play", 0, 4, runs)) return e;
  ev.runs_scored_on_play = runs;

  return std::nullopt;
}

}  // namespace

DemandZone classify_demand_zone(double demand_x, double demand_y, Hand batter_hand) {
  if (demand_x < 0 || demand_x > kCanvasWidthPx || demand_y < 0 ||
      demand_y > kCanvasHeightPx) {
    throw Error(ErrorCode::OutOfCanvas, "demand location outside 160x200 canvas");
  }
  // Mirror the x coordinate for left-handed batters; thresholds are
  // symmetric about the canvas midline (96 and 64 are equidistant from 80).
  const double x = (batter_hand == Hand::Right) ? demand_x : kCanvasWidthPx - demand_x;
  if (demand_y > kMaxZoneY) return DemandZone::Excluded;
  if (x >= kInsideXThreshold) return DemandZone::Inside;
  if (x <= kOutsideXThreshold) return DemandZone::Outside;
  return DemandZone::Excluded;
}

ParseResult parse_pitch_csv(const std::string& path, const ColumnMap& schema) {
  const CsvTable table = read_csv(path);

  std::vector<int> column_index(kEventColumns.size(), -1);
  for (std::size_t i = 0; i < kEventColumns.size(); ++i) {
    const std::string source = schema.source_column(kEventColumns[i]);
    column_index[i] = table.column(source);
    if (column_index[i] < 0 && i < kRequiredColumnCount) {
      throw Error(ErrorCode::MissingColumn, "missing column '" + source + "'");
    }
  }

  ParseResult result;
  result.events.reserve(table.rows.size());

  // (game, inning, half) of the previous accepted row, for the
  // pitch_seq_no monotonicity check.
  const PitchEvent* prev = nullptr;

  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    RowReader reader(table.rows[r], column_index);
    PitchEvent ev;
    const auto error = parse_row(reader, ev);
    const std::int64_t row_number = static_cast<std::int64_t>(r) + 1;
    if (error) {
      result.rejected.push_back({row_number, error->column, error->message});
      continue;
    }
    if (prev != nullptr && prev->game_id == ev.game_id &&
        prev->inning == ev.inning && prev->half == ev.half &&
        !is_pa_terminal(prev->outcome) && prev->batter_id == ev.batter_id &&
        ev.pitch_seq_no <= prev->pitch_seq_no) {
      result.rejected.push_back(
          {row_number, "pitch_seq_no", "not increasing within plate appearance"});
      continue;
    }
    result.events.push_back(std::move(ev));
    prev = &result.events.back();
  }
  return result;
}

PlayerCounts compute_player_counts(const std::vector<PitchEvent>& events) {
  PlayerCounts counts;
  for (const auto& ev : events) {
    if (!is_pa_terminal(ev.outcome)) continue;
    counts.batter_pa[ev.batter_id] += 1;
    counts.pitcher_tbf[ev.pitcher_id] += 1;
  }
  return counts;
}

std::vector<PitchEvent> filter_analysis_set(const std::vector<PitchEvent>& events,
                                            const FilterConfig& cfg,
                                            const PlayerCounts& counts,
                                            FilterReport* report) {
  cfg.validate();
  FilterReport local;
  local.input = static_cast<std::int64_t>(events.size());

  std::vector<PitchEvent> retained;
  for (const auto& ev : events) {
    if (!cfg.estimation_window.contains(ev.date)) {
      ++local.outside_estimation_window;
      continue;
    }
    if (!cfg.allows_pitch_type(ev.pitch_type)) {
      ++local.wrong_pitch_type;
      continue;
    }
    const auto batter = counts.batter_pa.find(ev.batter_id);
    if (batter == counts.batter_pa.end() || batter->second < cfg.min_batter_pa) {
      ++local.batter_below_min_pa;
      continue;
    }
    const auto pitcher = counts.pitcher_tbf.find(ev.pitcher_id);
    if (pitcher == counts.pitcher_tbf.end() || pitcher->second < cfg.min_pitcher_tbf) {
      ++local.pitcher_below_min_tbf;
      continue;
    }
    if (classify_demand_zone(ev.demand_x, ev.demand_y, ev.batter_hand) ==
        DemandZone::Excluded) {
      ++local.zone_excluded;
      continue;
    }
    retained.push_back(ev);
  }
  local.retained = static_cast<std::int64_t>(retained.size());
  if (report != nullptr) *report = local;
  return retained;
}

void write_events_csv(const std::string& path, const std::vector<PitchEvent>& events,
                      const MetaBlock& meta) {
  CsvWriter out;
  out.comment_block(meta.to_csv_comments());
  out.header({kEventColumns.begin(), kEventColumns.end()});
  for (const auto& ev : events) {
    std::vector<std::string> fields;
    fields.reserve(kEventColumns.size());
    fields.push_back(ev.game_id);
    fields.push_back(ev.date.to_string());
    fields.push_back(format_int(ev.inning));
    fields.push_back(ev.half == Half::Top ? "top" : "bottom");
    fields.push_back(ev.pitcher_id);
    fields.push_back(ev.batter_id);
    fields.push_back(ev.catcher_id);
    fields.push_back(format_int(ev.balls));
    fields.push_back(format_int(ev.strikes));
    fields.push_back(format_int(ev.outs));
    fields.push_back(ev.bases.first ? "1" : "0");
    fields.push_back(ev.bases.second ? "1" : "0");
    fields.push_back(ev.bases.third ? "1" : "0");
    fields.push_back(format_int(ev.run_diff));
    fields.push_back(format_int(ev.pitch_seq_no));
    fields.push_back(format_int(ev.pitcher_total_pitches));
    fields.push_back(ev.pitch_type == PitchType::FourSeam ? "four-seam" : "other");
    fields.push_back(ev.pitch_speed ? format_double(*ev.pitch_speed) : "");
    fields.push_back(format_double(ev.demand_x));
    fields.push_back(format_double(ev.demand_y));
    fields.push_back(ev.actual_x ? format_double(*ev.actual_x) : "");
    fields.push_back(ev.actual_y ? format_double(*ev.actual_y) : "");
    fields.push_back(ev.pitcher_hand == Hand::Left ? "L" : "R");
    fields.push_back(ev.batter_hand == Hand::Left ? "L" : "R");
    fields.push_back(std::string(event_code_name(ev.outcome)));
    fields.push_back(format_int(ev.runs_scored_on_play));
    fields.push_back(std::string(demand_zone_name(
        classify_demand_zone(ev.demand_x, ev.demand_y, ev.batter_hand))));
    out.row(fields);
  }
  out.save(path);
}

std::vector<PitchEvent> read_events_csv(const std::string& path) {
  ParseResult parsed = parse_pitch_csv(path);
  if (!parsed.rejected.empty()) {
    const auto& first = parsed.rejected.front();
    throw Error(ErrorCode::BadValue,
                path + " row " + format_int(first.row_number) + " column " +
                    first.column + ": " + first.message);
  }
  return std::move(parsed.events);
}

void write_rejected_csv(const std::string& path, const std::vector<RejectedRow>& rows,
                        const MetaBlock& meta) {
  CsvWriter out;
  out.comment_block(meta.to_csv_comments());
  out.header({"row_number", "column", "message"});
  for (const auto& row : rows) {
    out.row({format_int(row.row_number), row.column, row.message});
  }
  out.save(path);
}

}  // namespace pitcheval
