#include "pitcheval/valuation.hpp"

#include <nlohmann/json.hpp>

#include "pitcheval/csv.hpp"
#include "pitcheval/error.hpp"
#include "pitcheval/ingest.hpp"

namespace pitcheval {

RunExpectancyTable build_re_table(const std::vector<HalfInning>& innings) {
  std::array<double, kBaseOutStateCount> run_sum{};
  std::array<std::int64_t, kBaseOutStateCount> count{};

  for (const auto& inning : innings) {
    if (inning.events.empty() || inning.events.back().after.has_value()) {
      throw Error(ErrorCode::IncompleteInning,
                  "half-inning without a terminal third out (game " +
                      inning.game_id + ", inning " + std::to_string(inning.inning) +
                      ")");
    }
    // Runs from each event to the end of the half-inning, via a backward
    // suffix sum.
    double runs_to_end = 0.0;
    std::vector<double> suffix(inning.events.size());
    for (std::size_t i = inning.events.size(); i-- > 0;) {
      runs_to_end += inning.events[i].runs_scored;
      suffix[i] = runs_to_end;
    }
    for (std::size_t i = 0; i < inning.events.size(); ++i) {
      const int idx = inning.events[i].before.index();
      run_sum[static_cast<std::size_t>(idx)] += suffix[i];
      count[static_cast<std::size_t>(idx)] += 1;
    }
  }

  RunExpectancyTable table;
  for (int i = 0; i < kBaseOutStateCount; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    table.sample_n[idx] = count[idx];
    if (count[idx] > 0) {
      table.value[idx] = run_sum[idx] / static_cast<double>(count[idx]);
    } else {
      table.value[idx] = 0.0;
      const BaseOutState s = BaseOutState::from_index(i);
      table.warnings.push_back("state (outs=" + std::to_string(s.outs) + ", bases=" +
                               std::to_string(s.bases.code()) +
                               ") never observed; value set to 0");
    }
  }

  // Monotonicity in outs for fixed bases is expected of well-formed data.
  for (int bases = 0; bases < 8; ++bases) {
    for (int outs = 0; outs < 2; ++outs) {
      const auto lo = static_cast<std::size_t>(outs * 8 + bases);
      const auto hi = static_cast<std::size_t>((outs + 1) * 8 + bases);
      if (table.sample_n[lo] > 0 && table.sample_n[hi] > 0 &&
          table.value[hi] > table.value[lo]) {
        table.warnings.push_back("run expectancy increases from " +
                                 std::to_string(outs) + " to " +
                                 std::to_string(outs + 1) + " outs at bases code " +
                                 std::to_string(bases));
      }
    }
  }
  return table;
}

double delta_re(const BaseOutState& before, const std::optional<BaseOutState>& after,
                int runs_scored, const RunExpectancyTable& table,
                bool include_runs_on_play) {
  const double re_after = after ? table.at(*after) : 0.0;
  double delta = re_after - table.at(before);
  if (include_runs_on_play) delta += runs_scored;
  return delta;
}

EventValueTable build_event_value_table(
    const std::vector<std::pair<EventCode, double>>& occurrences) {
  std::map<EventCode, double> sums;
  EventValueTable table;
  for (const auto& [code, value] : occurrences) {
    sums[code] += value;
    table.sample_n[code] += 1;
  }
  for (const auto& [code, sum] : sums) {
    table.value[code] = sum / static_cast<double>(table.sample_n[code]);
  }
  const auto strike = table.value.find(EventCode::Strike);
  if (strike != table.value.end() && strike->second >= 0.0) {
    table.warnings.push_back("mean strike value is not negative");
  }
  const auto ball = table.value.find(EventCode::Ball);
  if (ball != table.value.end() && ball->second <= 0.0) {
    table.warnings.push_back("mean ball value is not positive");
  }
  return table;
}

std::vector<std::pair<EventCode, double>> delta_re_occurrences(
    const std::vector<HalfInning>& innings, const RunExpectancyTable& table,
    bool include_runs_on_play) {
  std::vector<std::pair<EventCode, double>> occurrences;
  for (const auto& inning : innings) {
    for (const auto& ev : inning.events) {
      occurrences.emplace_back(
          ev.outcome,
          delta_re(ev.before, ev.after, ev.runs_scored, table, include_runs_on_play));
    }
  }
  return occurrences;
}

std::vector<HalfInning> innings_from_pitch_events(const std::vector<PitchEvent>& events) {
  std::vector<HalfInning> innings;

  // Collect terminal events per half-inning in input order.
  struct Terminal {
    BaseOutState state;
    EventCode outcome;
    int runs;
  };
  std::vector<std::vector<Terminal>> groups;
  std::vector<HalfInning> heads;

  for (const auto& ev : events) {
    if (!is_pa_terminal(ev.outcome)) continue;
    const bool new_group = heads.empty() || heads.back().game_id != ev.game_id ||
                           heads.back().inning != ev.inning ||
                           heads.back().half != ev.half;
    if (new_group) {
      HalfInning head;
      head.game_id = ev.game_id;
      head.inning = ev.inning;
      head.half = ev.half;
      head.season = ev.date.year;
      heads.push_back(head);
      groups.emplace_back();
    }
    groups.back().push_back({ev.state(), ev.outcome, ev.runs_scored_on_play});
  }

  for (std::size_t g = 0; g < groups.size(); ++g) {
    HalfInning inning = heads[g];
    const auto& terminals = groups[g];
    for (std::size_t i = 0; i < terminals.size(); ++i) {
      InningEvent transition;
      transition.before = terminals[i].state;
      transition.outcome = terminals[i].outcome;
      transition.runs_scored = terminals[i].runs;
      if (i + 1 < terminals.size()) {
        transition.after = terminals[i + 1].state;
      }  // else: half-inning over
      inning.events.push_back(transition);
    }
    innings.push_back(std::move(inning));
  }
  return innings;
}

namespace {

const std::vector<std::string> kInningsHeader = {
    "game_id", "inning", "half", "season", "seq",
    "outs_before", "first_before", "second_before", "third_before",
    "event", "runs_scored",
    "outs_after", "first_after", "second_after", "third_after"};

}  // namespace

void write_innings_csv(const std::string& path, const std::vector<HalfInning>& innings,
                       const MetaBlock& meta) {
  CsvWriter out;
  out.comment_block(meta.to_csv_comments());
  out.header(kInningsHeader);
  for (const auto& inning : innings) {
    int seq = 1;
    for (const auto& ev : inning.events) {
      std::vector<std::string> fields;
      fields.push_back(inning.game_id);
      fields.push_back(format_int(inning.inning));
      fields.push_back(inning.half == Half::Top ? "top" : "bottom");
      fields.push_back(format_int(inning.season));
      fields.push_back(format_int(seq++));
      fields.push_back(format_int(ev.before.outs));
      fields.push_back(ev.before.bases.first ? "1" : "0");
      fields.push_back(ev.before.bases.second ? "1" : "0");
      fields.push_back(ev.before.bases.third ? "1" : "0");
      fields.push_back(std::string(event_code_name(ev.outcome)));
      fields.push_back(format_int(ev.runs_scored));
      if (ev.after) {
        fields.push_back(format_int(ev.after->outs));
        fields.push_back(ev.after->bases.first ? "1" : "0");
        fields.push_back(ev.after->bases.second ? "1" : "0");
        fields.push_back(ev.after->bases.third ? "1" : "0");
      } else {
        fields.push_back("3");
        fields.push_back("0");
        fields.push_back("0");
        fields.push_back("0");
      }
      out.row(fields);
    }
  }
  out.save(path);
}

std::vector<HalfInning> read_innings_csv(const std::string& path,
                                         std::optional<int> season_filter) {
  const CsvTable table = read_csv(path);
  std::vector<int> idx;
  for (const auto& name : kInningsHeader) {
    const int c = table.column(name);
    if (c < 0) throw Error(ErrorCode::MissingColumn, "missing column '" + name + "'");
    idx.push_back(c);
  }

  auto field = [&](const std::vector<std::string>& row, std::size_t i) -> const std::string& {
    return row[static_cast<std::size_t>(idx[i])];
  };
  auto to_int = [&](const std::string& text, const char* what) {
    const auto parsed = parse_int(text);
    if (!parsed) throw Error(ErrorCode::BadValue, std::string("bad ") + what + ": " + text);
    return static_cast<int>(*parsed);
  };

  std::vector<HalfInning> innings;
  for (const auto& row : table.rows) {
    const std::string& game = field(row, 0);
    const int inning_no = to_int(field(row, 1), "inning");
    const Half half = field(row, 2) == "top" ? Half::Top : Half::Bottom;
    const int season = to_int(field(row, 3), "season");
    if (season_filter && season != *season_filter) continue;

    const bool new_group = innings.empty() || innings.back().game_id != game ||
                           innings.back().inning != inning_no ||
                           innings.back().half != half;
    if (new_group) {
      HalfInning head;
      head.game_id = game;
      head.inning = inning_no;
      head.half = half;
      head.season = season;
      innings.push_back(head);
    }

    InningEvent ev;
    ev.before.outs = to_int(field(row, 5), "outs_before");
    ev.before.bases.first = field(row, 6) == "1";
    ev.before.bases.second = field(row, 7) == "1";
    ev.before.bases.third = field(row, 8) == "1";
    const auto outcome = parse_event_code(field(row, 9));
    if (!outcome) throw Error(ErrorCode::BadValue, "unknown event: " + field(row, 9));
    ev.outcome = *outcome;
    ev.runs_scored = to_int(field(row, 10), "runs_scored");
    const int outs_after = to_int(field(row, 11), "outs_after");
    if (outs_after < 3) {
      BaseOutState after;
      after.outs = outs_after;
      after.bases.first = field(row, 12) == "1";
      after.bases.second = field(row, 13) == "1";
      after.bases.third = field(row, 14) == "1";
      ev.after = after;
    }
    innings.back().events.push_back(ev);
  }
  return innings;
}

std::vector<HalfInning> read_innings_any(const std::string& path,
                                         std::optional<int> season_filter) {
  const CsvTable probe = read_csv(path);
  if (probe.column("outs_before") >= 0) {
    return read_innings_csv(path, season_filter);
  }
  std::vector<PitchEvent> events = read_events_csv(path);
  if (season_filter) {
    std::vector<PitchEvent> filtered;
    for (auto& ev : events) {
      if (ev.date.year == *season_filter) filtered.push_back(std::move(ev));
    }
    events = std::move(filtered);
  }
  return innings_from_pitch_events(events);
}

void write_re_table_csv(const std::string& path, const RunExpectancyTable& table,
                        const MetaBlock& meta) {
  CsvWriter out;
  out.comment_block(meta.to_csv_comments());
  out.header({"outs", "first", "second", "third", "value", "n"});
  for (int i = 0; i < kBaseOutStateCount; ++i) {
    const BaseOutState s = BaseOutState::from_index(i);
    out.row({format_int(s.outs), s.bases.first ? "1" : "0",
             s.bases.second ? "1" : "0", s.bases.third ? "1" : "0",
             format_double(table.value[static_cast<std::size_t>(i)]),
             format_int(table.sample_n[static_cast<std::size_t>(i)])});
  }
  out.save(path);
}

RunExpectancyTable read_re_table_csv(const std::string& path) {
  const CsvTable csv = read_csv(path);
  const int c_outs = csv.column("outs");
  const int c_first = csv.column("first");
  const int c_second = csv.column("second");
  const int c_third = csv.column("third");
  const int c_value = csv.column("value");
  const int c_n = csv.column("n");
  if (c_outs < 0 || c_first < 0 || c_second < 0 || c_third < 0 || c_value < 0 || c_n < 0) {
    throw Error(ErrorCode::MissingColumn, "run-expectancy table columns missing in " + path);
  }
  RunExpectancyTable table;
  std::array<bool, kBaseOutStateCount> seen{};
  for (const auto& row : csv.rows) {
    BaseOutState s;
    const auto outs = parse_int(row[static_cast<std::size_t>(c_outs)]);
    if (!outs || *outs < 0 || *outs > 2) throw Error(ErrorCode::BadValue, "bad outs");
    s.outs = static_cast<int>(*outs);
    s.bases.first = row[static_cast<std::size_t>(c_first)] == "1";
    s.bases.second = row[static_cast<std::size_t>(c_second)] == "1";
    s.bases.third = row[static_cast<std::size_t>(c_third)] == "1";
    const auto value = parse_double(row[static_cast<std::size_t>(c_value)]);
    const auto n = parse_int(row[static_cast<std::size_t>(c_n)]);
    if (!value || !n) throw Error(ErrorCode::BadValue, "bad table row");
    table.value[static_cast<std::size_t>(s.index())] = *value;
    table.sample_n[static_cast<std::size_t>(s.index())] = *n;
    seen[static_cast<std::size_t>(s.index())] = true;
  }
  for (int i = 0; i < kBaseOutStateCount; ++i) {
    if (!seen[static_cast<std::size_t>(i)]) {
      throw Error(ErrorCode::BadValue,
                  "run-expectancy table missing state index " + std::to_string(i));
    }
  }
  return table;
}

std::string re_table_to_json(const RunExpectancyTable& table, const MetaBlock& meta) {
  nlohmann::json j;
  j["meta"] = {{"tool_version", kToolVersion},
               {"format_version", kFormatVersion},
               {"config_hash", meta.config_hash}};
  auto& states = j["states"];
  states = nlohmann::json::array();
  for (int i = 0; i < kBaseOutStateCount; ++i) {
    const BaseOutState s = BaseOutState::from_index(i);
    states.push_back({{"outs", s.outs},
                      {"first", s.bases.first},
                      {"second", s.bases.second},
                      {"third", s.bases.third},
                      {"value", table.value[static_cast<std::size_t>(i)]},
                      {"n", table.sample_n[static_cast<std::size_t>(i)]}});
  }
  return j.dump(2) + "\n";
}

void write_event_values_csv(const std::string& path, const EventValueTable& table,
                            const MetaBlock& meta) {
  CsvWriter out;
  out.comment_block(meta.to_csv_comments());
  out.header({"event", "value", "n"});
  for (const auto& [code, value] : table.value) {
    out.row({std::string(event_code_name(code)), format_double(value),
             format_int(table.sample_n.at(code))});
  }
  out.save(path);
}

std::string event_values_to_json(const EventValueTable& table, const MetaBlock& meta) {
  nlohmann::json j;
  j["meta"] = {{"tool_version", kToolVersion},
               {"format_version", kFormatVersion},
               {"config_hash", meta.config_hash}};
  auto& events = j["events"];
  events = nlohmann::json::array();
  for (const auto& [code, value] : table.value) {
    events.push_back({{"event", event_code_name(code)},
                      {"value", value},
                      {"n", table.sample_n.at(code)}});
  }
  return j.dump(2) + "\n";
}

EventValueTable read_event_values_csv(const std::string& path) {
  const CsvTable csv = read_csv(path);
  const int c_event = csv.column("event");
  const int c_value = csv.column("value");
  const int c_n = csv.column("n");
  if (c_event < 0 || c_value < 0 || c_n < 0) {
    throw Error(ErrorCode::MissingColumn, "event value table columns missing in " + path);
  }
  EventValueTable table;
  for (const auto& row : csv.rows) {
    const auto code = parse_event_code(row[static_cast<std::size_t>(c_event)]);
    if (!code) throw Error(ErrorCode::BadValue, "unknown event code in " + path);
    const auto value = parse_double(row[static_cast<std::size_t>(c_value)]);
    const auto n = parse_int(row[static_cast<std::size_t>(c_n)]);
    if (!value || !n) throw Error(ErrorCode::BadValue, "bad event value row");
    table.value[*code] = *value;
    table.sample_n[*code] = *n;
  }
  return table;
}

}  // namespace pitcheval
