#include "pitcheval/events.hpp"

#include <algorithm>
#include <charconv>

#include "pitcheval/error.hpp"

namespace pitcheval {

namespace {

struct EventName {
  EventCode code;
  std::string_view name;
};

constexpr std::array<EventName, kEventCodeCount> kEventNames{{
    {EventCode::Strike, "strike"},
    {EventCode::Ball, "ball"},
    {EventCode::Single, "single"},
    {EventCode::Double, "double"},
    {EventCode::Triple, "triple"},
    {EventCode::HomeRun, "home_run"},
    {EventCode::FieldOut, "field_out"},
    {EventCode::DoublePlay, "double_play"},
    {EventCode::FoulFly, "foul_fly"},
    {EventCode::SwingingStrikeOut, "swinging_strike_out"},
    {EventCode::CalledStrikeOut, "called_strike_out"},
    {EventCode::UncaughtThirdStrike, "uncaught_third_strike"},
    {EventCode::Walk, "walk"},
    {EventCode::HitByPitch, "hit_by_pitch"},
    {EventCode::IntendedWalk, "intended_walk"},
    {EventCode::Bunt, "bunt"},
    {EventCode::BuntAndError, "bunt_and_error"},
    {EventCode::BuntStrikeOut, "bunt_strike_out"},
    {EventCode::BuntAndFieldersChoice, "bunt_and_fielders_choice"},
    {EventCode::SacrificeFly, "sacrifice_fly"},
    {EventCode::SacrificeFlyAndError, "sacrifice_fly_and_error"},
    {EventCode::FieldingError, "error"},
    {EventCode::FieldingInterference, "fielding_interference"},
    {EventCode::BattingInterference, "batting_interference"},
    {EventCode::FoulLiner, "foul_liner"},
}};

}  // namespace

std::string_view event_code_name(EventCode code) {
  for (const auto& entry : kEventNames) {
    if (entry.code == code) return entry.name;
  }
  return "unknown";
}

std::optional<EventCode> parse_event_code(std::string_view name) {
  for (const auto& entry : kEventNames) {
    if (entry.name == name) return entry.code;
  }
  return std::nullopt;
}

bool is_pa_terminal(EventCode code) {
  return code != EventCode::Strike && code != EventCode::Ball;
}

std::string_view demand_zone_name(DemandZone zone) {
  switch (zone) {
    case DemandZone::Inside: return "inside";
    case DemandZone::Outside: return "outside";
    case DemandZone::Excluded: return "excluded";
  }
  return "excluded";
}

std::string Date::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
  return buf;
}

std::optional<Date> Date::parse(std::string_view iso) {
  if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') return std::nullopt;
  auto parse_part = [&](int begin, int len, int& out) {
    const char* p = iso.data() + begin;
    const auto result = std::from_chars(p, p + len, out);
    return result.ec == std::errc() && result.ptr == p + len;
  };
  Date d;
  if (!parse_part(0, 4, d.year) || !parse_part(5, 2, d.month) ||
      !parse_part(8, 2, d.day)) {
    return std::nullopt;
  }
  if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > 31) return std::nullopt;
  return d;
}

bool MonthDayWindow::contains(const Date& date) const {
  const int md = date.month * 100 + date.day;
  return md >= start_month * 100 + start_day && md <= end_month * 100 + end_day;
}

BaseOutState BaseOutState::from_index(int index) {
  BaseOutState s;
  s.outs = index / 8;
  const int code = index % 8;
  s.bases.first = (code & 1) != 0;
  s.bases.second = (code & 2) != 0;
  s.bases.third = (code & 4) != 0;
  return s;
}

bool FilterConfig::allows_pitch_type(PitchType t) const {
  return std::find(pitch_types.begin(), pitch_types.end(), t) != pitch_types.end();
}

void FilterConfig::validate() const {
  const int feature_end = feature_window.end_month * 100 + feature_window.end_day;
  const int est_start =
      estimation_window.start_month * 100 + estimation_window.start_day;
  if (feature_end >= est_start) {
    throw Error(ErrorCode::InvalidConfig,
                "feature window must end before the estimation window starts");
  }
  if (min_batter_pa < 0 || min_pitcher_tbf < 0) {
    throw Error(ErrorCode::InvalidConfig, "minimum PA/TBF must be non-negative");
  }
  if (pitch_types.empty()) {
    throw Error(ErrorCode::InvalidConfig, "at least one pitch type required");
  }
}

}  // namespace pitcheval
