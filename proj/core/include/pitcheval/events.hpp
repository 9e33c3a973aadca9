#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pitcheval {

// Pitch and plate-appearance outcomes, on the run scale via the event value
// table. Strike and Ball are the only mid-plate-appearance codes; everything
// else ends the plate appearance.
enum class EventCode : std::uint8_t {
  Strike,
  Ball,
  Single,
  Double,
  Triple,
  HomeRun,
  FieldOut,
  DoublePlay,
  FoulFly,
  SwingingStrikeOut,
  CalledStrikeOut,
  UncaughtThirdStrike,
  Walk,
  HitByPitch,
  IntendedWalk,
  Bunt,
  BuntAndError,
  BuntStrikeOut,
  BuntAndFieldersChoice,
  SacrificeFly,
  SacrificeFlyAndError,
  FieldingError,
  FieldingInterference,
  BattingInterference,
  FoulLiner,
};

inline constexpr int kEventCodeCount = 25;

std::string_view event_code_name(EventCode code);
std::optional<EventCode> parse_event_code(std::string_view name);
bool is_pa_terminal(EventCode code);

enum class Hand : std::uint8_t { Left, Right };
enum class Half : std::uint8_t { Top, Bottom };
enum class PitchType : std::uint8_t { FourSeam, Other };

enum class DemandZone : std::uint8_t { Inside, Outside, Excluded };
std::string_view demand_zone_name(DemandZone zone);

// Calendar date; only comparisons and month-day window membership are needed.
struct Date {
  int year = 0;
  int month = 0;
  int day = 0;

  auto operator<=>(const Date&) const = default;
  std::string to_string() const;
  static std::optional<Date> parse(std::string_view iso);  // YYYY-MM-DD
};

// Month-day span, inclusive on both ends, applied within each season year.
struct MonthDayWindow {
  int start_month = 0;
  int start_day = 0;
  int end_month = 0;
  int end_day = 0;

  bool contains(const Date& date) const;
};

struct BaseOccupancy {
  bool first = false;
  bool second = false;
  bool third = false;

  int code() const { return (first ? 1 : 0) | (second ? 2 : 0) | (third ? 4 : 0); }
  bool operator==(const BaseOccupancy&) const = default;
};

// One of the 24 base-out states (3 out counts x 8 occupancies).
struct BaseOutState {
  int outs = 0;  // 0..2
  BaseOccupancy bases;

  int index() const { return outs * 8 + bases.code(); }
  static BaseOutState from_index(int index);
  bool operator==(const BaseOutState&) const = default;
};

inline constexpr int kBaseOutStateCount = 24;

// One pitch with its full game context. Field semantics: counts and bases
// describe the situation before the pitch; runs_scored_on_play are the runs
// that scored as a result of this pitch's event.
struct PitchEvent {
  std::string game_id;
  Date date;
  int inning = 1;
  Half half = Half::Top;
  std::string pitcher_id;
  std::string batter_id;
  std::string catcher_id;
  int balls = 0;    // 0..3
  int strikes = 0;  // 0..2
  int outs = 0;     // 0..2
  BaseOccupancy bases;
  int run_diff = 0;  // pitching team minus batting team
  int pitch_seq_no = 1;
  int pitcher_total_pitches = 1;
  PitchType pitch_type = PitchType::FourSeam;
  std::optional<double> pitch_speed;  // km/h
  double demand_x = 0.0;  // px, canvas [0,160]x[0,200]
  double demand_y = 0.0;
  std::optional<double> actual_x;
  std::optional<double> actual_y;
  Hand pitcher_hand = Hand::Right;
  Hand batter_hand = Hand::Right;
  EventCode outcome = EventCode::Strike;
  int runs_scored_on_play = 0;

  BaseOutState state() const { return BaseOutState{outs, bases}; }
};

inline constexpr double kCanvasWidthPx = 160.0;
inline constexpr double kCanvasHeightPx = 200.0;
// Canvas scale metadata: 160 x 200 px corresponds to 100 x 125 cm. Zone
// logic operates in px; the scale is carried for reporting only.
inline constexpr double kCanvasCmPerPx = 100.0 / 160.0;

// Filtering rules that produce the analysis set.
struct FilterConfig {
  MonthDayWindow feature_window{3, 1, 6, 30};     // March 1 - June 30
  MonthDayWindow estimation_window{7, 1, 9, 30};  // July 1 - September 30
  int min_batter_pa = 100;
  int min_pitcher_tbf = 100;
  std::vector<PitchType> pitch_types{PitchType::FourSeam};

  bool allows_pitch_type(PitchType t) const;
  void validate() const;  // windows disjoint, feature window first
};

// One base-out transition inside a half-inning. `after` is empty once the
// third out is recorded; run expectancy after an inning-ending event is 0.
struct InningEvent {
  BaseOutState before;
  std::optional<BaseOutState> after;
  EventCode outcome = EventCode::FieldOut;
  int runs_scored = 0;
};

struct HalfInning {
  std::string game_id;
  int inning = 1;
  Half half = Half::Top;
  int season = 0;
  std::vector<InningEvent> events;
};

}  // namespace pitcheval
