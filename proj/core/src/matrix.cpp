#include "pitcheval/matrix.hpp"

#include "pitcheval/csv.hpp"
#include "pitcheval/error.hpp"

namespace pitcheval {

const std::array<std::string, kFeatureCount>& feature_names() {
  static const std::array<std::string, kFeatureCount> names = {
      "ball_count",
      "out_count",
      "runner_code",
      "run_diff",
      "same_hand",
      "total_pitch_in_game",
      "result_1_ago",
      "result_2_ago",
      "speed_1_ago",
      "speed_2_ago",
      "conf_inside_fast",
      "conf_inside_slow",
      "conf_fourseam_fast",
      "conf_fourseam_slow",
      "prev_batting_result",
      "pitcher_inside_ratio",
      "batter_inside_ratio",
      "batter_woba",
  };
  return names;
}

int feature_index(const std::string& name) {
  const auto& names = feature_names();
  for (int i = 0; i < kFeatureCount; ++i) {
    if (names[static_cast<std::size_t>(i)] == name) return i;
  }
  return -1;
}

void FeatureMatrix::reserve_rows(std::size_t n_rows) {
  unit_id.reserve(n_rows);
  x.reserve(n_rows * d());
  z.reserve(n_rows);
  y.reserve(n_rows);
}

void FeatureMatrix::push_row(std::int64_t id, std::span<const double> features,
                             int z_value, double y_value) {
  unit_id.push_back(id);
  x.insert(x.end(), features.begin(), features.end());
  z.push_back(static_cast<std::uint8_t>(z_value));
  y.push_back(y_value);
}

FeatureMatrix make_canonical_matrix() {
  FeatureMatrix m;
  m.names.assign(feature_names().begin(), feature_names().end());
  return m;
}

void write_matrix_csv(const std::string& path, const FeatureMatrix& matrix,
                      const MetaBlock& meta) {
  CsvWriter out;
  out.comment_block(meta.to_csv_comments());
  std::vector<std::string> header;
  header.push_back("unit_id");
  header.insert(header.end(), matrix.names.begin(), matrix.names.end());
  header.push_back("z");
  header.push_back("y");
  const bool with_games = !matrix.game_id.empty();
  if (with_games) header.push_back("game_id");
  out.header(header);

  const std::size_t d = matrix.d();
  for (std::size_t i = 0; i < matrix.n(); ++i) {
    std::vector<std::string> fields;
    fields.reserve(header.size());
    fields.push_back(format_int(matrix.unit_id[i]));
    for (std::size_t j = 0; j < d; ++j) fields.push_back(format_double(matrix.at(i, j)));
    fields.push_back(matrix.z[i] ? "1" : "0");
    fields.push_back(format_double(matrix.y[i]));
    if (with_games) fields.push_back(matrix.game_id[i]);
    out.row(fields);
  }
  out.save(path);
}

FeatureMatrix read_matrix_csv(const std::string& path) {
  const CsvTable csv = read_csv(path);

  const int c_unit = csv.column("unit_id");
  const int c_z = csv.column("z");
  const int c_y = csv.column("y");
  if (c_unit < 0) throw Error(ErrorCode::MissingColumn, "missing column 'unit_id'");
  if (c_z < 0) throw Error(ErrorCode::MissingColumn, "missing column 'z'");
  if (c_y < 0) throw Error(ErrorCode::MissingColumn, "missing column 'y'");

  FeatureMatrix matrix;
  std::vector<int> feature_cols;
  for (const auto& name : feature_names()) {
    const int c = csv.column(name);
    if (c < 0) throw Error(ErrorCode::MissingColumn, "missing column '" + name + "'");
    feature_cols.push_back(c);
    matrix.names.push_back(name);
  }
  const int c_game = csv.column("game_id");

  matrix.reserve_rows(csv.rows.size());
  for (std::size_t r = 0; r < csv.rows.size(); ++r) {
    const auto& row = csv.rows[r];
    const auto id = parse_int(row[static_cast<std::size_t>(c_unit)]);
    if (!id) throw Error(ErrorCode::BadValue, "bad unit_id at data row " + std::to_string(r + 1));
    std::array<double, kFeatureCount> values{};
    for (int j = 0; j < kFeatureCount; ++j) {
      const auto v = parse_double(row[static_cast<std::size_t>(feature_cols[static_cast<std::size_t>(j)])]);
      if (!v) {
        throw Error(ErrorCode::BadValue, "bad value in column '" +
                                             matrix.names[static_cast<std::size_t>(j)] +
                                             "' at data row " + std::to_string(r + 1));
      }
      values[static_cast<std::size_t>(j)] = *v;
    }
    const std::string& z_text = row[static_cast<std::size_t>(c_z)];
    if (z_text != "0" && z_text != "1") {
      throw Error(ErrorCode::BadValue, "z must be 0 or 1 at data row " + std::to_string(r + 1));
    }
    const auto y = parse_double(row[static_cast<std::size_t>(c_y)]);
    if (!y) throw Error(ErrorCode::BadValue, "bad y at data row " + std::to_string(r + 1));
    matrix.push_row(*id, values, z_text == "1" ? 1 : 0, *y);
    if (c_game >= 0) matrix.game_id.push_back(row[static_cast<std::size_t>(c_game)]);
  }
  return matrix;
}

}  // namespace pitcheval
