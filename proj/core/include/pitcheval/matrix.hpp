#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pitcheval/meta.hpp"

namespace pitcheval {

inline constexpr int kFeatureCount = 18;

// Canonical confounder names, in column order.
const std::array<std::string, kFeatureCount>& feature_names();
int feature_index(const std::string& name);  // -1 when unknown

// Unit-of-analysis matrix: one row per pitch with treatment flag z
// (1 = inside demand) and run-scale outcome y. Row-major storage.
struct FeatureMatrix {
  std::vector<std::string> names;     // d column names
  std::vector<std::int64_t> unit_id;  // n
  std::vector<double> x;              // n * d
  std::vector<std::uint8_t> z;        // n
  std::vector<double> y;              // n
  std::vector<std::string> game_id;   // optional cluster labels, empty or n

  std::size_t n() const { return z.size(); }
  std::size_t d() const { return names.size(); }

  std::span<const double> row(std::size_t i) const {
    return {x.data() + i * d(), d()};
  }
  double at(std::size_t i, std::size_t j) const { return x[i * d() + j]; }

  void reserve_rows(std::size_t n_rows);
  void push_row(std::int64_t id, std::span<const double> features, int z_value,
                double y_value);
};

FeatureMatrix make_canonical_matrix();

void write_matrix_csv(const std::string& path, const FeatureMatrix& matrix,
                      const MetaBlock& meta);
FeatureMatrix read_matrix_csv(const std::string& path);

}  // namespace pitcheval
