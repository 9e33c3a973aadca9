#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pitcheval/matrix.hpp"
#include "pitcheval/meta.hpp"
#include "pitcheval/propensity.hpp"

namespace pitcheval {

// Whether the IPW-adjusted ASAM uses weighted variances in the pooled scale
// or keeps the unweighted ones (the published figure does not say).
enum class WeightedAsamMode { WeightedVariance, UnweightedVariance };

// |mean(x_in) - mean(x_out)| / s with the n-weighted pooled scale
// s = sqrt((n_in s_in^2 + n_out s_out^2) / (n_in + n_out)) and population
// (divide-by-n) variances. With weights, means and variances are weighted
// and Kish effective sample sizes replace the group counts. Throws
// Error(EmptyGroup) / Error(Degenerate).
double asam(std::span<const double> x_in, std::span<const double> x_out,
            std::span<const double> w_in = {}, std::span<const double> w_out = {},
            WeightedAsamMode mode = WeightedAsamMode::WeightedVariance);

struct BalanceRow {
  std::string name;
  double asam_before = 0.0;
  double asam_after = 0.0;
  bool pass = false;        // asam_after < threshold
  bool degenerate = false;  // zero pooled variance
};

struct BalanceReport {
  std::vector<BalanceRow> rows;  // sorted by asam_before descending
  double threshold = 0.1;
};

// Per-feature ASAM before (unit weights) and after IPW weighting
// (z/p for treated, (1-z)/(1-p) for control).
BalanceReport balance_report(const FeatureMatrix& data, std::span<const double> p,
                             double threshold = 0.1,
                             WeightedAsamMode mode = WeightedAsamMode::WeightedVariance);

struct OverlapHistogram {
  std::vector<double> bin_edges;  // n_bins + 1 edges over [0,1]
  std::vector<double> density_treated;
  std::vector<double> density_control;
  std::vector<double> density_treated_weighted;
  std::vector<double> density_control_weighted;
};

// Normalized propensity densities per group, unweighted and IPW-weighted.
// Throws Error(EmptyGroup) when a group is empty.
OverlapHistogram overlap_histogram(std::span<const std::uint8_t> z,
                                   std::span<const double> p, int n_bins);

// L1 distance between two densities over the same edges.
double density_l1_distance(std::span<const double> a, std::span<const double> b,
                           std::span<const double> edges);

struct ImportanceEntry {
  std::string feature;
  double importance = 0.0;  // log-loss increase when the column is permuted
};

// Permutation importance against the model's log-loss, averaged over
// n_repeats shuffles per feature; sorted descending. Deterministic given
// the seed.
std::vector<ImportanceEntry> permutation_importance(const PropensityModel& model,
                                                    const FeatureMatrix& data,
                                                    int n_repeats, std::uint64_t seed,
                                                    int n_threads = 1);

void write_balance_csv(const std::string& path, const BalanceReport& report,
                       const MetaBlock& meta);
BalanceReport read_balance_csv(const std::string& path);

void write_overlap_csv(const std::string& path, const OverlapHistogram& hist,
                       const MetaBlock& meta);
OverlapHistogram read_overlap_csv(const std::string& path);

void write_importance_csv(const std::string& path,
                          const std::vector<ImportanceEntry>& entries,
                          const MetaBlock& meta);
std::vector<ImportanceEntry> read_importance_csv(const std::string& path);

}  // namespace pitcheval
