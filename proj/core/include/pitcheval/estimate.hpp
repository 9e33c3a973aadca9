#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pitcheval {

// Self-normalized (Hajek) IPW point estimate. tau is on the
// treated-minus-control convention: positive tau means inside demands yield
// higher run value. The outside-vs-inside effect reported alongside is -tau.
struct PointEstimate {
  double tau = 0.0;
  double ey1 = 0.0;
  double ey0 = 0.0;
};

// ey1 = sum(y*z/p) / sum(z/p), ey0 = sum(y*(1-z)/(1-p)) / sum((1-z)/(1-p)).
// Throws Error(NoTreated/NoControl) for one-group inputs and
// Error(PropensityOutOfRange) when any p is outside (0,1).
PointEstimate ipw_ate(std::span<const std::uint8_t> z, std::span<const double> y,
                      std::span<const double> p);

// Unnormalized Horvitz-Thompson form, exposed for diagnostics.
PointEstimate ipw_ate_horvitz_thompson(std::span<const std::uint8_t> z,
                                       std::span<const double> y,
                                       std::span<const double> p);

struct NaiveResult {
  double treated_minus_control = 0.0;  // mean(y|z=1) - mean(y|z=0)
  double outside_vs_inside = 0.0;      // mean(y|z=0) - mean(y|z=1)
  double mean_treated = 0.0;
  double mean_control = 0.0;
};

NaiveResult naive_diff(std::span<const std::uint8_t> z, std::span<const double> y);

// Kish effective sample sizes of the IPW weights, per group.
struct WeightDiagnostics {
  double ess_treated = 0.0;
  double ess_control = 0.0;
};

WeightDiagnostics weight_diagnostics(std::span<const std::uint8_t> z,
                                     std::span<const double> p);

struct BootstrapConfig {
  int n_replicates = 2000;
  double level = 0.99;
  std::uint64_t seed = 0;
  bool cluster_by_game = false;
};

struct AteResult {
  double tau_hat = 0.0;  // full-sample point estimate
  double ey1_hat = 0.0;
  double ey0_hat = 0.0;
  double ci_low = 0.0;  // normal approximation centered on the resample mean
  double ci_high = 0.0;
  double level = 0.99;
  double resample_mean = 0.0;
  double resample_sd = 0.0;
  std::int64_t n_treated = 0;
  std::int64_t n_control = 0;
  int n_bootstrap = 0;
  std::uint64_t seed = 0;
  std::int64_t n_redrawn = 0;
};

// Draws B resamples of size N with replacement (replicate k reads substream
// k of the seed), estimates tau on each, and builds the CI as
// m +/- z_{(1+level)/2} * s from the resample mean and sample standard
// deviation. Resamples on which the estimator fails are redrawn from
// subsequent substreams; more than a 10% redraw rate raises
// Error(TooFewValidResamples). When cluster labels are given, whole
// clusters are resampled.
AteResult bootstrap_ci(std::span<const std::uint8_t> z, std::span<const double> y,
                       std::span<const double> p, const BootstrapConfig& cfg,
                       const std::vector<std::string>* cluster_labels = nullptr,
                       int n_threads = 1);

struct StratumResult {
  std::string stratify_feature;
  double bin_lower = 0.0;  // -inf for the open left bin
  double bin_upper = 0.0;  // +inf for the open right bin
  std::int64_t n_units = 0;
  bool included = false;
  std::string reason;  // set when excluded
  AteResult ate;       // valid only when included
};

// Partitions units by a confounder into K+1 bins from K strictly increasing
// edges ((-inf,e0), [e0,e1), ..., [e_{K-1},inf)), then runs ipw_ate +
// bootstrap_ci inside each bin with the global propensities (no per-bin
// refit). Bins with fewer than min_n units are excluded with a reason.
// Throws Error(UnknownFeature) / Error(EmptyPartition).
std::vector<StratumResult> stratified_ate(std::span<const std::uint8_t> z,
                                          std::span<const double> y,
                                          std::span<const double> p,
                                          std::span<const double> feature_column,
                                          const std::string& feature_name,
                                          std::span<const double> bin_edges,
                                          std::int64_t min_n, const BootstrapConfig& cfg,
                                          int n_threads = 1);

}  // namespace pitcheval
