#include "pitcheval/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "pitcheval/error.hpp"
#include "pitcheval/mathutil.hpp"
#include "pitcheval/rng.hpp"
#include "pitcheval/threading.hpp"

namespace pitcheval {

namespace {

void check_groups(std::span<const std::uint8_t> z) {
  std::int64_t treated = 0;
  for (auto zi : z) treated += zi;
  if (treated == 0) throw Error(ErrorCode::NoTreated, "no treated units");
  if (treated == static_cast<std::int64_t>(z.size())) {
    throw Error(ErrorCode::NoControl, "no control units");
  }
}

void check_propensities(std::span<const double> p) {
  for (double pi : p) {
    if (!(pi > 0.0 && pi < 1.0)) {
      throw Error(ErrorCode::PropensityOutOfRange,
                  "propensity outside (0,1): " + std::to_string(pi));
    }
  }
}

}  // namespace

PointEstimate ipw_ate(std::span<const std::uint8_t> z, std::span<const double> y,
                      std::span<const double> p) {
  check_groups(z);
  check_propensities(p);
  double num1 = 0.0, den1 = 0.0, num0 = 0.0, den0 = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (z[i]) {
      const double w = 1.0 / p[i];
      num1 += y[i] * w;
      den1 += w;
    } else {
      const double w = 1.0 / (1.0 - p[i]);
      num0 += y[i] * w;
      den0 += w;
    }
  }
  PointEstimate est;
  est.ey1 = num1 / den1;
  est.ey0 = num0 / den0;
  est.tau = est.ey1 - est.ey0;
  return est;
}

PointEstimate ipw_ate_horvitz_thompson(std::span<const std::uint8_t> z,
                                       std::span<const double> y,
                                       std::span<const double> p) {
  check_groups(z);
  check_propensities(p);
  double sum1 = 0.0, sum0 = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (z[i]) sum1 += y[i] / p[i];
    else sum0 += y[i] / (1.0 - p[i]);
  }
  const double n = static_cast<double>(z.size());
  PointEstimate est;
  est.ey1 = sum1 / n;
  est.ey0 = sum0 / n;
  est.tau = est.ey1 - est.ey0;
  return est;
}

NaiveResult naive_diff(std::span<const std::uint8_t> z, std::span<const double> y) {
  check_groups(z);
  double sum1 = 0.0, sum0 = 0.0;
  std::int64_t n1 = 0, n0 = 0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (z[i]) {
      sum1 += y[i];
      ++n1;
    } else {
      sum0 += y[i];
      ++n0;
    }
  }
  NaiveResult result;
  result.mean_treated = sum1 / static_cast<double>(n1);
  result.mean_control = sum0 / static_cast<double>(n0);
  result.treated_minus_control = result.mean_treated - result.mean_control;
  result.outside_vs_inside = result.mean_control - result.mean_treated;
  return result;
}

WeightDiagnostics weight_diagnostics(std::span<const std::uint8_t> z,
                                     std::span<const double> p) {
  check_propensities(p);
  double sum1 = 0.0, sumsq1 = 0.0, sum0 = 0.0, sumsq0 = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (z[i]) {
      const double w = 1.0 / p[i];
      sum1 += w;
      sumsq1 += w * w;
    } else {
      const double w = 1.0 / (1.0 - p[i]);
      sum0 += w;
      sumsq0 += w * w;
    }
  }
  WeightDiagnostics d;
  d.ess_treated = sumsq1 > 0.0 ? sum1 * sum1 / sumsq1 : 0.0;
  d.ess_control = sumsq0 > 0.0 ? sum0 * sum0 / sumsq0 : 0.0;
  return d;
}

namespace {

// Hajek estimate of one resample identified by its substream index; the
// four weighted sums are accumulated directly without materializing the
// resample. Returns false when the resample lacks a group.
bool resample_tau(std::span<const std::uint8_t> z, std::span<const double> y,
                  std::span<const double> p,
                  const std::vector<std::vector<int>>* clusters, std::uint64_t seed,
                  std::uint64_t attempt, double& tau_out) {
  Rng rng = Rng::substream(seed, attempt);
  double num1 = 0.0, den1 = 0.0, num0 = 0.0, den0 = 0.0;
  auto add_unit = [&](std::size_t i) {
    if (z[i]) {
      const double w = 1.0 / p[i];
      num1 += y[i] * w;
      den1 += w;
    } else {
      const double w = 1.0 / (1.0 - p[i]);
      num0 += y[i] * w;
      den0 += w;
    }
  };
  if (clusters == nullptr) {
    const std::size_t n = z.size();
    for (std::size_t k = 0; k < n; ++k) add_unit(rng.below(n));
  } else {
    const std::size_t g = clusters->size();
    for (std::size_t k = 0; k < g; ++k) {
      for (int i : (*clusters)[rng.below(g)]) add_unit(static_cast<std::size_t>(i));
    }
  }
  if (den1 == 0.0 || den0 == 0.0) return false;
  tau_out = num1 / den1 - num0 / den0;
  return true;
}

}  // namespace

AteResult bootstrap_ci(std::span<const std::uint8_t> z, std::span<const double> y,
                       std::span<const double> p, const BootstrapConfig& cfg,
                       const std::vector<std::string>* cluster_labels, int n_threads) {
  if (cfg.n_replicates < 2) {
    throw Error(ErrorCode::InvalidConfig, "need at least 2 bootstrap replicates");
  }
  if (!(cfg.level > 0.0 && cfg.level < 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "confidence level must be in (0,1)");
  }
  const PointEstimate full = ipw_ate(z, y, p);

  std::vector<std::vector<int>> clusters;
  const std::vector<std::vector<int>>* cluster_ptr = nullptr;
  if (cfg.cluster_by_game) {
    if (cluster_labels == nullptr || cluster_labels->size() != z.size()) {
      throw Error(ErrorCode::InvalidConfig, "cluster bootstrap requires game labels");
    }
    std::map<std::string, int> ids;
    for (std::size_t i = 0; i < cluster_labels->size(); ++i) {
      const auto [it, inserted] =
          ids.try_emplace((*cluster_labels)[i], static_cast<int>(clusters.size()));
      if (inserted) clusters.emplace_back();
      clusters[static_cast<std::size_t>(it->second)].push_back(static_cast<int>(i));
    }
    cluster_ptr = &clusters;
  }

  const std::uint64_t budget =
      static_cast<std::uint64_t>(cfg.n_replicates) +
      static_cast<std::uint64_t>(cfg.n_replicates / 10) + 1;

  std::vector<double> taus;
  taus.reserve(static_cast<std::size_t>(cfg.n_replicates));
  std::vector<double> attempt_tau(budget, 0.0);
  std::vector<std::uint8_t> attempt_ok(budget, 0);

  // Attempts are evaluated in index blocks; the first n_replicates valid
  // attempts by index are kept, so threading cannot change the result.
  std::uint64_t next_attempt = 0;
  while (taus.size() < static_cast<std::size_t>(cfg.n_replicates) &&
         next_attempt < budget) {
    const std::uint64_t want =
        static_cast<std::uint64_t>(cfg.n_replicates) - taus.size();
    const std::uint64_t block_end = std::min(budget, next_attempt + want);
    const std::uint64_t block_begin = next_attempt;
    parallel_for(block_end - block_begin, n_threads, [&](std::size_t k) {
      const std::uint64_t attempt = block_begin + k;
      attempt_ok[attempt] = resample_tau(z, y, p, cluster_ptr, cfg.seed, attempt,
                                         attempt_tau[attempt])
                                ? 1
                                : 0;
    });
    for (std::uint64_t a = block_begin; a < block_end; ++a) {
      if (attempt_ok[a] && taus.size() < static_cast<std::size_t>(cfg.n_replicates)) {
        taus.push_back(attempt_tau[a]);
      }
    }
    next_attempt = block_end;
  }

  const std::int64_t redrawn =
      static_cast<std::int64_t>(next_attempt) - static_cast<std::int64_t>(taus.size());
  if (taus.size() < static_cast<std::size_t>(cfg.n_replicates)) {
    throw Error(ErrorCode::TooFewValidResamples,
                "more than 10% of bootstrap resamples lacked a treatment group");
  }

  const double m = mean(taus);
  double ss = 0.0;
  for (double t : taus) {
    const double d = t - m;
    ss += d * d;
  }
  const double sd = std::sqrt(ss / static_cast<double>(taus.size() - 1));
  const double quantile = normal_quantile(0.5 + cfg.level / 2.0);

  AteResult result;
  result.tau_hat = full.tau;
  result.ey1_hat = full.ey1;
  result.ey0_hat = full.ey0;
  result.resample_mean = m;
  result.resample_sd = sd;
  result.ci_low = m - quantile * sd;
  result.ci_high = m + quantile * sd;
  result.level = cfg.level;
  result.n_bootstrap = cfg.n_replicates;
  result.seed = cfg.seed;
  result.n_redrawn = redrawn;
  for (auto zi : z) {
    if (zi) ++result.n_treated;
    else ++result.n_control;
  }
  return result;
}

std::vector<StratumResult> stratified_ate(std::span<const std::uint8_t> z,
                                          std::span<const double> y,
                                          std::span<const double> p,
                                          std::span<const double> feature_column,
                                          const std::string& feature_name,
                                          std::span<const double> bin_edges,
                                          std::int64_t min_n, const BootstrapConfig& cfg,
                                          int n_threads) {
  if (feature_column.size() != z.size()) {
    throw Error(ErrorCode::UnknownFeature, "feature column size mismatch");
  }
  for (std::size_t e = 1; e < bin_edges.size(); ++e) {
    if (!(bin_edges[e - 1] < bin_edges[e])) {
      throw Error(ErrorCode::InvalidConfig, "bin edges must be strictly increasing");
    }
  }

  const std::size_t n_bins = bin_edges.size() + 1;
  std::vector<std::vector<int>> members(n_bins);
  for (std::size_t i = 0; i < z.size(); ++i) {
    std::size_t bin = 0;
    while (bin < bin_edges.size() && feature_column[i] >= bin_edges[bin]) ++bin;
    members[bin].push_back(static_cast<int>(i));
  }

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<StratumResult> results;
  std::int64_t included_bins = 0;
  for (std::size_t bin = 0; bin < n_bins; ++bin) {
    StratumResult stratum;
    stratum.stratify_feature = feature_name;
    stratum.bin_lower = bin == 0 ? -kInf : bin_edges[bin - 1];
    stratum.bin_upper = bin == bin_edges.size() ? kInf : bin_edges[bin];
    stratum.n_units = static_cast<std::int64_t>(members[bin].size());
    if (stratum.n_units < min_n) {
      stratum.included = false;
      stratum.reason = "insufficient sample";
      results.push_back(std::move(stratum));
      continue;
    }

    std::vector<std::uint8_t> zb;
    std::vector<double> yb, pb;
    zb.reserve(members[bin].size());
    yb.reserve(members[bin].size());
    pb.reserve(members[bin].size());
    for (int i : members[bin]) {
      const auto idx = static_cast<std::size_t>(i);
      zb.push_back(z[idx]);
      yb.push_back(y[idx]);
      pb.push_back(p[idx]);
    }

    BootstrapConfig bin_cfg = cfg;
    bin_cfg.cluster_by_game = false;
    bin_cfg.seed = Rng::substream(cfg.seed, bin).next();
    try {
      stratum.ate = bootstrap_ci(zb, yb, pb, bin_cfg, nullptr, n_threads);
      stratum.included = true;
      ++included_bins;
    } catch (const Error& e) {
      stratum.included = false;
      stratum.reason = e.what();
    }
    results.push_back(std::move(stratum));
  }

  if (included_bins == 0) {
    throw Error(ErrorCode::EmptyPartition, "no stratum reached the minimum sample size");
  }
  return results;
}

}  // namespace pitcheval
