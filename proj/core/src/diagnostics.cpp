#include "pitcheval/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pitcheval/csv.hpp"
#include "pitcheval/error.hpp"
#include "pitcheval/mathutil.hpp"
#include "pitcheval/rng.hpp"
#include "pitcheval/threading.hpp"

namespace pitcheval {

double asam(std::span<const double> x_in, std::span<const double> x_out,
            std::span<const double> w_in, std::span<const double> w_out,
            WeightedAsamMode mode) {
  if (x_in.empty() || x_out.empty()) {
    throw Error(ErrorCode::EmptyGroup, "both groups must be nonempty");
  }
  const bool weighted = !w_in.empty() || !w_out.empty();
  if (weighted && (w_in.size() != x_in.size() || w_out.size() != x_out.size())) {
    throw Error(ErrorCode::InvalidConfig, "weight vectors must match group sizes");
  }

  double mean_in, mean_out, var_in, var_out, n_in, n_out;
  if (!weighted) {
    mean_in = mean(x_in);
    mean_out = mean(x_out);
    var_in = population_variance(x_in);
    var_out = population_variance(x_out);
    n_in = static_cast<double>(x_in.size());
    n_out = static_cast<double>(x_out.size());
  } else {
    mean_in = weighted_mean(x_in, w_in);
    mean_out = weighted_mean(x_out, w_out);
    if (mode == WeightedAsamMode::WeightedVariance) {
      var_in = weighted_population_variance(x_in, w_in);
      var_out = weighted_population_variance(x_out, w_out);
    } else {
      var_in = population_variance(x_in);
      var_out = population_variance(x_out);
    }
    n_in = effective_sample_size(w_in);
    n_out = effective_sample_size(w_out);
  }

  const double pooled = std::sqrt((n_in * var_in + n_out * var_out) / (n_in + n_out));
  if (!(pooled > 0.0)) {
    throw Error(ErrorCode::Degenerate, "zero pooled variance");
  }
  return std::fabs(mean_in - mean_out) / pooled;
}

BalanceReport balance_report(const FeatureMatrix& data, std::span<const double> p,
                             double threshold, WeightedAsamMode mode) {
  if (p.size() != data.n()) {
    throw Error(ErrorCode::InvalidConfig, "propensity vector does not match matrix");
  }

  std::vector<std::size_t> treated, control;
  for (std::size_t i = 0; i < data.n(); ++i) {
    (data.z[i] ? treated : control).push_back(i);
  }
  if (treated.empty() || control.empty()) {
    throw Error(ErrorCode::EmptyGroup, "both treatment groups required");
  }

  std::vector<double> w_in(treated.size()), w_out(control.size());
  for (std::size_t k = 0; k < treated.size(); ++k) w_in[k] = 1.0 / p[treated[k]];
  for (std::size_t k = 0; k < control.size(); ++k) w_out[k] = 1.0 / (1.0 - p[control[k]]);

  BalanceReport report;
  report.threshold = threshold;
  std::vector<double> x_in(treated.size()), x_out(control.size());
  for (std::size_t j = 0; j < data.d(); ++j) {
    for (std::size_t k = 0; k < treated.size(); ++k) x_in[k] = data.at(treated[k], j);
    for (std::size_t k = 0; k < control.size(); ++k) x_out[k] = data.at(control[k], j);

    BalanceRow row;
    row.name = data.names[j];
    try {
      row.asam_before = asam(x_in, x_out);
      row.asam_after = asam(x_in, x_out, w_in, w_out, mode);
      row.pass = row.asam_after < threshold;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Degenerate) throw;
      row.degenerate = true;
      row.asam_before = std::numeric_limits<double>::quiet_NaN();
      row.asam_after = std::numeric_limits<double>::quiet_NaN();
      row.pass = false;
    }
    report.rows.push_back(std::move(row));
  }

  std::stable_sort(report.rows.begin(), report.rows.end(),
                   [](const BalanceRow& a, const BalanceRow& b) {
                     const double av = std::isnan(a.asam_before) ? -1.0 : a.asam_before;
                     const double bv = std::isnan(b.asam_before) ? -1.0 : b.asam_before;
                     return av > bv;
                   });
  return report;
}

OverlapHistogram overlap_histogram(std::span<const std::uint8_t> z,
                                   std::span<const double> p, int n_bins) {
  if (n_bins < 2) throw Error(ErrorCode::InvalidConfig, "need at least 2 bins");

  OverlapHistogram hist;
  hist.bin_edges.resize(static_cast<std::size_t>(n_bins) + 1);
  for (int b = 0; b <= n_bins; ++b) {
    hist.bin_edges[static_cast<std::size_t>(b)] =
        static_cast<double>(b) / static_cast<double>(n_bins);
  }

  std::vector<double> count_t(static_cast<std::size_t>(n_bins), 0.0);
  std::vector<double> count_c(static_cast<std::size_t>(n_bins), 0.0);
  std::vector<double> wsum_t(static_cast<std::size_t>(n_bins), 0.0);
  std::vector<double> wsum_c(static_cast<std::size_t>(n_bins), 0.0);

  double n_t = 0.0, n_c = 0.0, w_t = 0.0, w_c = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    int bin = static_cast<int>(p[i] * n_bins);
    bin = std::clamp(bin, 0, n_bins - 1);
    const auto b = static_cast<std::size_t>(bin);
    if (z[i]) {
      const double w = 1.0 / p[i];
      count_t[b] += 1.0;
      wsum_t[b] += w;
      n_t += 1.0;
      w_t += w;
    } else {
      const double w = 1.0 / (1.0 - p[i]);
      count_c[b] += 1.0;
      wsum_c[b] += w;
      n_c += 1.0;
      w_c += w;
    }
  }
  if (n_t == 0.0 || n_c == 0.0) {
    throw Error(ErrorCode::EmptyGroup, "both treatment groups required");
  }

  const double width = 1.0 / static_cast<double>(n_bins);
  auto normalize = [&](const std::vector<double>& counts, double total) {
    std::vector<double> density(counts.size());
    for (std::size_t b = 0; b < counts.size(); ++b) density[b] = counts[b] / (total * width);
    return density;
  };
  hist.density_treated = normalize(count_t, n_t);
  hist.density_control = normalize(count_c, n_c);
  hist.density_treated_weighted = normalize(wsum_t, w_t);
  hist.density_control_weighted = normalize(wsum_c, w_c);
  return hist;
}

double density_l1_distance(std::span<const double> a, std::span<const double> b,
                           std::span<const double> edges) {
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    total += std::fabs(a[i] - b[i]) * (edges[i + 1] - edges[i]);
  }
  return total;
}

namespace {

double log_loss(std::span<const std::uint8_t> z, std::span<const double> p) {
  constexpr double kFloor = 1e-12;
  double total = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double pi = std::clamp(p[i], kFloor, 1.0 - kFloor);
    total += z[i] ? -std::log(pi) : -std::log(1.0 - pi);
  }
  return total / static_cast<double>(z.size());
}

}  // namespace

std::vector<ImportanceEntry> permutation_importance(const PropensityModel& model,
                                                    const FeatureMatrix& data,
                                                    int n_repeats, std::uint64_t seed,
                                                    int n_threads) {
  if (data.n() == 0) throw Error(ErrorCode::EmptyGroup, "no records");
  if (static_cast<int>(data.d()) != model.n_features) {
    throw Error(ErrorCode::DimensionMismatch, "matrix width does not match model");
  }
  if (n_repeats < 1) throw Error(ErrorCode::InvalidConfig, "n_repeats must be >= 1");

  const std::vector<double> baseline_p = predict_all(model, data, n_threads);
  const double baseline = log_loss(data.z, baseline_p);

  const std::size_t d = data.d();
  std::vector<double> importances(d, 0.0);

  parallel_for(d, n_threads, [&](std::size_t j) {
    FeatureMatrix shuffled = data;
    std::vector<double> column(data.n());
    double total = 0.0;
    for (int r = 0; r < n_repeats; ++r) {
      for (std::size_t i = 0; i < data.n(); ++i) column[i] = data.at(i, j);
      Rng rng = Rng::substream(seed, j * static_cast<std::size_t>(n_repeats) +
                                         static_cast<std::size_t>(r));
      rng.shuffle(column);
      for (std::size_t i = 0; i < data.n(); ++i) shuffled.x[i * d + j] = column[i];
      std::vector<double> p(data.n());
      for (std::size_t i = 0; i < data.n(); ++i) {
        p[i] = predict_propensity(model, shuffled.row(i));
      }
      total += log_loss(data.z, p) - baseline;
    }
    importances[j] = total / n_repeats;
  });

  std::vector<ImportanceEntry> entries;
  for (std::size_t j = 0; j < d; ++j) {
    entries.push_back({data.names[j], importances[j]});
  }
  std::stable_sort(entries.begin(), entries.end(),
                   [](const ImportanceEntry& a, const ImportanceEntry& b) {
                     return a.importance > b.importance;
                   });
  return entries;
}

void write_balance_csv(const std::string& path, const BalanceReport& report,
                       const MetaBlock& meta) {
  CsvWriter out;
  out.comment_block(meta.to_csv_comments());
  out.comment_block("# threshold: " + format_double(report.threshold) + "\n");
  out.header({"feature", "asam_before", "asam_after", "pass", "degenerate"});
  for (const auto& row : report.rows) {
    out.row({row.name, format_double(row.asam_before), format_double(row.asam_after),
             row.pass ? "1" : "0", row.degenerate ? "1" : "0"});
  }
  out.save(path);
}

BalanceReport read_balance_csv(const std::string& path) {
  const CsvTable csv = read_csv(path);
  const int c_name = csv.column("feature");
  const int c_before = csv.column("asam_before");
  const int c_after = csv.column("asam_after");
  const int c_pass = csv.column("pass");
  const int c_degen = csv.column("degenerate");
  if (c_name < 0 || c_before < 0 || c_after < 0 || c_pass < 0 || c_degen < 0) {
    throw Error(ErrorCode::MissingColumn, "balance report columns missing in " + path);
  }
  BalanceReport report;
  for (const auto& row : csv.rows) {
    BalanceRow r;
    r.name = row[static_cast<std::size_t>(c_name)];
    r.asam_before = parse_double(row[static_cast<std::size_t>(c_before)]).value_or(
        std::numeric_limits<double>::quiet_NaN());
    r.asam_after = parse_double(row[static_cast<std::size_t>(c_after)]).value_or(
        std::numeric_limits<double>::quiet_NaN());
    r.pass = row[static_cast<std::size_t>(c_pass)] == "1";
    r.degenerate = row[static_cast<std::size_t>(c_degen)] == "1";
    report.rows.push_back(std::move(r));
  }
  return report;
}

void write_overlap_csv(const std::string& path, const OverlapHistogram& hist,
                       const MetaBlock& meta) {
  CsvWriter out;
  out.comment_block(meta.to_csv_comments());
  out.header({"bin_low", "bin_high", "density_treated", "density_control",
              "density_treated_weighted", "density_control_weighted"});
  for (std::size_t b = 0; b + 1 < hist.bin_edges.size(); ++b) {
    out.row({format_double(hist.bin_edges[b]), format_double(hist.bin_edges[b + 1]),
             format_double(hist.density_treated[b]),
             format_double(hist.density_control[b]),
             format_double(hist.density_treated_weighted[b]),
             format_double(hist.density_control_weighted[b])});
  }
  out.save(path);
}

OverlapHistogram read_overlap_csv(const std::string& path) {
  const CsvTable csv = read_csv(path);
  const int c_lo = csv.column("bin_low");
  const int c_hi = csv.column("bin_high");
  const int c_t = csv.column("density_treated");
  const int c_c = csv.column("density_control");
  const int c_tw = csv.column("density_treated_weighted");
  const int c_cw = csv.column("density_control_weighted");
  if (c_lo < 0 || c_hi < 0 || c_t < 0 || c_c < 0 || c_tw < 0 || c_cw < 0) {
    throw Error(ErrorCode::MissingColumn, "overlap columns missing in " + path);
  }
  OverlapHistogram hist;
  auto value = [](const std::string& text) {
    const auto parsed = parse_double(text);
    if (!parsed) throw Error(ErrorCode::BadValue, "bad overlap value");
    return *parsed;
  };
  for (const auto& row : csv.rows) {
    if (hist.bin_edges.empty()) {
      hist.bin_edges.push_back(value(row[static_cast<std::size_t>(c_lo)]));
    }
    hist.bin_edges.push_back(value(row[static_cast<std::size_t>(c_hi)]));
    hist.density_treated.push_back(value(row[static_cast<std::size_t>(c_t)]));
    hist.density_control.push_back(value(row[static_cast<std::size_t>(c_c)]));
    hist.density_treated_weighted.push_back(value(row[static_cast<std::size_t>(c_tw)]));
    hist.density_control_weighted.push_back(value(row[static_cast<std::size_t>(c_cw)]));
  }
  return hist;
}

void write_importance_csv(const std::string& path,
                          const std::vector<ImportanceEntry>& entries,
                          const MetaBlock& meta) {
  CsvWriter out;
  out.comment_block(meta.to_csv_comments());
  out.header({"feature", "importance"});
  for (const auto& entry : entries) {
    out.row({entry.feature, format_double(entry.importance)});
  }
  out.save(path);
}

std::vector<ImportanceEntry> read_importance_csv(const std::string& path) {
  const CsvTable csv = read_csv(path);
  const int c_feature = csv.column("feature");
  const int c_importance = csv.column("importance");
  if (c_feature < 0 || c_importance < 0) {
    throw Error(ErrorCode::MissingColumn, "importance columns missing in " + path);
  }
  std::vector<ImportanceEntry> entries;
  for (const auto& row : csv.rows) {
    const auto value = parse_double(row[static_cast<std::size_t>(c_importance)]);
    if (!value) throw Error(ErrorCode::BadValue, "bad importance value");
    entries.push_back({row[static_cast<std::size_t>(c_feature)], *value});
  }
  return entries;
}

}  // namespace pitcheval
