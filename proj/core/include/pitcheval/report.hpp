#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pitcheval/diagnostics.hpp"
#include "pitcheval/estimate.hpp"
#include "pitcheval/meta.hpp"

namespace pitcheval {

// Everything the estimate subcommand reports for one run.
struct EstimateReport {
  AteResult ate;
  NaiveResult naive;
  WeightDiagnostics ess;
  std::int64_t n = 0;
  std::int64_t clipped_count = 0;
  double epsilon = 0.01;
  std::optional<PointEstimate> horvitz_thompson;
};

std::string estimate_report_to_json(const EstimateReport& report, const MetaBlock& meta);
EstimateReport estimate_report_from_json(const std::string& text);

struct StratifyReport {
  std::string feature;
  std::vector<double> edges;
  std::int64_t min_n = 0;
  std::vector<StratumResult> strata;
};

std::string stratify_report_to_json(const StratifyReport& report, const MetaBlock& meta);
StratifyReport stratify_report_from_json(const std::string& text);

// Plot-friendly flat CSV of the strata.
void write_strata_csv(const std::string& path, const StratifyReport& report,
                      const MetaBlock& meta);

// Self-contained SVG charts.
std::string render_overlap_svg(const OverlapHistogram& hist);
std::string render_balance_svg(const BalanceReport& report);
std::string render_importance_svg(const std::vector<ImportanceEntry>& entries);
std::string render_strata_svg(const StratifyReport& report);

// Markdown summary of a results directory's artifacts. Sections without an
// input are omitted.
std::string render_summary_md(const EstimateReport* estimate, const BalanceReport* balance,
                              const StratifyReport* strata,
                              const std::vector<std::string>& figure_files);

}  // namespace pitcheval
