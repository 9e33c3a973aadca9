#include "pitcheval/report.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "pitcheval/csv.hpp"
#include "pitcheval/error.hpp"

namespace pitcheval {

namespace {

nlohmann::json ate_to_json(const AteResult& ate) {
  return {{"tau", ate.tau_hat},
          {"ey1", ate.ey1_hat},
          {"ey0", ate.ey0_hat},
          {"ci_low", ate.ci_low},
          {"ci_high", ate.ci_high},
          {"level", ate.level},
          {"resample_mean", ate.resample_mean},
          {"resample_sd", ate.resample_sd},
          {"n_treated", ate.n_treated},
          {"n_control", ate.n_control},
          {"n_bootstrap", ate.n_bootstrap},
          {"seed", ate.seed},
          {"n_redrawn", ate.n_redrawn}};
}

AteResult ate_from_json(const nlohmann::json& j) {
  AteResult ate;
  ate.tau_hat = j.at("tau").get<double>();
  ate.ey1_hat = j.at("ey1").get<double>();
  ate.ey0_hat = j.at("ey0").get<double>();
  ate.ci_low = j.at("ci_low").get<double>();
  ate.ci_high = j.at("ci_high").get<double>();
  ate.level = j.at("level").get<double>();
  ate.resample_mean = j.at("resample_mean").get<double>();
  ate.resample_sd = j.at("resample_sd").get<double>();
  ate.n_treated = j.at("n_treated").get<std::int64_t>();
  ate.n_control = j.at("n_control").get<std::int64_t>();
  ate.n_bootstrap = j.at("n_bootstrap").get<int>();
  ate.seed = j.at("seed").get<std::uint64_t>();
  ate.n_redrawn = j.at("n_redrawn").get<std::int64_t>();
  return ate;
}

nlohmann::json meta_to_json(const MetaBlock& meta) {
  nlohmann::json j;
  j["tool_version"] = kToolVersion;
  j["format_version"] = kFormatVersion;
  j["config_hash"] = meta.config_hash;
  if (meta.has_seed) j["seed"] = meta.seed;
  auto& inputs = j["inputs"];
  inputs = nlohmann::json::array();
  for (const auto& [path, hash] : meta.input_hashes) {
    inputs.push_back({{"path", path}, {"hash", hash}});
  }
  return j;
}

}  // namespace

std::string estimate_report_to_json(const EstimateReport& report, const MetaBlock& meta) {
  nlohmann::json j;
  j["meta"] = meta_to_json(meta);
  j["ate"] = ate_to_json(report.ate);
  // Mirrored convention: positive means the outside demand lowers run value
  // relative to inside.
  j["outside_vs_inside"] = {{"tau", -report.ate.tau_hat},
                            {"ci_low", -report.ate.ci_high},
                            {"ci_high", -report.ate.ci_low}};
  j["naive"] = {{"treated_minus_control", report.naive.treated_minus_control},
                {"outside_vs_inside", report.naive.outside_vs_inside},
                {"mean_treated", report.naive.mean_treated},
                {"mean_control", report.naive.mean_control}};
  j["ess_treated"] = report.ess.ess_treated;
  j["ess_control"] = report.ess.ess_control;
  j["n"] = report.n;
  j["clipped_count"] = report.clipped_count;
  j["epsilon"] = report.epsilon;
  if (report.horvitz_thompson) {
    j["horvitz_thompson"] = {{"tau", report.horvitz_thompson->tau},
                             {"ey1", report.horvitz_thompson->ey1},
                             {"ey0", report.horvitz_thompson->ey0}};
  } else {
    j["horvitz_thompson"] = nullptr;
  }
  return j.dump(2) + "\n";
}

EstimateReport estimate_report_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  EstimateReport report;
  report.ate = ate_from_json(j.at("ate"));
  report.naive.treated_minus_control = j.at("naive").at("treated_minus_control").get<double>();
  report.naive.outside_vs_inside = j.at("naive").at("outside_vs_inside").get<double>();
  report.naive.mean_treated = j.at("naive").at("mean_treated").get<double>();
  report.naive.mean_control = j.at("naive").at("mean_control").get<double>();
  report.ess.ess_treated = j.at("ess_treated").get<double>();
  report.ess.ess_control = j.at("ess_control").get<double>();
  report.n = j.at("n").get<std::int64_t>();
  report.clipped_count = j.at("clipped_count").get<std::int64_t>();
  report.epsilon = j.at("epsilon").get<double>();
  if (!j.at("horvitz_thompson").is_null()) {
    PointEstimate ht;
    ht.tau = j.at("horvitz_thompson").at("tau").get<double>();
    ht.ey1 = j.at("horvitz_thompson").at("ey1").get<double>();
    ht.ey0 = j.at("horvitz_thompson").at("ey0").get<double>();
    report.horvitz_thompson = ht;
  }
  return report;
}

std::string stratify_report_to_json(const StratifyReport& report, const MetaBlock& meta) {
  nlohmann::json j;
  j["meta"] = meta_to_json(meta);
  j["feature"] = report.feature;
  j["edges"] = report.edges;
  j["min_n"] = report.min_n;
  auto& strata = j["strata"];
  strata = nlohmann::json::array();
  for (const auto& stratum : report.strata) {
    nlohmann::json s;
    s["feature"] = stratum.stratify_feature;
    s["bin_lower"] = std::isinf(stratum.bin_lower)
                         ? nlohmann::json(nullptr)
                         : nlohmann::json(stratum.bin_lower);
    s["bin_upper"] = std::isinf(stratum.bin_upper)
                         ? nlohmann::json(nullptr)
                         : nlohmann::json(stratum.bin_upper);
    s["n_units"] = stratum.n_units;
    s["included"] = stratum.included;
    if (stratum.included) {
      s["ate"] = ate_to_json(stratum.ate);
    } else {
      s["reason"] = stratum.reason;
    }
    strata.push_back(std::move(s));
  }
  return j.dump(2) + "\n";
}

StratifyReport stratify_report_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  StratifyReport report;
  report.feature = j.at("feature").get<std::string>();
  report.edges = j.at("edges").get<std::vector<double>>();
  report.min_n = j.at("min_n").get<std::int64_t>();
  for (const auto& s : j.at("strata")) {
    StratumResult stratum;
    stratum.stratify_feature = s.at("feature").get<std::string>();
    stratum.bin_lower = s.at("bin_lower").is_null()
                            ? -std::numeric_limits<double>::infinity()
                            : s.at("bin_lower").get<double>();
    stratum.bin_upper = s.at("bin_upper").is_null()
                            ? std::numeric_limits<double>::infinity()
                            : s.at("bin_upper").get<double>();
    stratum.n_units = s.at("n_units").get<std::int64_t>();
    stratum.included = s.at("included").get<bool>();
    if (stratum.included) {
      stratum.ate = ate_from_json(s.at("ate"));
    } else {
      stratum.reason = s.value("reason", "");
    }
    report.strata.push_back(std::move(stratum));
  }
  return report;
}

void write_strata_csv(const std::string& path, const StratifyReport& report,
                      const MetaBlock& meta) {
  CsvWriter out;
  out.comment_block(meta.to_csv_comments());
  out.header({"feature", "bin_index", "bin_lower", "bin_upper", "n_units", "included",
              "reason", "tau", "ci_low", "ci_high", "outside_vs_inside"});
  for (std::size_t b = 0; b < report.strata.size(); ++b) {
    const auto& s = report.strata[b];
    std::vector<std::string> fields = {
        s.stratify_feature,
        format_int(static_cast<std::int64_t>(b)),
        format_double(s.bin_lower),
        format_double(s.bin_upper),
        format_int(s.n_units),
        s.included ? "1" : "0",
        s.reason,
    };
    if (s.included) {
      fields.push_back(format_double(s.ate.tau_hat));
      fields.push_back(format_double(s.ate.ci_low));
      fields.push_back(format_double(s.ate.ci_high));
      fields.push_back(format_double(-s.ate.tau_hat));
    } else {
      fields.insert(fields.end(), {"", "", "", ""});
    }
    out.row(fields);
  }
  out.save(path);
}

namespace {

// Minimal plotting helpers; everything is emitted as one self-contained
// <svg> element with inline styling.
class SvgCanvas {
 public:
  SvgCanvas(double width, double height) : width_(width), height_(height) {
    body_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
          << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " "
          << height << "\">\n";
    body_ << "<rect width=\"" << width << "\" height=\"" << height
          << "\" fill=\"white\"/>\n";
  }

  void line(double x1, double y1, double x2, double y2, const std::string& color,
            double stroke = 1.0, bool dashed = false) {
    body_ << "<line x1=\"" << x1 << "\" y1=\"" << y1 << "\" x2=\"" << x2 << "\" y2=\""
          << y2 << "\" stroke=\"" << color << "\" stroke-width=\"" << stroke << "\"";
    if (dashed) body_ << " stroke-dasharray=\"4 3\"";
    body_ << "/>\n";
  }

  void polyline(const std::vector<std::pair<double, double>>& points,
                const std::string& color, double stroke = 1.5) {
    body_ << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\""
          << stroke << "\" points=\"";
    for (const auto& [x, y] : points) body_ << x << "," << y << " ";
    body_ << "\"/>\n";
  }

  void circle(double x, double y, double r, const std::string& color) {
    body_ << "<circle cx=\"" << x << "\" cy=\"" << y << "\" r=\"" << r << "\" fill=\""
          << color << "\"/>\n";
  }

  void rect(double x, double y, double w, double h, const std::string& color) {
    body_ << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << w
          << "\" height=\"" << h << "\" fill=\"" << color << "\"/>\n";
  }

  void text(double x, double y, const std::string& content, int size = 11,
            const std::string& anchor = "start", const std::string& color = "#333") {
    body_ << "<text x=\"" << x << "\" y=\"" << y << "\" font-size=\"" << size
          << "\" font-family=\"sans-serif\" text-anchor=\"" << anchor
          << "\" fill=\"" << color << "\">" << escape(content) << "</text>\n";
  }

  std::string finish() {
    body_ << "</svg>\n";
    return body_.str();
  }

 private:
  static std::string escape(const std::string& text) {
    std::string out;
    for (char c : text) {
      if (c == '<') out += "&lt;";
      else if (c == '>') out += "&gt;";
      else if (c == '&') out += "&amp;";
      else out.push_back(c);
    }
    return out;
  }

  double width_;
  double height_;
  std::ostringstream body_;
};

constexpr const char* kTreatedColor = "#d62728";
constexpr const char* kControlColor = "#1f77b4";

std::string short_number(double value) {
  std::ostringstream out;
  out.precision(4);
  out << value;
  return out.str();
}

void draw_density_panel(SvgCanvas& svg, double x0, double y0, double w, double h,
                        const std::vector<double>& edges,
                        const std::vector<double>& treated,
                        const std::vector<double>& control, const std::string& title) {
  double max_density = 1e-9;
  for (double v : treated) max_density = std::max(max_density, v);
  for (double v : control) max_density = std::max(max_density, v);

  auto to_x = [&](double p) { return x0 + p * w; };
  auto to_y = [&](double d) { return y0 + h - d / max_density * (h - 14.0); };

  svg.line(x0, y0 + h, x0 + w, y0 + h, "#777");
  svg.line(x0, y0, x0, y0 + h, "#777");
  svg.text(x0 + w / 2, y0 - 6, title, 12, "middle");
  svg.text(x0, y0 + h + 14, "0", 10, "middle");
  svg.text(x0 + w, y0 + h + 14, "1", 10, "middle");
  svg.text(x0 + w / 2, y0 + h + 14, "propensity", 10, "middle");

  auto step_points = [&](const std::vector<double>& density) {
    std::vector<std::pair<double, double>> points;
    for (std::size_t b = 0; b < density.size(); ++b) {
      points.emplace_back(to_x(edges[b]), to_y(density[b]));
      points.emplace_back(to_x(edges[b + 1]), to_y(density[b]));
    }
    return points;
  };
  svg.polyline(step_points(treated), kTreatedColor);
  svg.polyline(step_points(control), kControlColor);
}

}  // namespace

std::string render_overlap_svg(const OverlapHistogram& hist) {
  SvgCanvas svg(760, 300);
  draw_density_panel(svg, 50, 40, 300, 210, hist.bin_edges, hist.density_treated,
                     hist.density_control, "raw");
  draw_density_panel(svg, 420, 40, 300, 210, hist.bin_edges,
                     hist.density_treated_weighted, hist.density_control_weighted,
                     "IPW weighted");
  svg.circle(50, 285, 4, kTreatedColor);
  svg.text(60, 289, "inside (treated)");
  svg.circle(190, 285, 4, kControlColor);
  svg.text(200, 289, "outside (control)");
  return svg.finish();
}

std::string render_balance_svg(const BalanceReport& report) {
  const double row_height = 18.0;
  const double top = 40.0;
  const double left = 170.0;
  const double plot_width = 420.0;
  const double height = top + row_height * static_cast<double>(report.rows.size()) + 50.0;
  SvgCanvas svg(left + plot_width + 40.0, height);

  double max_asam = report.threshold * 1.5;
  for (const auto& row : report.rows) {
    if (!row.degenerate) {
      max_asam = std::max({max_asam, row.asam_before, row.asam_after});
    }
  }
  auto to_x = [&](double v) { return left + v / max_asam * plot_width; };

  svg.text(left + plot_width / 2, 20, "standardized mean difference", 12, "middle");
  svg.line(to_x(report.threshold), top - 8, to_x(report.threshold),
           height - 40, "#999", 1.0, true);
  svg.text(to_x(report.threshold), height - 26, short_number(report.threshold), 10,
           "middle");
  svg.line(left, height - 40, left + plot_width, height - 40, "#777");
  svg.text(left, height - 26, "0", 10, "middle");
  svg.text(left + plot_width, height - 26, short_number(max_asam), 10, "middle");

  for (std::size_t r = 0; r < report.rows.size(); ++r) {
    const auto& row = report.rows[r];
    const double y = top + row_height * static_cast<double>(r) + row_height / 2;
    svg.text(left - 8, y + 4, row.name, 10, "end");
    if (row.degenerate) {
      svg.text(left + 4, y + 4, "degenerate", 10, "start", "#999");
      continue;
    }
    svg.line(left, y, left + plot_width, y, "#eee");
    svg.circle(to_x(std::min(row.asam_before, max_asam)), y, 4, kTreatedColor);
    svg.circle(to_x(std::min(row.asam_after, max_asam)), y, 4, kControlColor);
  }
  svg.circle(left, height - 12, 4, kTreatedColor);
  svg.text(left + 10, height - 8, "before");
  svg.circle(left + 90, height - 12, 4, kControlColor);
  svg.text(left + 100, height - 8, "after IPW");
  return svg.finish();
}

std::string render_importance_svg(const std::vector<ImportanceEntry>& entries) {
  const double row_height = 18.0;
  const double top = 40.0;
  const double left = 170.0;
  const double plot_width = 420.0;
  const double height = top + row_height * static_cast<double>(entries.size()) + 30.0;
  SvgCanvas svg(left + plot_width + 40.0, height);

  double max_importance = 1e-9;
  for (const auto& entry : entries) {
    max_importance = std::max(max_importance, entry.importance);
  }
  svg.text(left + plot_width / 2, 20, "permutation importance (log-loss increase)", 12,
           "middle");
  for (std::size_t r = 0; r < entries.size(); ++r) {
    const double y = top + row_height * static_cast<double>(r);
    svg.text(left - 8, y + 12, entries[r].feature, 10, "end");
    const double w =
        std::max(0.0, entries[r].importance) / max_importance * plot_width;
    svg.rect(left, y + 3, w, row_height - 7, kControlColor);
  }
  return svg.finish();
}

std::string render_strata_svg(const StratifyReport& report) {
  std::vector<const StratumResult*> included;
  for (const auto& stratum : report.strata) {
    if (stratum.included) included.push_back(&stratum);
  }
  const double width = 640.0;
  const double height = 330.0;
  SvgCanvas svg(width, height);
  if (included.empty()) {
    svg.text(width / 2, height / 2, "no stratum reached the minimum sample size", 12,
             "middle");
    return svg.finish();
  }

  double lo = 0.0, hi = 0.0;
  for (const auto* stratum : included) {
    lo = std::min(lo, stratum->ate.ci_low);
    hi = std::max(hi, stratum->ate.ci_high);
  }
  const double pad = (hi - lo) * 0.15 + 1e-12;
  lo -= pad;
  hi += pad;

  const double left = 80.0, top = 50.0, plot_w = width - 130.0, plot_h = height - 120.0;
  auto to_y = [&](double v) { return top + (hi - v) / (hi - lo) * plot_h; };

  svg.text(width / 2, 24, "treatment effect by " + report.feature + " stratum", 12,
           "middle");
  svg.line(left, top, left, top + plot_h, "#777");
  svg.text(left - 8, to_y(0.0) + 4, "0", 10, "end");
  svg.line(left, to_y(0.0), left + plot_w, to_y(0.0), "#bbb", 1.0, true);
  svg.text(left - 8, top + 6, short_number(hi), 10, "end");
  svg.text(left - 8, top + plot_h, short_number(lo), 10, "end");

  const double slot = plot_w / static_cast<double>(included.size());
  for (std::size_t k = 0; k < included.size(); ++k) {
    const auto* stratum = included[k];
    const double x = left + slot * (static_cast<double>(k) + 0.5);
    svg.line(x, to_y(stratum->ate.ci_low), x, to_y(stratum->ate.ci_high), kControlColor,
             1.5);
    svg.circle(x, to_y(stratum->ate.tau_hat), 4, kTreatedColor);
    std::string label;
    if (std::isinf(stratum->bin_lower)) {
      label = "< " + short_number(stratum->bin_upper);
    } else if (std::isinf(stratum->bin_upper)) {
      label = ">= " + short_number(stratum->bin_lower);
    } else {
      label = "[" + short_number(stratum->bin_lower) + ", " +
              short_number(stratum->bin_upper) + ")";
    }
    svg.text(x, top + plot_h + 18, label, 10, "middle");
    svg.text(x, top + plot_h + 34, "n=" + std::to_string(stratum->n_units), 9, "middle",
             "#777");
  }

  const std::size_t excluded = report.strata.size() - included.size();
  if (excluded > 0) {
    svg.text(left, height - 10,
             std::to_string(excluded) + " stratum(s) omitted: insufficient sample", 10,
             "start", "#777");
  }
  return svg.finish();
}

std::string render_summary_md(const EstimateReport* estimate, const BalanceReport* balance,
                              const StratifyReport* strata,
                              const std::vector<std::string>& figure_files) {
  std::ostringstream md;
  md << "# Analysis summary\n\n";

  if (estimate != nullptr) {
    const auto& ate = estimate->ate;
    md << "## Total treatment effect\n\n";
    md << "- ATE (inside - outside), tau: **" << format_double(ate.tau_hat)
       << "** runs/pitch\n";
    md << "- Outside-vs-inside effect, -tau: **" << format_double(-ate.tau_hat)
       << "** runs/pitch\n";
    md << "- " << format_double(ate.level * 100) << "% CI (tau): ["
       << format_double(ate.ci_low) << ", " << format_double(ate.ci_high) << "] ("
       << ate.n_bootstrap << " bootstrap resamples, seed " << ate.seed << ")\n";
    md << "- Naive difference of means (inside - outside): "
       << format_double(estimate->naive.treated_minus_control) << "\n";
    md << "- Units: " << estimate->n << " (" << ate.n_treated << " inside, "
       << ate.n_control << " outside)\n";
    md << "- Effective sample sizes: treated " << format_double(estimate->ess.ess_treated)
       << ", control " << format_double(estimate->ess.ess_control) << "\n";
    md << "- Propensities clipped at epsilon = " << format_double(estimate->epsilon)
       << ": " << estimate->clipped_count << " unit(s)\n\n";
  }

  if (balance != nullptr) {
    md << "## Covariate balance (ASAM)\n\n";
    std::size_t failing = 0;
    for (const auto& row : balance->rows) {
      if (!row.pass) ++failing;
    }
    md << "Threshold " << format_double(balance->threshold) << "; " << failing
       << " of " << balance->rows.size() << " features above it after weighting.\n\n";
    md << "| feature | before | after | pass |\n";
    md << "|---|---|---|---|\n";
    for (const auto& row : balance->rows) {
      md << "| " << row.name << " | " << format_double(row.asam_before) << " | "
         << format_double(row.asam_after) << " | "
         << (row.degenerate ? "degenerate" : (row.pass ? "yes" : "**no**")) << " |\n";
    }
    md << "\n";
  }

  if (strata != nullptr) {
    md << "## Stratified effects by " << strata->feature << "\n\n";
    md << "| bin | n | tau | CI |\n";
    md << "|---|---|---|---|\n";
    std::size_t excluded = 0;
    for (const auto& stratum : strata->strata) {
      std::string bin = "[" + format_double(stratum.bin_lower) + ", " +
                        format_double(stratum.bin_upper) + ")";
      if (!stratum.included) {
        ++excluded;
        md << "| " << bin << " | " << stratum.n_units << " | excluded | - |\n";
        continue;
      }
      md << "| " << bin << " | " << stratum.n_units << " | "
         << format_double(stratum.ate.tau_hat) << " | ["
         << format_double(stratum.ate.ci_low) << ", "
         << format_double(stratum.ate.ci_high) << "] |\n";
    }
    if (excluded > 0) {
      md << "\n" << excluded << " bin(s) excluded for insufficient sample (min_n = "
         << strata->min_n << ").\n";
    }
    md << "\n";
  }

  if (!figure_files.empty()) {
    md << "## Figures\n\n";
    for (const auto& file : figure_files) {
      md << "![" << file << "](" << file << ")\n";
    }
    md << "\n";
  }
  return md.str();
}

}  // namespace pitcheval
