// pitcheval: causal analysis of inside/outside pitch demands.
//
// Pipeline subcommands: ingest -> build-re -> featurize -> fit ->
// estimate / stratify -> diagnose -> report, plus synth for oracle data.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "pitcheval/csv.hpp"
#include "pitcheval/diagnostics.hpp"
#include "pitcheval/error.hpp"
#include "pitcheval/estimate.hpp"
#include "pitcheval/features.hpp"
#include "pitcheval/ingest.hpp"
#include "pitcheval/matrix.hpp"
#include "pitcheval/meta.hpp"
#include "pitcheval/propensity.hpp"
#include "pitcheval/report.hpp"
#include "pitcheval/synth.hpp"
#include "pitcheval/valuation.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace pitcheval;

namespace {

struct GlobalOptions {
  int threads = 1;
};

// Effective-config hash over the values that shaped the output, so reruns
// with the same configuration are byte-identical and detectable.
MetaBlock make_meta(const json& effective_config,
                    const std::vector<std::string>& input_paths,
                    std::optional<std::uint64_t> seed = std::nullopt) {
  MetaBlock meta;
  meta.config_hash = fnv1a64_hex(effective_config.dump());
  if (seed) {
    meta.seed = *seed;
    meta.has_seed = true;
  }
  for (const auto& path : input_paths) {
    meta.input_hashes.emplace_back(path, hash_file(path));
  }
  return meta;
}

json load_config_file(const std::string& path) {
  if (path.empty()) return json::object();
  return json::parse(read_text_file(path));
}

// Provenance for markup outputs, as a comment node.
std::string meta_comment(const MetaBlock& meta) {
  std::string comment = "<!-- tool_version: " + std::string(kToolVersion) +
                        "; config_hash: " + meta.config_hash;
  if (meta.has_seed) comment += "; seed: " + std::to_string(meta.seed);
  for (const auto& [path, hash] : meta.input_hashes) {
    comment += "; input " + path + ": " + hash;
  }
  comment += " -->\n";
  return comment;
}

std::string svg_with_meta(std::string svg, const MetaBlock& meta) {
  const auto pos = svg.rfind("</svg>");
  if (pos != std::string::npos) svg.insert(pos, meta_comment(meta));
  return svg;
}

// Flags override the config file: only options the user did not pass on the
// command line fall back to the file.
template <typename T>
void fallback(const CLI::Option* option, const json& config, const char* key, T& value) {
  if (option != nullptr && option->count() > 0) return;
  if (config.contains(key)) value = config.at(key).get<T>();
}

MonthDayWindow parse_window(const json& j, const MonthDayWindow& fallback_window) {
  MonthDayWindow window = fallback_window;
  auto parse_md = [](const std::string& text, int& month, int& day) {
    if (text.size() != 5 || text[2] != '-') {
      throw Error(ErrorCode::InvalidConfig, "window dates must be MM-DD: " + text);
    }
    month = std::stoi(text.substr(0, 2));
    day = std::stoi(text.substr(3, 2));
  };
  if (j.contains("start")) parse_md(j.at("start").get<std::string>(), window.start_month, window.start_day);
  if (j.contains("end")) parse_md(j.at("end").get<std::string>(), window.end_month, window.end_day);
  return window;
}

FilterConfig parse_filter_config(const json& config) {
  FilterConfig filter;
  if (config.contains("feature_window")) {
    filter.feature_window = parse_window(config.at("feature_window"), filter.feature_window);
  }
  if (config.contains("estimation_window")) {
    filter.estimation_window =
        parse_window(config.at("estimation_window"), filter.estimation_window);
  }
  if (config.contains("min_batter_pa")) filter.min_batter_pa = config.at("min_batter_pa").get<int>();
  if (config.contains("min_pitcher_tbf")) filter.min_pitcher_tbf = config.at("min_pitcher_tbf").get<int>();
  if (config.contains("pitch_types")) {
    filter.pitch_types.clear();
    for (const auto& name : config.at("pitch_types")) {
      const std::string text = name.get<std::string>();
      if (text == "four-seam") filter.pitch_types.push_back(PitchType::FourSeam);
      else if (text == "other") filter.pitch_types.push_back(PitchType::Other);
      else throw Error(ErrorCode::InvalidConfig, "unknown pitch type: " + text);
    }
  }
  return filter;
}

ColumnMap parse_column_map(const json& config) {
  ColumnMap map;
  if (config.contains("columns")) {
    for (const auto& [canonical, source] : config.at("columns").items()) {
      map.columns[canonical] = source.get<std::string>();
    }
  }
  return map;
}

json filter_to_json(const FilterConfig& filter) {
  auto md = [](int month, int day) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "%02d-%02d", month, day);
    return std::string(buf);
  };
  json j;
  j["feature_window"] = {{"start", md(filter.feature_window.start_month, filter.feature_window.start_day)},
                         {"end", md(filter.feature_window.end_month, filter.feature_window.end_day)}};
  j["estimation_window"] = {
      {"start", md(filter.estimation_window.start_month, filter.estimation_window.start_day)},
      {"end", md(filter.estimation_window.end_month, filter.estimation_window.end_day)}};
  j["min_batter_pa"] = filter.min_batter_pa;
  j["min_pitcher_tbf"] = filter.min_pitcher_tbf;
  json types = json::array();
  for (PitchType t : filter.pitch_types) {
    types.push_back(t == PitchType::FourSeam ? "four-seam" : "other");
  }
  j["pitch_types"] = types;
  return j;
}

WobaWeights parse_woba_weights(const json& config) {
  WobaWeights weights = WobaWeights::standard();
  if (!config.contains("woba")) return weights;
  const json& w = config.at("woba");
  if (w.contains("weights")) {
    weights.weights.clear();
    for (const auto& [name, value] : w.at("weights").items()) {
      const auto code = parse_event_code(name);
      if (!code) throw Error(ErrorCode::InvalidConfig, "unknown event in woba weights: " + name);
      weights.weights[*code] = value.get<double>();
    }
  }
  if (w.contains("denominator")) {
    weights.denominator.clear();
    for (const auto& name : w.at("denominator")) {
      const auto code = parse_event_code(name.get<std::string>());
      if (!code) throw Error(ErrorCode::InvalidConfig, "unknown event in woba denominator");
      weights.denominator.insert(*code);
    }
  }
  return weights;
}

int run_ingest(const std::string& input, const std::string& config_path,
               const std::string& out) {
  const json config = load_config_file(config_path);
  const FilterConfig filter = parse_filter_config(config);
  filter.validate();
  const ColumnMap columns = parse_column_map(config);

  ParseResult parsed = parse_pitch_csv(input, columns);
  FilterReport funnel;
  const std::vector<PitchEvent> analysis =
      filter_analysis_set(parsed.events, filter, compute_player_counts(parsed.events), &funnel);

  json effective = config;
  effective["filter"] = filter_to_json(filter);
  effective["input"] = input;
  const MetaBlock meta = make_meta(effective, {input});

  write_events_csv(out, parsed.events, meta);
  write_rejected_csv(out + ".rejected.csv", parsed.rejected, meta);

  json report;
  report["meta"] = {{"tool_version", kToolVersion}, {"config_hash", meta.config_hash}};
  report["parsed_rows"] = parsed.events.size();
  report["rejected_rows"] = parsed.rejected.size();
  report["funnel"] = {{"input", funnel.input},
                     {"outside_estimation_window", funnel.outside_estimation_window},
                     {"wrong_pitch_type", funnel.wrong_pitch_type},
                     {"batter_below_min_pa", funnel.batter_below_min_pa},
                     {"pitcher_below_min_tbf", funnel.pitcher_below_min_tbf},
                     {"zone_excluded", funnel.zone_excluded},
                     {"retained", funnel.retained}};
  write_text_file(out + ".filter.json", report.dump(2) + "\n");

  std::cout << "parsed " << parsed.events.size() << " rows (" << parsed.rejected.size()
            << " rejected); analysis set " << funnel.retained << " of " << funnel.input
            << "\n";
  std::cout << "removed: window " << funnel.outside_estimation_window << ", pitch type "
            << funnel.wrong_pitch_type << ", batter PA " << funnel.batter_below_min_pa
            << ", pitcher TBF " << funnel.pitcher_below_min_tbf << ", zone "
            << funnel.zone_excluded << "\n";
  return 0;
}

int run_build_re(const std::string& events_path, std::optional<int> season,
                 bool include_runs, const std::string& event_values_out,
                 const std::string& out) {
  const std::vector<HalfInning> innings = read_innings_any(events_path, season);
  const RunExpectancyTable table = build_re_table(innings);
  for (const auto& warning : table.warnings) std::cerr << "warning: " << warning << "\n";

  json effective = {{"events", events_path},
                    {"season", season ? json(*season) : json(nullptr)},
                    {"include_runs_on_play", include_runs}};
  const MetaBlock meta = make_meta(effective, {events_path});

  if (out.size() > 5 && out.substr(out.size() - 5) == ".json") {
    write_text_file(out, re_table_to_json(table, meta));
  } else {
    write_re_table_csv(out, table, meta);
  }

  if (!event_values_out.empty()) {
    const EventValueTable events_table =
        build_event_value_table(delta_re_occurrences(innings, table, include_runs));
    for (const auto& warning : events_table.warnings) {
      std::cerr << "warning: " << warning << "\n";
    }
    if (event_values_out.size() > 5 &&
        event_values_out.substr(event_values_out.size() - 5) == ".json") {
      write_text_file(event_values_out, event_values_to_json(events_table, meta));
    } else {
      write_event_values_csv(event_values_out, events_table, meta);
    }
  }
  std::cout << "run-expectancy table over " << innings.size() << " half-innings -> "
            << out << "\n";
  return 0;
}

int run_featurize(const std::string& events_path, const std::string& re_table_path,
                  const std::string& event_values_path, const std::string& config_path,
                  const FeatureBuildConfig& fcfg, const std::string& out) {
  const json config = load_config_file(config_path);
  const FilterConfig filter = parse_filter_config(config);
  const WobaWeights woba = parse_woba_weights(config);

  const std::vector<PitchEvent> events = read_events_csv(events_path);
  const RunExpectancyTable re_table = read_re_table_csv(re_table_path);
  std::optional<EventValueTable> event_values;
  if (!event_values_path.empty()) {
    event_values = read_event_values_csv(event_values_path);
  }

  FeaturizeOutput output =
      build_feature_matrix(events, filter, re_table, event_values, woba, fcfg);

  json effective = config;
  effective["filter"] = filter_to_json(filter);
  effective["alpha_fast"] = fcfg.alpha_fast;
  effective["alpha_slow"] = fcfg.alpha_slow;
  effective["confidence_index"] =
      fcfg.confidence_mode == ConfidenceIndexMode::Literal ? "literal" : "contiguous";
  effective["lag_scope"] = fcfg.lag_scope == LagScope::Game ? "game" : "plate-appearance";
  effective["outcome_mode"] =
      fcfg.outcome_mode == OutcomeMode::EventValue ? "event-value" : "realized";
  effective["include_runs_on_play"] = fcfg.include_runs_on_play;
  std::vector<std::string> inputs = {events_path, re_table_path};
  if (!event_values_path.empty()) inputs.push_back(event_values_path);
  const MetaBlock meta = make_meta(effective, inputs);

  write_matrix_csv(out, output.matrix, meta);

  json provenance;
  provenance["meta"] = {{"tool_version", kToolVersion}, {"config_hash", meta.config_hash}};
  provenance["analysis_pitches"] = output.log.analysis_pitches;
  provenance["emitted_units"] = output.log.emitted_units;
  provenance["speed_imputations"] = output.log.speed_imputations;
  provenance["missing_aggregate_skipped"] = output.log.missing_aggregate_skipped;
  provenance["notes"] = output.log.notes;
  write_text_file(out + ".provenance.json", provenance.dump(2) + "\n");

  std::cout << "featurized " << output.log.emitted_units << " units -> " << out << "\n";
  return 0;
}

int run_fit(const std::string& matrix_path, const ForestHyperparams& hp,
            const std::string& out, int threads) {
  const FeatureMatrix matrix = read_matrix_csv(matrix_path);
  const PropensityModel model = train_forest(matrix, hp, threads);
  for (const auto& warning : model.warnings) std::cerr << "warning: " << warning << "\n";

  json effective = {{"matrix", matrix_path},
                    {"trees", hp.n_trees},
                    {"depth", hp.max_depth},
                    {"min_leaf", hp.min_leaf},
                    {"features_per_split", hp.features_per_split},
                    {"seed", hp.seed}};
  save_model(out, model, make_meta(effective, {matrix_path}, hp.seed));
  std::cout << "forest: " << hp.n_trees << " trees, depth <= " << hp.max_depth
            << ", oob accuracy " << format_double(model.oob_accuracy) << " -> " << out
            << "\n";
  return 0;
}

int run_estimate(const std::string& matrix_path, const std::string& model_path,
                 const BootstrapConfig& bootstrap, double epsilon, bool with_ht,
                 const std::string& out, int threads) {
  const FeatureMatrix matrix = read_matrix_csv(matrix_path);
  const PropensityModel model = load_model(model_path);

  ClipReport clip;
  const std::vector<double> p =
      clip_propensities(predict_all(model, matrix, threads), epsilon, &clip);

  EstimateReport report;
  report.naive = naive_diff(matrix.z, matrix.y);
  report.ate = bootstrap_ci(matrix.z, matrix.y, p, bootstrap,
                            bootstrap.cluster_by_game ? &matrix.game_id : nullptr, threads);
  report.ess = weight_diagnostics(matrix.z, p);
  report.n = static_cast<std::int64_t>(matrix.n());
  report.clipped_count = clip.clipped();
  report.epsilon = epsilon;
  if (with_ht) report.horvitz_thompson = ipw_ate_horvitz_thompson(matrix.z, matrix.y, p);

  json effective = {{"matrix", matrix_path}, {"model", model_path},
                    {"bootstrap", bootstrap.n_replicates}, {"level", bootstrap.level},
                    {"seed", bootstrap.seed}, {"epsilon", epsilon},
                    {"cluster_by_game", bootstrap.cluster_by_game},
                    {"horvitz_thompson", with_ht}};
  write_text_file(out, estimate_report_to_json(
                           report, make_meta(effective, {matrix_path, model_path},
                                             bootstrap.seed)));

  std::cout << "tau (inside - outside): " << format_double(report.ate.tau_hat)
            << "  outside-vs-inside: " << format_double(-report.ate.tau_hat) << "\n";
  std::cout << format_double(bootstrap.level * 100) << "% CI: ["
            << format_double(report.ate.ci_low) << ", "
            << format_double(report.ate.ci_high) << "]  naive: "
            << format_double(report.naive.treated_minus_control) << "  ess(t/c): "
            << format_double(report.ess.ess_treated) << "/"
            << format_double(report.ess.ess_control) << "  clipped: "
            << clip.clipped() << "\n";
  return 0;
}

int run_stratify(const std::string& matrix_path, const std::string& model_path,
                 const std::string& feature, const std::vector<double>& edges,
                 std::int64_t min_n, const BootstrapConfig& bootstrap, double epsilon,
                 const std::string& out, const std::string& csv_out, int threads) {
  const FeatureMatrix matrix = read_matrix_csv(matrix_path);
  const PropensityModel model = load_model(model_path);
  const int column = feature_index(feature);
  if (column < 0) throw Error(ErrorCode::UnknownFeature, "unknown feature: " + feature);

  const std::vector<double> p =
      clip_propensities(predict_all(model, matrix, threads), epsilon, nullptr);
  std::vector<double> values(matrix.n());
  for (std::size_t i = 0; i < matrix.n(); ++i) {
    values[i] = matrix.at(i, static_cast<std::size_t>(column));
  }

  StratifyReport report;
  report.feature = feature;
  report.edges = edges;
  report.min_n = min_n;
  report.strata = stratified_ate(matrix.z, matrix.y, p, values, feature, edges, min_n,
                                 bootstrap, threads);

  json effective = {{"matrix", matrix_path}, {"model", model_path}, {"by", feature},
                    {"edges", edges}, {"min_n", min_n},
                    {"bootstrap", bootstrap.n_replicates}, {"level", bootstrap.level},
                    {"seed", bootstrap.seed}, {"epsilon", epsilon}};
  const MetaBlock meta = make_meta(effective, {matrix_path, model_path}, bootstrap.seed);
  write_text_file(out, stratify_report_to_json(report, meta));
  if (!csv_out.empty()) write_strata_csv(csv_out, report, meta);

  for (const auto& stratum : report.strata) {
    std::cout << "[" << format_double(stratum.bin_lower) << ", "
              << format_double(stratum.bin_upper) << ") n=" << stratum.n_units << ": ";
    if (stratum.included) {
      std::cout << "tau " << format_double(stratum.ate.tau_hat) << " CI ["
                << format_double(stratum.ate.ci_low) << ", "
                << format_double(stratum.ate.ci_high) << "]\n";
    } else {
      std::cout << "excluded (" << stratum.reason << ")\n";
    }
  }
  return 0;
}

int run_diagnose(const std::string& matrix_path, const std::string& model_path,
                 int bins, int repeats, std::uint64_t seed, double epsilon,
                 double threshold, WeightedAsamMode mode, const std::string& out_dir,
                 int threads) {
  const FeatureMatrix matrix = read_matrix_csv(matrix_path);
  const PropensityModel model = load_model(model_path);
  const std::vector<double> p =
      clip_propensities(predict_all(model, matrix, threads), epsilon, nullptr);

  const BalanceReport balance = balance_report(matrix, p, threshold, mode);
  const OverlapHistogram overlap = overlap_histogram(matrix.z, p, bins);
  const std::vector<ImportanceEntry> importance =
      permutation_importance(model, matrix, repeats, seed, threads);

  json effective = {{"matrix", matrix_path}, {"model", model_path}, {"bins", bins},
                    {"repeats", repeats}, {"seed", seed}, {"epsilon", epsilon},
                    {"threshold", threshold},
                    {"weighted_variance", mode == WeightedAsamMode::WeightedVariance}};
  const MetaBlock meta = make_meta(effective, {matrix_path, model_path}, seed);

  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  write_balance_csv((dir / "balance.csv").string(), balance, meta);
  write_overlap_csv((dir / "overlap.csv").string(), overlap, meta);
  write_importance_csv((dir / "importance.csv").string(), importance, meta);
  write_text_file((dir / "balance.svg").string(),
                  svg_with_meta(render_balance_svg(balance), meta));
  write_text_file((dir / "overlap.svg").string(),
                  svg_with_meta(render_overlap_svg(overlap), meta));
  write_text_file((dir / "importance.svg").string(),
                  svg_with_meta(render_importance_svg(importance), meta));

  std::size_t failing = 0;
  for (const auto& row : balance.rows) {
    if (!row.pass) ++failing;
  }
  std::cout << "balance: " << (balance.rows.size() - failing) << "/" << balance.rows.size()
            << " features below " << format_double(threshold) << "; top importance: "
            << (importance.empty() ? "-" : importance.front().feature) << "\n";
  return 0;
}

int run_synth(const std::string& preset, const std::string& mode, std::int64_t n,
              double tau, bool tau_set, std::optional<double> re_target,
              std::uint64_t seed, const std::string& out_dir, int threads) {
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);

  if (mode == "innings") {
    InningsConfig config = innings_preset_calibrated();
    if (re_target) config = calibrate_innings(config, *re_target);
    config.n_innings = n;
    config.seed = seed;
    const std::vector<HalfInning> innings = generate_innings(config, threads);
    json effective = {{"mode", "innings"},
                      {"n", n},
                      {"seed", seed},
                      {"re_target", re_target ? json(*re_target) : json(nullptr)}};
    write_innings_csv((dir / "innings.csv").string(), innings,
                      make_meta(effective, {}, seed));
    std::cout << "generated " << innings.size() << " half-innings (exact RE(0,empty) "
              << format_double(exact_chain_re0(config.event_probs)) << ") -> "
              << (dir / "innings.csv").string() << "\n";
    return 0;
  }

  SynthConfig config = preset_by_name(preset);
  config.n_units = n;
  if (tau_set) config.true_tau = tau;
  config.seed = seed;
  const SynthData data = generate(config, threads);

  json effective = {{"mode", "matrix"}, {"preset", preset}, {"n", n},
                    {"tau", config.true_tau}, {"seed", seed}};
  const MetaBlock meta = make_meta(effective, {}, seed);
  write_matrix_csv((dir / "matrix.csv").string(), data.matrix, meta);
  save_manifest((dir / "manifest.json").string(), data.manifest, meta);
  std::cout << "generated " << data.matrix.n() << " units (preset " << preset
            << ", true tau " << format_double(oracle_ate(data.manifest)) << ") -> "
            << out_dir << "\n";
  return 0;
}

int run_report(const std::string& results_dir, const std::string& out_dir) {
  const fs::path results(results_dir);
  const fs::path out(out_dir.empty() ? results_dir : out_dir);
  fs::create_directories(out);

  auto require = [&](const char* name) {
    const fs::path path = results / name;
    if (!fs::exists(path)) {
      throw Error(ErrorCode::MissingArtifact, "missing artifact: " + path.string());
    }
    return path.string();
  };

  const EstimateReport estimate =
      estimate_report_from_json(read_text_file(require("estimate.json")));
  const BalanceReport balance = read_balance_csv(require("balance.csv"));
  const OverlapHistogram overlap = read_overlap_csv(require("overlap.csv"));
  const std::vector<ImportanceEntry> importance =
      read_importance_csv(require("importance.csv"));

  std::optional<StratifyReport> strata;
  if (fs::exists(results / "strata.json")) {
    strata = stratify_report_from_json(read_text_file((results / "strata.json").string()));
  }

  json effective = {{"results", results_dir}};
  std::vector<std::string> inputs = {(results / "estimate.json").string(),
                                     (results / "balance.csv").string(),
                                     (results / "overlap.csv").string(),
                                     (results / "importance.csv").string()};
  if (strata) inputs.push_back((results / "strata.json").string());
  const MetaBlock meta = make_meta(effective, inputs);

  write_text_file((out / "overlap.svg").string(),
                  svg_with_meta(render_overlap_svg(overlap), meta));
  write_text_file((out / "balance.svg").string(),
                  svg_with_meta(render_balance_svg(balance), meta));
  write_text_file((out / "importance.svg").string(),
                  svg_with_meta(render_importance_svg(importance), meta));
  std::vector<std::string> figures = {"overlap.svg", "balance.svg", "importance.svg"};
  if (strata) {
    write_text_file((out / "stratified.svg").string(),
                    svg_with_meta(render_strata_svg(*strata), meta));
    figures.push_back("stratified.svg");
  }

  write_text_file((out / "report.md").string(),
                  meta_comment(meta) +
                      render_summary_md(&estimate, &balance, strata ? &*strata : nullptr,
                                        figures));
  std::cout << "report -> " << (out / "report.md").string() << " (+" << figures.size()
            << " figures)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Causal analysis of inside/outside pitch demands"};
  app.require_subcommand(1);

  GlobalOptions global;
  app.add_option("--threads", global.threads, "Worker threads for parallel stages")
      ->envname("PITCHEVAL_THREADS");
  app.set_version_flag("--version", std::string("pitcheval ") + kToolVersion +
                                        " (format " + kFormatVersion + ")");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Parse and filter a pitch-by-pitch CSV");
  std::string ingest_input, ingest_config, ingest_out;
  ingest->add_option("--input", ingest_input, "Source CSV")->required();
  ingest->add_option("--config", ingest_config, "JSON config (columns, filter windows)");
  ingest->add_option("--out", ingest_out, "Canonical events CSV")->required();

  // build-re
  auto* build_re = app.add_subcommand("build-re", "Build the run-expectancy table");
  std::string re_events, re_out, re_event_values;
  int re_season = 0;
  bool re_no_runs = false;
  build_re->add_option("--events", re_events, "Events CSV (pitches or transitions)")->required();
  auto* season_opt = build_re->add_option("--season", re_season, "Keep one season only");
  build_re->add_option("--event-values", re_event_values, "Also write per-event run values");
  build_re->add_flag("--no-runs-on-play", re_no_runs, "Exclude runs scored from delta RE");
  build_re->add_option("--out", re_out, "Table file (.csv or .json)")->required();

  // featurize
  auto* featurize = app.add_subcommand("featurize", "Build the 18-feature matrix");
  std::string feat_events, feat_re, feat_values, feat_config, feat_out;
  FeatureBuildConfig fcfg;
  std::string feat_conf_index = "literal", feat_lag_scope = "game",
              feat_outcome = "event-value";
  bool feat_no_runs = false;
  featurize->add_option("--events", feat_events, "Canonical events CSV")->required();
  featurize->add_option("--re-table", feat_re, "Run-expectancy table CSV")->required();
  featurize->add_option("--event-values", feat_values, "Per-event run values CSV");
  featurize->add_option("--config", feat_config, "JSON config (filter, woba weights)");
  featurize->add_option("--alpha-fast", fcfg.alpha_fast, "Fast confidence memory");
  featurize->add_option("--alpha-slow", fcfg.alpha_slow, "Slow confidence memory");
  featurize->add_option("--confidence-index", feat_conf_index, "literal|contiguous");
  featurize->add_option("--lag-scope", feat_lag_scope, "game|plate-appearance");
  featurize->add_option("--outcome-mode", feat_outcome, "event-value|realized");
  featurize->add_flag("--no-runs-on-play", feat_no_runs, "Exclude runs scored from delta RE");
  featurize->add_option("--out", feat_out, "Feature matrix CSV")->required();

  // fit
  auto* fit = app.add_subcommand("fit", "Train the propensity random forest");
  std::string fit_matrix, fit_out, fit_config;
  ForestHyperparams hp;
  fit->add_option("--matrix", fit_matrix, "Feature matrix CSV")->required();
  fit->add_option("--config", fit_config, "JSON parameter file; flags override");
  auto* fit_trees = fit->add_option("--trees", hp.n_trees, "Number of trees");
  auto* fit_depth = fit->add_option("--depth", hp.max_depth, "Maximum tree depth");
  auto* fit_min_leaf = fit->add_option("--min-leaf", hp.min_leaf, "Minimum samples per leaf");
  auto* fit_fps =
      fit->add_option("--features-per-split", hp.features_per_split, "Features sampled per node");
  auto* fit_seed = fit->add_option("--seed", hp.seed, "Training seed");
  fit->add_option("--out", fit_out, "Model JSON")->required();

  // estimate
  auto* estimate = app.add_subcommand("estimate", "IPW ATE with bootstrap CI");
  std::string est_matrix, est_model, est_config, est_out = "estimate.json";
  BootstrapConfig est_boot;
  double est_epsilon = 0.01;
  bool est_ht = false;
  std::string est_cluster;
  estimate->add_option("--matrix", est_matrix, "Feature matrix CSV")->required();
  estimate->add_option("--model", est_model, "Propensity model JSON")->required();
  estimate->add_option("--config", est_config, "JSON parameter file; flags override");
  auto* est_boot_opt = estimate->add_option("--bootstrap", est_boot.n_replicates, "Bootstrap resamples");
  auto* est_level_opt = estimate->add_option("--level", est_boot.level, "Confidence level");
  auto* est_seed_opt = estimate->add_option("--seed", est_boot.seed, "Bootstrap seed");
  auto* est_eps_opt = estimate->add_option("--epsilon", est_epsilon, "Propensity clipping bound");
  estimate->add_flag("--ht", est_ht, "Also report the unnormalized Horvitz-Thompson form");
  estimate->add_option("--cluster-by", est_cluster, "Resample whole clusters (game)");
  estimate->add_option("--out", est_out, "Report JSON");

  // stratify
  auto* stratify = app.add_subcommand("stratify", "Per-stratum IPW effects");
  std::string str_matrix, str_model, str_by, str_out = "strata.json", str_csv;
  std::vector<double> str_edges;
  std::int64_t str_min_n = 10000;
  BootstrapConfig str_boot;
  double str_epsilon = 0.01;
  std::string str_config;
  stratify->add_option("--matrix", str_matrix, "Feature matrix CSV")->required();
  stratify->add_option("--model", str_model, "Propensity model JSON")->required();
  stratify->add_option("--by", str_by, "Confounder to stratify on")->required();
  stratify->add_option("--config", str_config, "JSON parameter file; flags override");
  auto* str_edges_opt = stratify->add_option("--edges", str_edges, "Bin edges (a,b,c)")->delimiter(',');
  auto* str_min_n_opt = stratify->add_option("--min-n", str_min_n, "Minimum units per included bin");
  auto* str_boot_opt = stratify->add_option("--bootstrap", str_boot.n_replicates, "Bootstrap resamples");
  auto* str_level_opt = stratify->add_option("--level", str_boot.level, "Confidence level");
  auto* str_seed_opt = stratify->add_option("--seed", str_boot.seed, "Bootstrap seed");
  auto* str_eps_opt = stratify->add_option("--epsilon", str_epsilon, "Propensity clipping bound");
  stratify->add_option("--out", str_out, "Strata JSON");
  stratify->add_option("--csv", str_csv, "Plot-friendly strata CSV");

  // diagnose
  auto* diagnose = app.add_subcommand("diagnose", "Balance, overlap and importance");
  std::string diag_matrix, diag_model, diag_out;
  int diag_bins = 20, diag_repeats = 5;
  std::uint64_t diag_seed = 0;
  double diag_epsilon = 0.01, diag_threshold = 0.1;
  bool diag_unweighted_var = false;
  std::string diag_config;
  diagnose->add_option("--matrix", diag_matrix, "Feature matrix CSV")->required();
  diagnose->add_option("--model", diag_model, "Propensity model JSON")->required();
  diagnose->add_option("--config", diag_config, "JSON parameter file; flags override");
  auto* diag_bins_opt = diagnose->add_option("--bins", diag_bins, "Overlap histogram bins");
  auto* diag_repeats_opt =
      diagnose->add_option("--repeats", diag_repeats, "Permutation repeats per feature");
  auto* diag_seed_opt = diagnose->add_option("--seed", diag_seed, "Permutation seed");
  auto* diag_eps_opt = diagnose->add_option("--epsilon", diag_epsilon, "Propensity clipping bound");
  auto* diag_thr_opt = diagnose->add_option("--threshold", diag_threshold, "ASAM pass threshold");
  diagnose->add_flag("--unweighted-variance", diag_unweighted_var,
                     "Adjusted ASAM keeps unweighted variances");
  diagnose->add_option("--out", diag_out, "Output directory")->required();

  // synth
  auto* synth = app.add_subcommand("synth", "Generate oracle data");
  std::string synth_preset = "confounded-strong", synth_mode = "matrix", synth_out,
              synth_config;
  std::int64_t synth_n = 50000;
  double synth_tau = 0.006;
  std::uint64_t synth_seed = 0;
  synth->add_option("--config", synth_config, "JSON parameter file; flags override");
  auto* synth_preset_opt =
      synth->add_option("--preset", synth_preset,
                        "randomized|confounded-strong|paper-shaped|hetero-by-woba");
  auto* synth_mode_opt = synth->add_option("--mode", synth_mode, "matrix|innings");
  auto* synth_n_opt = synth->add_option("--n", synth_n, "Units (or half-innings in innings mode)");
  auto* tau_opt = synth->add_option("--tau", synth_tau, "True treatment effect");
  double synth_re_target = 0.44;
  auto* re_target_opt = synth->add_option(
      "--re-target", synth_re_target, "Calibrate the innings mix to this RE(0, empty)");
  auto* synth_seed_opt = synth->add_option("--seed", synth_seed, "Generation seed");
  synth->add_option("--out", synth_out, "Output directory")->required();

  // report
  auto* report = app.add_subcommand("report", "Render summary and figures");
  std::string report_results, report_out;
  report->add_option("--results", report_results, "Directory with pipeline outputs")->required();
  report->add_option("--out", report_out, "Output directory (default: results dir)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(ingest)) {
      return run_ingest(ingest_input, ingest_config, ingest_out);
    }
    if (app.got_subcommand(build_re)) {
      return run_build_re(re_events,
                          season_opt->count() > 0 ? std::optional<int>(re_season)
                                                  : std::nullopt,
                          !re_no_runs, re_event_values, re_out);
    }
    if (app.got_subcommand(featurize)) {
      if (feat_conf_index == "contiguous") fcfg.confidence_mode = ConfidenceIndexMode::Contiguous;
      else if (feat_conf_index != "literal") throw Error(ErrorCode::InvalidConfig, "bad --confidence-index");
      if (feat_lag_scope == "plate-appearance") fcfg.lag_scope = LagScope::PlateAppearance;
      else if (feat_lag_scope != "game") throw Error(ErrorCode::InvalidConfig, "bad --lag-scope");
      if (feat_outcome == "realized") fcfg.outcome_mode = OutcomeMode::Realized;
      else if (feat_outcome != "event-value") throw Error(ErrorCode::InvalidConfig, "bad --outcome-mode");
      fcfg.include_runs_on_play = !feat_no_runs;
      return run_featurize(feat_events, feat_re, feat_values, feat_config, fcfg, feat_out);
    }
    if (app.got_subcommand(fit)) {
      const json cfg = load_config_file(fit_config);
      fallback(fit_trees, cfg, "trees", hp.n_trees);
      fallback(fit_depth, cfg, "depth", hp.max_depth);
      fallback(fit_min_leaf, cfg, "min_leaf", hp.min_leaf);
      fallback(fit_fps, cfg, "features_per_split", hp.features_per_split);
      fallback(fit_seed, cfg, "seed", hp.seed);
      return run_fit(fit_matrix, hp, fit_out, global.threads);
    }
    if (app.got_subcommand(estimate)) {
      const json cfg = load_config_file(est_config);
      fallback(est_boot_opt, cfg, "bootstrap", est_boot.n_replicates);
      fallback(est_level_opt, cfg, "level", est_boot.level);
      fallback(est_seed_opt, cfg, "seed", est_boot.seed);
      fallback(est_eps_opt, cfg, "epsilon", est_epsilon);
      if (!est_cluster.empty() && est_cluster != "game") {
        throw Error(ErrorCode::InvalidConfig, "only --cluster-by game is supported");
      }
      est_boot.cluster_by_game = est_cluster == "game";
      return run_estimate(est_matrix, est_model, est_boot, est_epsilon, est_ht, est_out,
                          global.threads);
    }
    if (app.got_subcommand(stratify)) {
      const json cfg = load_config_file(str_config);
      fallback(str_edges_opt, cfg, "edges", str_edges);
      fallback(str_min_n_opt, cfg, "min_n", str_min_n);
      fallback(str_boot_opt, cfg, "bootstrap", str_boot.n_replicates);
      fallback(str_level_opt, cfg, "level", str_boot.level);
      fallback(str_seed_opt, cfg, "seed", str_boot.seed);
      fallback(str_eps_opt, cfg, "epsilon", str_epsilon);
      return run_stratify(str_matrix, str_model, str_by, str_edges, str_min_n, str_boot,
                          str_epsilon, str_out, str_csv, global.threads);
    }
    if (app.got_subcommand(diagnose)) {
      const json cfg = load_config_file(diag_config);
      fallback(diag_bins_opt, cfg, "bins", diag_bins);
      fallback(diag_repeats_opt, cfg, "repeats", diag_repeats);
      fallback(diag_seed_opt, cfg, "seed", diag_seed);
      fallback(diag_eps_opt, cfg, "epsilon", diag_epsilon);
      fallback(diag_thr_opt, cfg, "threshold", diag_threshold);
      return run_diagnose(diag_matrix, diag_model, diag_bins, diag_repeats, diag_seed,
                          diag_epsilon, diag_threshold,
                          diag_unweighted_var ? WeightedAsamMode::UnweightedVariance
                                              : WeightedAsamMode::WeightedVariance,
                          diag_out, global.threads);
    }
    if (app.got_subcommand(synth)) {
      const json cfg = load_config_file(synth_config);
      fallback(synth_preset_opt, cfg, "preset", synth_preset);
      fallback(synth_mode_opt, cfg, "mode", synth_mode);
      fallback(synth_n_opt, cfg, "n", synth_n);
      fallback(synth_seed_opt, cfg, "seed", synth_seed);
      const bool tau_given = tau_opt->count() > 0 || cfg.contains("tau");
      fallback(tau_opt, cfg, "tau", synth_tau);
      const bool re_target_given = re_target_opt->count() > 0 || cfg.contains("re_target");
      fallback(re_target_opt, cfg, "re_target", synth_re_target);
      return run_synth(synth_preset, synth_mode, synth_n, synth_tau, tau_given,
                       re_target_given ? std::optional<double>(synth_re_target)
                                       : std::nullopt,
                       synth_seed, synth_out, global.threads);
    }
    if (app.got_subcommand(report)) return run_report(report_results, report_out);
  } catch (const Error& e) {
    json err = {{"error", {{"code", std::string(error_code_name(e.code()))},
                           {"message", e.what()}}}};
    std::cerr << err.dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    json err = {{"error", {{"code", "Unexpected"}, {"message", e.what()}}}};
    std::cerr << err.dump() << "\n";
    return 2;
  }
  return 0;
}
