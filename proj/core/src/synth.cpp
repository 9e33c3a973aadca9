#include "pitcheval/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include <nlohmann/json.hpp>

#include "pitcheval/error.hpp"
#include "pitcheval/rng.hpp"
#include "pitcheval/threading.hpp"

namespace pitcheval {

double DistSpec::analytic_mean() const {
  switch (kind) {
    case Kind::Normal:
    case Kind::ClampedNormal:
    case Kind::Correlated:
      return mean;
    case Kind::Uniform:
      return (lo + hi) / 2.0;
    case Kind::Bernoulli:
      return p;
    case Kind::Categorical: {
      double m = 0.0;
      for (std::size_t i = 0; i < probs.size(); ++i) m += static_cast<double>(i) * probs[i];
      return m;
    }
  }
  return 0.0;
}

double DistSpec::analytic_sd() const {
  switch (kind) {
    case Kind::Normal:
    case Kind::ClampedNormal:
    case Kind::Correlated:
      return sd;
    case Kind::Uniform:
      return (hi - lo) / std::sqrt(12.0);
    case Kind::Bernoulli:
      return std::sqrt(p * (1.0 - p));
    case Kind::Categorical: {
      const double m = analytic_mean();
      double m2 = 0.0;
      for (std::size_t i = 0; i < probs.size(); ++i) {
        m2 += static_cast<double>(i) * static_cast<double>(i) * probs[i];
      }
      return std::sqrt(std::max(0.0, m2 - m * m));
    }
  }
  return 1.0;
}

double LinearIndexSpec::eta(std::span<const double> x) const {
  double value = intercept;
  for (int j = 0; j < kFeatureCount; ++j) {
    const auto idx = static_cast<std::size_t>(j);
    if (coefs[idx] == 0.0) continue;
    value += coefs[idx] * (x[idx] - loc[idx]) / scale[idx];
  }
  if (eta_clip > 0.0) value = std::clamp(value, -eta_clip, eta_clip);
  return value;
}

double true_propensity(const LinearIndexSpec& assignment, std::span<const double> x) {
  return 1.0 / (1.0 + std::exp(-assignment.eta(x)));
}

void SynthConfig::validate() const {
  if (n_units < 1) throw Error(ErrorCode::InvalidConfig, "n_units must be >= 1");
  if (noise_sd < 0.0) throw Error(ErrorCode::InvalidConfig, "noise_sd must be >= 0");
  for (int j = 0; j < kFeatureCount; ++j) {
    const auto& spec = confounders[static_cast<std::size_t>(j)];
    if (spec.kind == DistSpec::Kind::Categorical) {
      double total = 0.0;
      for (double pr : spec.probs) total += pr;
      if (spec.probs.empty() || std::fabs(total - 1.0) > 1e-9) {
        throw Error(ErrorCode::InvalidConfig,
                    "categorical probabilities must sum to 1 (feature " +
                        std::to_string(j) + ")");
      }
    }
    if (spec.kind == DistSpec::Kind::Correlated) {
      if (spec.parent < 0 || spec.parent >= kFeatureCount ||
          confounders[static_cast<std::size_t>(spec.parent)].kind ==
              DistSpec::Kind::Correlated) {
        throw Error(ErrorCode::InvalidConfig,
                    "correlated feature needs a non-correlated parent");
      }
    }
  }
  if (hetero) {
    if (hetero->feature < 0 || hetero->feature >= kFeatureCount) {
      throw Error(ErrorCode::InvalidConfig, "hetero feature index out of range");
    }
    if (hetero->taus.size() != hetero->edges.size() + 1) {
      throw Error(ErrorCode::InvalidConfig, "hetero taus must have edges+1 entries");
    }
    for (std::size_t e = 1; e < hetero->edges.size(); ++e) {
      if (!(hetero->edges[e - 1] < hetero->edges[e])) {
        throw Error(ErrorCode::InvalidConfig, "hetero edges must be increasing");
      }
    }
  }
}

namespace {

double sample_feature(const DistSpec& spec, Rng& rng, double parent_zscore) {
  switch (spec.kind) {
    case DistSpec::Kind::Normal:
      return spec.mean + spec.sd * rng.normal();
    case DistSpec::Kind::ClampedNormal:
      return std::clamp(spec.mean + spec.sd * rng.normal(), spec.lo, spec.hi);
    case DistSpec::Kind::Uniform:
      return spec.lo + (spec.hi - spec.lo) * rng.uniform();
    case DistSpec::Kind::Bernoulli:
      return rng.bernoulli(spec.p) ? 1.0 : 0.0;
    case DistSpec::Kind::Categorical: {
      const double u = rng.uniform();
      double cumulative = 0.0;
      for (std::size_t i = 0; i < spec.probs.size(); ++i) {
        cumulative += spec.probs[i];
        if (u < cumulative) return static_cast<double>(i);
      }
      return static_cast<double>(spec.probs.size() - 1);
    }
    case DistSpec::Kind::Correlated: {
      const double zscore = spec.rho * parent_zscore +
                            std::sqrt(1.0 - spec.rho * spec.rho) * rng.normal();
      double value = spec.mean + spec.sd * zscore;
      if (spec.lo < spec.hi) value = std::clamp(value, spec.lo, spec.hi);
      return value;
    }
  }
  return 0.0;
}

double tau_for_unit(const SynthConfig& config, std::span<const double> x) {
  if (!config.hetero) return config.true_tau;
  const double v = x[static_cast<std::size_t>(config.hetero->feature)];
  std::size_t bin = 0;
  while (bin < config.hetero->edges.size() && v >= config.hetero->edges[bin]) ++bin;
  return config.hetero->taus[bin];
}

}  // namespace

SynthData generate(const SynthConfig& config, int n_threads) {
  config.validate();
  const auto n = static_cast<std::size_t>(config.n_units);

  SynthData data;
  data.matrix = make_canonical_matrix();
  data.matrix.unit_id.resize(n);
  data.matrix.x.resize(n * kFeatureCount);
  data.matrix.z.resize(n);
  data.matrix.y.resize(n);
  data.true_propensity.resize(n);
  std::vector<double> unit_tau(n);

  std::vector<std::uint8_t> degenerate(n, 0);

  parallel_for(n, n_threads, [&](std::size_t i) {
    Rng rng = Rng::substream(config.seed, i);
    double* row = data.matrix.x.data() + i * kFeatureCount;

    // Non-correlated features first, then correlated children, both in
    // index order, so the draw sequence is well defined.
    for (int j = 0; j < kFeatureCount; ++j) {
      const auto& spec = config.confounders[static_cast<std::size_t>(j)];
      if (spec.kind == DistSpec::Kind::Correlated) continue;
      row[j] = sample_feature(spec, rng, 0.0);
    }
    for (int j = 0; j < kFeatureCount; ++j) {
      const auto& spec = config.confounders[static_cast<std::size_t>(j)];
      if (spec.kind != DistSpec::Kind::Correlated) continue;
      const auto& parent = config.confounders[static_cast<std::size_t>(spec.parent)];
      const double parent_sd = parent.analytic_sd();
      const double parent_z =
          parent_sd > 0.0 ? (row[spec.parent] - parent.analytic_mean()) / parent_sd : 0.0;
      row[j] = sample_feature(spec, rng, parent_z);
    }

    std::span<const double> x(row, kFeatureCount);
    const double p = true_propensity(config.assignment, x);
    if (p < 0.02 || p > 0.98) degenerate[i] = 1;
    data.true_propensity[i] = p;
    const bool treated = rng.bernoulli(p);
    data.matrix.z[i] = treated ? 1 : 0;
    const double tau_i = tau_for_unit(config, x);
    unit_tau[i] = tau_i;
    const double baseline = config.outcome.eta(x);
    const double noise = config.noise_sd > 0.0 ? config.noise_sd * rng.normal() : 0.0;
    data.matrix.y[i] = tau_i * (treated ? 1.0 : 0.0) + baseline + noise;
    data.matrix.unit_id[i] = static_cast<std::int64_t>(i);
  });

  for (std::size_t i = 0; i < n; ++i) {
    if (degenerate[i]) {
      throw Error(ErrorCode::DegenerateAssignment,
                  "unit " + std::to_string(i) + " has true propensity outside [0.02, 0.98]");
    }
  }

  Manifest& manifest = data.manifest;
  manifest.preset_name = config.preset_name;
  manifest.n_units = config.n_units;
  manifest.seed = config.seed;
  manifest.true_tau = config.true_tau;
  manifest.hetero = config.hetero;
  manifest.assignment = config.assignment;
  manifest.outcome = config.outcome;
  manifest.noise_sd = config.noise_sd;
  double tau_sum = 0.0, p_sum = 0.0;
  std::int64_t treated = 0;
  for (std::size_t i = 0; i < n; ++i) {
    tau_sum += unit_tau[i];
    p_sum += data.true_propensity[i];
    treated += data.matrix.z[i];
  }
  manifest.realized_mean_tau = tau_sum / static_cast<double>(n);
  manifest.mean_true_propensity = p_sum / static_cast<double>(n);
  manifest.n_treated = treated;
  return data;
}

namespace {

std::array<DistSpec, kFeatureCount> base_confounders() {
  std::array<DistSpec, kFeatureCount> specs;
  auto normal = [](double mean, double sd) {
    DistSpec s;
    s.kind = DistSpec::Kind::Normal;
    s.mean = mean;
    s.sd = sd;
    return s;
  };
  auto clamped = [](double mean, double sd, double lo, double hi) {
    DistSpec s;
    s.kind = DistSpec::Kind::ClampedNormal;
    s.mean = mean;
    s.sd = sd;
    s.lo = lo;
    s.hi = hi;
    return s;
  };
  auto categorical = [](std::vector<double> probs) {
    DistSpec s;
    s.kind = DistSpec::Kind::Categorical;
    s.probs = std::move(probs);
    return s;
  };

  specs[0] = categorical({0.4, 0.3, 0.2, 0.1});                       // ball_count
  specs[1] = categorical({1.0 / 3, 1.0 / 3, 1.0 / 3});                // out_count
  specs[2] = categorical({0.52, 0.13, 0.08, 0.05, 0.06, 0.05, 0.04, 0.07});  // runner_code
  specs[3] = normal(0.0, 2.5);                                        // run_diff
  specs[4].kind = DistSpec::Kind::Bernoulli;                          // same_hand
  specs[4].p = 0.55;
  specs[5].kind = DistSpec::Kind::Uniform;                            // total_pitch_in_game
  specs[5].lo = 1.0;
  specs[5].hi = 120.0;
  specs[6] = normal(-0.02, 0.15);   // result_1_ago
  specs[7] = normal(-0.02, 0.15);   // result_2_ago
  specs[8] = normal(144.0, 5.0);    // speed_1_ago
  specs[9] = normal(144.0, 5.0);    // speed_2_ago
  specs[10] = normal(0.0, 0.05);    // conf_inside_fast
  specs[11] = normal(0.0, 0.01);    // conf_inside_slow
  specs[12] = normal(0.0, 0.05);    // conf_fourseam_fast
  specs[13] = normal(0.0, 0.01);    // conf_fourseam_slow
  specs[14] = normal(0.0, 0.3);     // prev_batting_result
  specs[15] = clamped(0.32, 0.08, 0.02, 0.62);  // pitcher_inside_ratio
  specs[16] = clamped(0.28, 0.07, 0.02, 0.60);  // batter_inside_ratio
  specs[17] = clamped(0.32, 0.04, 0.16, 0.48);  // batter_woba
  return specs;
}

void fill_standardization(SynthConfig& config, LinearIndexSpec& spec) {
  for (int j = 0; j < kFeatureCount; ++j) {
    const auto idx = static_cast<std::size_t>(j);
    spec.loc[idx] = config.confounders[idx].analytic_mean();
    const double sd = config.confounders[idx].analytic_sd();
    spec.scale[idx] = sd > 0.0 ? sd : 1.0;
  }
}

void set_coef(LinearIndexSpec& spec, int feature, double value) {
  spec.coefs[static_cast<std::size_t>(feature)] = value;
}

}  // namespace

SynthConfig preset_randomized() {
  SynthConfig config;
  config.preset_name = "randomized";
  config.confounders = base_confounders();
  config.assignment.intercept = 0.0;
  config.assignment.eta_clip = 3.8;
  fill_standardization(config, config.assignment);
  set_coef(config.outcome, feature_index("batter_woba"), 0.004);
  set_coef(config.outcome, feature_index("pitcher_inside_ratio"), 0.002);
  fill_standardization(config, config.outcome);
  config.noise_sd = 0.06;
  return config;
}

SynthConfig preset_confounded_strong() {
  SynthConfig config;
  config.preset_name = "confounded-strong";
  config.confounders = base_confounders();

  // Batters pitched inside more often are also better hitters (r ~ 0.31).
  DistSpec bir;
  bir.kind = DistSpec::Kind::Correlated;
  bir.parent = feature_index("batter_woba");
  bir.rho = 0.31;
  bir.mean = 0.28;
  bir.sd = 0.07;
  bir.lo = 0.02;
  bir.hi = 0.60;
  config.confounders[static_cast<std::size_t>(feature_index("batter_inside_ratio"))] = bir;

  config.assignment.intercept = -0.75;
  config.assignment.eta_clip = 3.8;
  set_coef(config.assignment, feature_index("batter_woba"), 0.20);
  set_coef(config.assignment, feature_index("batter_inside_ratio"), 0.17);
  set_coef(config.assignment, feature_index("pitcher_inside_ratio"), 0.24);
  set_coef(config.assignment, feature_index("prev_batting_result"), -0.10);
  set_coef(config.assignment, feature_index("result_1_ago"), -0.085);
  set_coef(config.assignment, feature_index("runner_code"), 0.05);
  set_coef(config.assignment, feature_index("same_hand"), 0.07);
  fill_standardization(config, config.assignment);

  set_coef(config.outcome, feature_index("batter_woba"), 0.007);
  set_coef(config.outcome, feature_index("pitcher_inside_ratio"), 0.0045);
  set_coef(config.outcome, feature_index("batter_inside_ratio"), 0.002);
  set_coef(config.outcome, feature_index("prev_batting_result"), -0.003);
  set_coef(config.outcome, feature_index("result_1_ago"), -0.002);
  fill_standardization(config, config.outcome);

  config.noise_sd = 0.05;
  return config;
}

SynthConfig preset_paper_shaped() {
  SynthConfig config = preset_confounded_strong();
  config.preset_name = "paper-shaped";
  // Inside ratios dominate assignment, then the previous results, runner
  // and handedness.
  config.assignment.coefs = {};
  set_coef(config.assignment, feature_index("pitcher_inside_ratio"), 0.85);
  set_coef(config.assignment, feature_index("batter_inside_ratio"), 0.75);
  set_coef(config.assignment, feature_index("result_1_ago"), -0.4);
  set_coef(config.assignment, feature_index("runner_code"), 0.3);
  set_coef(config.assignment, feature_index("same_hand"), 0.25);
  set_coef(config.assignment, feature_index("result_2_ago"), -0.2);
  set_coef(config.assignment, feature_index("batter_woba"), 0.15);
  return config;
}

SynthConfig preset_hetero_by_woba() {
  SynthConfig config = preset_confounded_strong();
  config.preset_name = "hetero-by-woba";
  HeteroTauSpec hetero;
  hetero.feature = feature_index("batter_woba");
  hetero.edges = {0.30, 0.34};
  hetero.taus = {0.010, 0.006, 0.002};
  config.hetero = hetero;
  return config;
}

SynthConfig preset_by_name(const std::string& name) {
  if (name == "randomized") return preset_randomized();
  if (name == "confounded-strong") return preset_confounded_strong();
  if (name == "paper-shaped") return preset_paper_shaped();
  if (name == "hetero-by-woba") return preset_hetero_by_woba();
  throw Error(ErrorCode::InvalidConfig, "unknown preset: " + name);
}

namespace {

nlohmann::json linear_index_to_json(const LinearIndexSpec& spec) {
  return {{"intercept", spec.intercept},
          {"coefs", spec.coefs},
          {"loc", spec.loc},
          {"scale", spec.scale},
          {"eta_clip", spec.eta_clip}};
}

LinearIndexSpec linear_index_from_json(const nlohmann::json& j) {
  LinearIndexSpec spec;
  spec.intercept = j.at("intercept").get<double>();
  const auto coefs = j.at("coefs").get<std::vector<double>>();
  const auto loc = j.at("loc").get<std::vector<double>>();
  const auto scale = j.at("scale").get<std::vector<double>>();
  if (coefs.size() != kFeatureCount || loc.size() != kFeatureCount ||
      scale.size() != kFeatureCount) {
    throw Error(ErrorCode::BadValue, "linear index arrays must have 18 entries");
  }
  std::copy(coefs.begin(), coefs.end(), spec.coefs.begin());
  std::copy(loc.begin(), loc.end(), spec.loc.begin());
  std::copy(scale.begin(), scale.end(), spec.scale.begin());
  spec.eta_clip = j.at("eta_clip").get<double>();
  return spec;
}

}  // namespace

std::string manifest_to_json(const Manifest& manifest, const MetaBlock& meta) {
  nlohmann::json j;
  j["format"] = "pitcheval-synth-manifest-v1";
  j["meta"] = {{"tool_version", kToolVersion}, {"config_hash", meta.config_hash}};
  j["preset"] = manifest.preset_name;
  j["n_units"] = manifest.n_units;
  j["seed"] = manifest.seed;
  j["true_tau"] = manifest.true_tau;
  if (manifest.hetero) {
    j["hetero"] = {{"feature", manifest.hetero->feature},
                   {"feature_name",
                    feature_names()[static_cast<std::size_t>(manifest.hetero->feature)]},
                   {"edges", manifest.hetero->edges},
                   {"taus", manifest.hetero->taus}};
  } else {
    j["hetero"] = nullptr;
  }
  j["realized_mean_tau"] = manifest.realized_mean_tau;
  j["assignment"] = linear_index_to_json(manifest.assignment);
  j["outcome"] = linear_index_to_json(manifest.outcome);
  j["noise_sd"] = manifest.noise_sd;
  j["mean_true_propensity"] = manifest.mean_true_propensity;
  j["n_treated"] = manifest.n_treated;
  return j.dump(2) + "\n";
}

Manifest manifest_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  if (j.value("format", "") != "pitcheval-synth-manifest-v1") {
    throw Error(ErrorCode::BadValue, "unrecognized manifest format");
  }
  Manifest manifest;
  manifest.preset_name = j.value("preset", "");
  manifest.n_units = j.at("n_units").get<std::int64_t>();
  manifest.seed = j.at("seed").get<std::uint64_t>();
  manifest.true_tau = j.at("true_tau").get<double>();
  if (!j.at("hetero").is_null()) {
    HeteroTauSpec hetero;
    hetero.feature = j.at("hetero").at("feature").get<int>();
    hetero.edges = j.at("hetero").at("edges").get<std::vector<double>>();
    hetero.taus = j.at("hetero").at("taus").get<std::vector<double>>();
    manifest.hetero = hetero;
  }
  manifest.realized_mean_tau = j.at("realized_mean_tau").get<double>();
  manifest.assignment = linear_index_from_json(j.at("assignment"));
  manifest.outcome = linear_index_from_json(j.at("outcome"));
  manifest.noise_sd = j.at("noise_sd").get<double>();
  manifest.mean_true_propensity = j.at("mean_true_propensity").get<double>();
  manifest.n_treated = j.at("n_treated").get<std::int64_t>();
  return manifest;
}

void save_manifest(const std::string& path, const Manifest& manifest,
                   const MetaBlock& meta) {
  write_text_file(path, manifest_to_json(manifest, meta));
}

Manifest load_manifest(const std::string& path) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::MissingManifest, "manifest not found: " + path);
  }
  return manifest_from_json(read_text_file(path));
}

double oracle_ate(const Manifest& manifest) {
  return manifest.hetero ? manifest.realized_mean_tau : manifest.true_tau;
}

double oracle_ate(const std::string& manifest_path) {
  return oracle_ate(load_manifest(manifest_path));
}

EventTransition apply_inning_event(const BaseOutState& state, EventCode code) {
  BaseOccupancy b = state.bases;
  int outs = state.outs;
  int runs = 0;

  switch (code) {
    case EventCode::Strike:
    case EventCode::Ball:
      break;
    case EventCode::Walk:
    case EventCode::HitByPitch:
    case EventCode::IntendedWalk:
      if (!b.first) {
        b.first = true;
      } else if (!b.second) {
        b.second = true;
      } else if (!b.third) {
        b.third = true;
      } else {
        runs = 1;
      }
      break;
    case EventCode::Single:
      runs = (b.second ? 1 : 0) + (b.third ? 1 : 0);
      b = {true, b.first, false};
      break;
    case EventCode::Double:
      runs = (b.second ? 1 : 0) + (b.third ? 1 : 0);
      b = {false, true, b.first};
      break;
    case EventCode::Triple:
      runs = (b.first ? 1 : 0) + (b.second ? 1 : 0) + (b.third ? 1 : 0);
      b = {false, false, true};
      break;
    case EventCode::HomeRun:
      runs = 1 + (b.first ? 1 : 0) + (b.second ? 1 : 0) + (b.third ? 1 : 0);
      b = {false, false, false};
      break;
    case EventCode::FieldOut:
    case EventCode::SwingingStrikeOut:
    case EventCode::CalledStrikeOut:
    case EventCode::FoulFly:
    case EventCode::FoulLiner:
    case EventCode::BuntStrikeOut:
    case EventCode::FieldingInterference:
      outs += 1;
      break;
    case EventCode::DoublePlay:
      if (b.first && outs <= 1) {
        outs += 2;
        b.first = false;
      } else {
        outs += 1;
      }
      break;
    case EventCode::SacrificeFly:
      outs += 1;
      if (b.third && state.outs <= 1) {
        b.third = false;
        runs = 1;
      }
      break;
    case EventCode::Bunt:
      outs += 1;
      runs = b.third ? 1 : 0;
      b = {false, b.first, b.second};
      break;
    case EventCode::BuntAndFieldersChoice:
      // Lead runner retired, batter takes first; with empty bases the
      // batter is the out.
      outs += 1;
      if (b.third) {
        b.third = false;
        b.first = true;
      } else if (b.second) {
        b.second = false;
        b.first = true;
      }  // with only first occupied (or empty) the occupancy is unchanged
      break;
    case EventCode::UncaughtThirdStrike:
      if (!b.first) b.first = true;
      else outs += 1;
      break;
    case EventCode::BuntAndError:
    case EventCode::FieldingError:
    case EventCode::BattingInterference:
    case EventCode::SacrificeFlyAndError:
      runs = b.third ? 1 : 0;
      b = {true, b.first, b.second};
      break;
  }

  EventTransition result;
  if (outs >= 3) {
    result.runs = 0;  // no run scores on the third out
    result.after.reset();
  } else {
    result.runs = runs;
    result.after = BaseOutState{outs, b};
  }
  return result;
}

namespace {

bool always_produces_out(EventCode code) {
  switch (code) {
    case EventCode::FieldOut:
    case EventCode::SwingingStrikeOut:
    case EventCode::CalledStrikeOut:
    case EventCode::FoulFly:
    case EventCode::FoulLiner:
    case EventCode::BuntStrikeOut:
    case EventCode::FieldingInterference:
    case EventCode::DoublePlay:
    case EventCode::SacrificeFly:
    case EventCode::Bunt:
      return true;
    default:
      return false;
  }
}

}  // namespace

std::vector<HalfInning> generate_innings(const InningsConfig& config, int n_threads) {
  if (config.n_innings < 1) {
    throw Error(ErrorCode::InvalidConfig, "n_innings must be >= 1");
  }
  double total = 0.0;
  double out_mass = 0.0;
  for (const auto& [code, prob] : config.event_probs) {
    if (prob < 0.0) throw Error(ErrorCode::InvalidConfig, "negative event probability");
    total += prob;
    if (always_produces_out(code)) out_mass += prob;
  }
  if (std::fabs(total - 1.0) > 1e-9) {
    throw Error(ErrorCode::InvalidConfig, "event probabilities must sum to 1");
  }
  if (out_mass <= 0.0) {
    throw Error(ErrorCode::NonterminatingChain, "no out-producing event in the mix");
  }

  constexpr int kMaxEventsPerInning = 2000;
  const auto n = static_cast<std::size_t>(config.n_innings);
  std::vector<HalfInning> innings(n);
  std::vector<std::uint8_t> overrun(n, 0);

  parallel_for(n, n_threads, [&](std::size_t i) {
    Rng rng = Rng::substream(config.seed, i);
    HalfInning& inning = innings[i];
    inning.game_id = "synth-" + std::to_string(i);
    inning.inning = 1;
    inning.half = Half::Top;
    inning.season = config.season;

    BaseOutState state;  // 0 outs, bases empty
    for (int step = 0; step < kMaxEventsPerInning; ++step) {
      const double u = rng.uniform();
      double cumulative = 0.0;
      EventCode code = config.event_probs.back().first;
      for (const auto& [candidate, prob] : config.event_probs) {
        cumulative += prob;
        if (u < cumulative) {
          code = candidate;
          break;
        }
      }
      const EventTransition transition = apply_inning_event(state, code);
      InningEvent ev;
      ev.before = state;
      ev.after = transition.after;
      ev.outcome = code;
      ev.runs_scored = transition.runs;
      inning.events.push_back(ev);
      if (!transition.after) return;
      state = *transition.after;
    }
    overrun[i] = 1;
  });

  for (std::size_t i = 0; i < n; ++i) {
    if (overrun[i]) {
      throw Error(ErrorCode::NonterminatingChain,
                  "half-inning exceeded the event cap; event mix cannot absorb");
    }
  }
  return innings;
}

InningsConfig innings_preset_calibrated() {
  // Exact-chain RE(0, empty) for this mix is 0.4407.
  InningsConfig config;
  config.event_probs = {
      {EventCode::Walk, 0.0795},
      {EventCode::Single, 0.1490},
      {EventCode::Double, 0.0447},
      {EventCode::Triple, 0.0040},
      {EventCode::HomeRun, 0.0297},
      {EventCode::FieldOut, 0.6931},
  };
  return config;
}

double exact_chain_re0(const std::vector<std::pair<EventCode, double>>& event_probs) {
  // Solve V = A V + b over the 24 transient states.
  constexpr int n = kBaseOutStateCount;
  std::array<std::array<double, n>, n> m{};
  std::array<double, n> b{};
  for (int s = 0; s < n; ++s) {
    m[static_cast<std::size_t>(s)][static_cast<std::size_t>(s)] = 1.0;
    const BaseOutState state = BaseOutState::from_index(s);
    for (const auto& [code, p] : event_probs) {
      const EventTransition t = apply_inning_event(state, code);
      b[static_cast<std::size_t>(s)] += p * t.runs;
      if (t.after) {
        m[static_cast<std::size_t>(s)][static_cast<std::size_t>(t.after->index())] -= p;
      }
    }
  }
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r) {
      if (std::fabs(m[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)]) >
          std::fabs(m[static_cast<std::size_t>(pivot)][static_cast<std::size_t>(col)])) {
        pivot = r;
      }
    }
    std::swap(m[static_cast<std::size_t>(pivot)], m[static_cast<std::size_t>(col)]);
    std::swap(b[static_cast<std::size_t>(pivot)], b[static_cast<std::size_t>(col)]);
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = m[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)] /
                       m[static_cast<std::size_t>(col)][static_cast<std::size_t>(col)];
      if (f == 0.0) continue;
      for (int c = col; c < n; ++c) {
        m[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] -=
            f * m[static_cast<std::size_t>(col)][static_cast<std::size_t>(c)];
      }
      b[static_cast<std::size_t>(r)] -= f * b[static_cast<std::size_t>(col)];
    }
  }
  return b[0] / m[0][0];
}

InningsConfig calibrate_innings(InningsConfig base, double target_re0) {
  if (target_re0 <= 0.0) {
    throw Error(ErrorCode::InvalidConfig, "calibration target must be positive");
  }
  double offensive_mass = 0.0;
  for (const auto& [code, p] : base.event_probs) {
    if (code != EventCode::FieldOut) offensive_mass += p;
  }
  if (offensive_mass <= 0.0) {
    throw Error(ErrorCode::InvalidConfig, "no offensive events to rescale");
  }
  bool has_out = false;
  for (const auto& [code, p] : base.event_probs) {
    if (code == EventCode::FieldOut) has_out = true;
  }
  if (!has_out) base.event_probs.emplace_back(EventCode::FieldOut, 0.0);

  // RE(0, empty) grows monotonically in the offense scale; bisect.
  auto scaled = [&](double scale) {
    InningsConfig cfg = base;
    double out_prob = 1.0;
    for (auto& [code, p] : cfg.event_probs) {
      if (code == EventCode::FieldOut) continue;
      p *= scale;
      out_prob -= p;
    }
    for (auto& [code, p] : cfg.event_probs) {
      if (code == EventCode::FieldOut) p = out_prob;
    }
    return cfg;
  };

  const double max_scale = 0.995 / offensive_mass;
  if (exact_chain_re0(scaled(max_scale).event_probs) < target_re0) {
    throw Error(ErrorCode::InvalidConfig, "calibration target unreachable");
  }
  double lo = 0.0, hi = max_scale;
  for (int iteration = 0; iteration < 80; ++iteration) {
    const double mid = (lo + hi) / 2.0;
    if (exact_chain_re0(scaled(mid).event_probs) < target_re0) lo = mid;
    else hi = mid;
  }
  return scaled((lo + hi) / 2.0);
}

}  // namespace pitcheval
