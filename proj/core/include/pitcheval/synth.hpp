#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pitcheval/events.hpp"
#include "pitcheval/matrix.hpp"
#include "pitcheval/meta.hpp"

namespace pitcheval {

// Marginal distribution of one synthetic confounder. Correlated draws a
// child feature co-moving with an earlier feature at correlation rho.
struct DistSpec {
  enum class Kind { Normal, ClampedNormal, Uniform, Categorical, Bernoulli, Correlated };

  Kind kind = Kind::Normal;
  double mean = 0.0;
  double sd = 1.0;
  double lo = 0.0;  // Uniform bounds / clamp bounds
  double hi = 1.0;
  std::vector<double> probs;  // Categorical over values {0, 1, ...}
  double p = 0.5;             // Bernoulli
  int parent = -1;            // Correlated
  double rho = 0.0;

  double analytic_mean() const;
  double analytic_sd() const;
};

// Linear index on standardized features: intercept + sum coef_j * (x_j -
// loc_j) / scale_j, clamped to [-eta_clip, eta_clip] when eta_clip > 0.
struct LinearIndexSpec {
  double intercept = 0.0;
  std::array<double, kFeatureCount> coefs{};
  std::array<double, kFeatureCount> loc{};
  std::array<double, kFeatureCount> scale{};
  double eta_clip = 0.0;

  double eta(std::span<const double> x) const;
};

// Per-stratum treatment effects keyed on one confounder.
struct HeteroTauSpec {
  int feature = -1;
  std::vector<double> edges;
  std::vector<double> taus;  // edges.size() + 1 entries
};

struct SynthConfig {
  std::string preset_name;
  std::int64_t n_units = 0;
  double true_tau = 0.006;
  std::array<DistSpec, kFeatureCount> confounders;
  LinearIndexSpec assignment;  // logit of P(Z=1|X)
  LinearIndexSpec outcome;     // baseline g(X)
  double noise_sd = 0.06;
  std::uint64_t seed = 0;
  std::optional<HeteroTauSpec> hetero;

  void validate() const;
};

// Ground truth stored next to every generated dataset.
struct Manifest {
  std::string preset_name;
  std::int64_t n_units = 0;
  std::uint64_t seed = 0;
  double true_tau = 0.0;
  std::optional<HeteroTauSpec> hetero;
  double realized_mean_tau = 0.0;  // population-weighted for heterogeneous taus
  LinearIndexSpec assignment;
  LinearIndexSpec outcome;
  double noise_sd = 0.0;
  double mean_true_propensity = 0.0;
  std::int64_t n_treated = 0;
};

struct SynthData {
  FeatureMatrix matrix;
  std::vector<double> true_propensity;  // not serialized with the matrix
  Manifest manifest;
};

// Deterministic given config.seed (each unit reads its own substream).
// Throws Error(DegenerateAssignment) when any unit's true propensity falls
// outside [0.02, 0.98].
SynthData generate(const SynthConfig& config, int n_threads = 1);

double true_propensity(const LinearIndexSpec& assignment, std::span<const double> x);

SynthConfig preset_randomized();
SynthConfig preset_confounded_strong();
SynthConfig preset_paper_shaped();
SynthConfig preset_by_name(const std::string& name);

// Heterogeneous-tau variant of confounded-strong: three batter_woba strata
// with distinct effects.
SynthConfig preset_hetero_by_woba();

std::string manifest_to_json(const Manifest& manifest, const MetaBlock& meta);
Manifest manifest_from_json(const std::string& text);
void save_manifest(const std::string& path, const Manifest& manifest,
                   const MetaBlock& meta);
Manifest load_manifest(const std::string& path);  // Error(MissingManifest) if absent

// The stored ground-truth ATE: true_tau for homogeneous effects, the
// realized population mean for heterogeneous ones.
double oracle_ate(const Manifest& manifest);
double oracle_ate(const std::string& manifest_path);

// Markov half-inning generator over the 24 base-out states.
struct InningsConfig {
  std::vector<std::pair<EventCode, double>> event_probs;
  std::int64_t n_innings = 0;
  std::uint64_t seed = 0;
  int season = 2024;
};

// Deterministic base-advancement semantics for one event.
struct EventTransition {
  std::optional<BaseOutState> after;  // empty when the third out is recorded
  int runs = 0;
};
EventTransition apply_inning_event(const BaseOutState& state, EventCode code);

// Throws Error(NonterminatingChain) when the event mix cannot absorb (no
// out-producing event) or an inning exceeds the safety cap.
std::vector<HalfInning> generate_innings(const InningsConfig& config, int n_threads = 1);

// Event mix calibrated so the exact-chain RE(0, empty) is ~0.44.
InningsConfig innings_preset_calibrated();

// Exact RE(0, bases empty) of an event mix, from the 24-state linear system.
double exact_chain_re0(const std::vector<std::pair<EventCode, double>>& event_probs);

// Rescales the offensive event probabilities (field_out absorbing the
// difference) until the exact-chain RE(0, empty) hits the target. Throws
// Error(InvalidConfig) for unreachable targets.
InningsConfig calibrate_innings(InningsConfig base, double target_re0);

}  // namespace pitcheval
