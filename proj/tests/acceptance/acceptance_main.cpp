// Acceptance suite: one criterion per entry, each printed as a PASS/FAIL
// line with the measured values. Run all by default, or a single criterion
// with --criterion N.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "pitcheval/diagnostics.hpp"
#include "pitcheval/estimate.hpp"
#include "pitcheval/features.hpp"
#include "pitcheval/ingest.hpp"
#include "pitcheval/matrix.hpp"
#include "pitcheval/meta.hpp"
#include "pitcheval/propensity.hpp"
#include "pitcheval/rng.hpp"
#include "pitcheval/synth.hpp"
#include "pitcheval/valuation.hpp"

using namespace pitcheval;

namespace {

struct CheckFailure {
  std::string message;
};

void require(bool condition, const std::string& message) {
  if (!condition) throw CheckFailure{message};
}

std::string fmt(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", value);
  return buf;
}

// ---------------------------------------------------------------------------
// 1. Oracle ATE recovery on confounded-strong, n = 50,000, true tau = 0.006.

std::string criterion_oracle_recovery() {
  const auto started = std::chrono::steady_clock::now();

  SynthConfig cfg = preset_confounded_strong();
  cfg.n_units = 50000;
  cfg.true_tau = 0.006;
  cfg.seed = 20240731;
  const SynthData data = generate(cfg, 1);

  ForestHyperparams hp;  // 130 trees, depth 9
  hp.seed = 7;
  const PropensityModel model = train_forest(data.matrix, hp, 1);
  const std::vector<double> p =
      clip_propensities(predict_all(model, data.matrix, 1), 0.01, nullptr);

  const double truth = oracle_ate(data.manifest);
  const PointEstimate est = ipw_ate(data.matrix.z, data.matrix.y, p);
  const NaiveResult naive = naive_diff(data.matrix.z, data.matrix.y);
  const double ipw_err = std::fabs(est.tau - truth);
  const double naive_err = std::fabs(naive.treated_minus_control - truth);

  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  require(ipw_err <= 0.002, "ipw error " + fmt(ipw_err) + " above 0.002");
  require(naive_err > ipw_err,
          "naive error " + fmt(naive_err) + " does not exceed ipw error " + fmt(ipw_err));
  require(seconds <= 120.0, "runtime " + fmt(seconds) + "s above 120s single-threaded");
  return "ipw err " + fmt(ipw_err) + " <= 0.002, naive err " + fmt(naive_err) + ", " +
         fmt(seconds) + "s";
}

// ---------------------------------------------------------------------------
// 2. With all propensities exactly 0.5 the Hajek estimate equals the plain
//    difference of group means to 1e-12 relative error.

std::string criterion_trivial_weights() {
  SynthConfig cfg = preset_randomized();
  cfg.n_units = 20000;
  cfg.true_tau = 0.4;
  cfg.seed = 2;
  const SynthData data = generate(cfg, 1);
  std::vector<double> p(data.matrix.n(), 0.5);

  const PointEstimate est = ipw_ate(data.matrix.z, data.matrix.y, p);
  const NaiveResult naive = naive_diff(data.matrix.z, data.matrix.y);
  const double rel = std::fabs(est.tau - naive.treated_minus_control) /
                     std::fabs(naive.treated_minus_control);
  require(rel <= 1e-12, "relative difference " + fmt(rel) + " above 1e-12");
  return "relative difference " + fmt(rel);
}

// ---------------------------------------------------------------------------
// 3. Four-record IPW hand check against direct substitution.

std::string criterion_hand_checked_ipw() {
  const std::vector<std::uint8_t> z{1, 1, 0, 0};
  const std::vector<double> y{1.0, 0.0, 1.0, 0.0};
  const std::vector<double> p{0.8, 0.5, 0.5, 0.2};
  const PointEstimate est = ipw_ate(z, y, p);

  // Independent direct substitution into the self-normalized form.
  const double ey1 = (1.0 * 1 / 0.8 + 0.0 * 1 / 0.5) / (1 / 0.8 + 1 / 0.5);
  const double ey0 = (1.0 * 1 / (1 - 0.5) + 0.0 * 1 / (1 - 0.2)) /
                     (1 / (1 - 0.5) + 1 / (1 - 0.2));
  const double expected = ey1 - ey0;  // -3/13 = -0.230769230769...

  require(std::fabs(est.tau - expected) <= 1e-9,
          "tau " + fmt(est.tau) + " vs substitution " + fmt(expected));
  require(std::fabs(expected - (-3.0 / 13.0)) <= 1e-15, "substitution sanity");
  return "tau " + fmt(est.tau) + " == " + fmt(expected) + " (=-3/13)";
}

// ---------------------------------------------------------------------------
// 4. Balance restoration on confounded-strong at n = 50,000.

std::string criterion_balance_restoration() {
  SynthConfig cfg = preset_confounded_strong();
  cfg.n_units = 50000;
  cfg.true_tau = 0.006;
  cfg.seed = 20240731;
  const SynthData data = generate(cfg, 1);

  ForestHyperparams hp;
  hp.seed = 7;
  const PropensityModel model = train_forest(data.matrix, hp, 1);
  const std::vector<double> p =
      clip_propensities(predict_all(model, data.matrix, 1), 0.01, nullptr);

  const BalanceReport report = balance_report(data.matrix, p);
  int before_above = 0;
  double max_after = 0.0;
  for (const auto& row : report.rows) {
    require(!row.degenerate, "unexpected degenerate feature " + row.name);
    if (row.asam_before > 0.1) ++before_above;
    max_after = std::max(max_after, row.asam_after);
  }
  require(before_above >= 1, "no feature imbalanced before weighting");
  require(max_after < 0.1, "max asam_after " + fmt(max_after) + " not below 0.1");
  return std::to_string(before_above) + " features above 0.1 before, max after " +
         fmt(max_after);
}

// ---------------------------------------------------------------------------
// 5. Bootstrap CI coverage: 200 Monte Carlo replications, n = 5,000, B = 500.

std::string criterion_bootstrap_coverage() {
  const auto started = std::chrono::steady_clock::now();
  const int replications = 200;
  int covered = 0;

  for (int rep = 0; rep < replications; ++rep) {
    SynthConfig cfg = preset_confounded_strong();
    cfg.n_units = 5000;
    cfg.true_tau = 0.006;
    cfg.seed = 1000 + static_cast<std::uint64_t>(rep);
    const SynthData data = generate(cfg, 1);

    BootstrapConfig boot;
    boot.n_replicates = 500;
    boot.level = 0.99;
    boot.seed = 500000 + static_cast<std::uint64_t>(rep);
    const AteResult result =
        bootstrap_ci(data.matrix.z, data.matrix.y, data.true_propensity, boot);
    if (result.ci_low <= 0.006 && 0.006 <= result.ci_high) ++covered;
  }

  const double coverage = static_cast<double>(covered) / replications;
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  require(coverage >= 0.95, "coverage " + fmt(coverage) + " below 0.95");
  require(seconds <= 900.0, "runtime " + fmt(seconds) + "s above 15 minutes");
  return "coverage " + fmt(coverage) + " (" + std::to_string(covered) + "/200), " +
         fmt(seconds) + "s";
}

// ---------------------------------------------------------------------------
// 6. Confidence recursion against a per-step hand evaluation.

std::string criterion_confidence_recursion() {
  const double alpha = 0.6;
  const std::vector<std::pair<DemandZone, double>> pitches = {
      {DemandZone::Inside, -0.038}, {DemandZone::Inside, 0.032},
      {DemandZone::Outside, -0.235}, {DemandZone::Inside, 0.437},
      {DemandZone::Outside, -0.038}, {DemandZone::Inside, 0.292},
  };

  // Independent replay of the published recurrence: the same-zone branch
  // recurses on the value two pitches back, the carry branch on one back.
  std::vector<double> c_in{0.0, 0.0};   // C_in(0), C_in(1)
  std::vector<double> c_out{0.0, 0.0};
  for (const auto& [zone, dre] : pitches) {
    const std::size_t n = c_in.size();  // index of the value being produced
    if (zone == DemandZone::Inside) {
      c_in.push_back(alpha * dre + (1 - alpha) * c_in[n - 2]);
      c_out.push_back(c_out[n - 1]);
    } else {
      c_out.push_back(alpha * dre + (1 - alpha) * c_out[n - 2]);
      c_in.push_back(c_in[n - 1]);
    }
  }

  ConfidenceState state = make_confidence_state(alpha, ConfidenceIndexMode::Literal);
  for (std::size_t k = 0; k < pitches.size(); ++k) {
    state = update_confidence(state, pitches[k].first, pitches[k].second);
    const std::size_t n = k + 2;
    require(std::fabs(state.c_in() - c_in[n]) <= 1e-12,
            "c_in at step " + std::to_string(n) + ": " + fmt(state.c_in()) + " vs " +
                fmt(c_in[n]));
    require(std::fabs(state.c_out() - c_out[n]) <= 1e-12,
            "c_out at step " + std::to_string(n));
    require(std::fabs(confidence_signal(state) - (c_in[n] - c_out[n])) <= 1e-12,
            "signal at step " + std::to_string(n));
  }

  // All-outside sequence leaves c_in at initialization exactly.
  ConfidenceState outside_only = make_confidence_state(alpha);
  for (int k = 0; k < 50; ++k) {
    outside_only = update_confidence(outside_only, DemandZone::Outside, 0.25);
  }
  require(outside_only.c_in() == 0.0, "all-outside sequence moved c_in");

  // Alpha -> 0: c_in stays within n*alpha*max|dRE| of initialization.
  const double tiny = 1e-15;
  ConfidenceState frozen = make_confidence_state(tiny);
  for (int k = 0; k < 100; ++k) {
    frozen = update_confidence(frozen, DemandZone::Inside, 1.0);
  }
  require(std::fabs(frozen.c_in()) <= 100 * tiny, "alpha->0 drift");

  return "6 steps match hand evaluation to 1e-12; degenerate properties exact";
}

// ---------------------------------------------------------------------------
// 7. Delta-RE telescoping over 1,000 generated half-innings.

std::string criterion_telescoping() {
  InningsConfig cfg = innings_preset_calibrated();
  cfg.n_innings = 1000;
  cfg.seed = 7;
  const auto innings = generate_innings(cfg, 1);
  const RunExpectancyTable table = build_re_table(innings);

  double worst = 0.0;
  for (const auto& inning : innings) {
    double sum = 0.0;
    int runs = 0;
    for (const auto& ev : inning.events) {
      sum += delta_re(ev.before, ev.after, ev.runs_scored, table, true);
      runs += ev.runs_scored;
    }
    const double expected = runs - table.at(inning.events.front().before);
    worst = std::max(worst, std::fabs(sum - expected));
  }
  require(worst <= 1e-9, "worst telescoping residual " + fmt(worst));
  return "worst per-inning residual " + fmt(worst) + " over 1000 innings";
}

// ---------------------------------------------------------------------------
// 8. Run-expectancy calibration: RE(0, empty) = 0.44 +/- 0.03 at 100,000
//    innings.

std::string criterion_re_calibration() {
  InningsConfig cfg = innings_preset_calibrated();
  cfg.n_innings = 100000;
  cfg.seed = 8;
  const auto innings = generate_innings(cfg, 1);
  const RunExpectancyTable table = build_re_table(innings);
  const double re0 = table.value[BaseOutState{0, {}}.index()];
  require(std::fabs(re0 - 0.44) <= 0.03,
          "RE(0, empty) " + fmt(re0) + " outside 0.44 +/- 0.03");
  return "RE(0, empty) = " + fmt(re0);
}

// ---------------------------------------------------------------------------
// 9. Forest determinism and skill.

std::string criterion_forest() {
  // Separable data: one informative feature among 18.
  FeatureMatrix train = make_canonical_matrix();
  FeatureMatrix held_out = make_canonical_matrix();
  Rng rng(91);
  auto fill = [&](FeatureMatrix& m, int n, int base_id) {
    for (int i = 0; i < n; ++i) {
      std::array<double, kFeatureCount> row{};
      const double x0 = rng.uniform() * 2.0 - 1.0;
      row[0] = x0;
      for (int j = 1; j < kFeatureCount; ++j) row[j] = rng.normal();
      m.push_row(base_id + i, row, x0 > 0 ? 1 : 0, 0.0);
    }
  };
  fill(train, 500, 0);
  fill(held_out, 500, 1000);

  ForestHyperparams hp;
  hp.seed = 9;
  const PropensityModel a = train_forest(train, hp, 1);
  const PropensityModel b = train_forest(train, hp, 1);
  const std::string ja = model_to_json(a, MetaBlock{});
  const std::string jb = model_to_json(b, MetaBlock{});
  require(ja == jb, "same seed did not give byte-identical serialized models");

  int correct = 0;
  for (std::size_t i = 0; i < held_out.n(); ++i) {
    const double p = predict_propensity(a, held_out.row(i));
    if ((p >= 0.5 ? 1 : 0) == held_out.z[i]) ++correct;
  }
  const double accuracy = static_cast<double>(correct) / static_cast<double>(held_out.n());
  require(accuracy >= 0.95, "held-out accuracy " + fmt(accuracy) + " below 0.95");

  const auto ranked = permutation_importance(a, train, 3, 17, 1);
  require(ranked.front().feature == feature_names()[0],
          "informative feature not ranked first (got " + ranked.front().feature + ")");

  return "byte-identical models, held-out accuracy " + fmt(accuracy) +
         ", top importance " + ranked.front().feature;
}

// ---------------------------------------------------------------------------
// 10. Stratified consistency and heterogeneous-tau recovery.

std::string criterion_stratified() {
  // (a) A single all-covering stratum reproduces the total estimate exactly.
  SynthConfig total_cfg = preset_confounded_strong();
  total_cfg.n_units = 20000;
  total_cfg.seed = 5;
  const SynthData total_data = generate(total_cfg, 1);
  BootstrapConfig boot;
  boot.n_replicates = 200;
  boot.seed = 11;
  std::vector<double> woba(total_data.matrix.n());
  const int woba_col = feature_index("batter_woba");
  for (std::size_t i = 0; i < woba.size(); ++i) {
    woba[i] = total_data.matrix.at(i, woba_col);
  }
  const PointEstimate total =
      ipw_ate(total_data.matrix.z, total_data.matrix.y, total_data.true_propensity);
  const auto single = stratified_ate(total_data.matrix.z, total_data.matrix.y,
                                     total_data.true_propensity, woba, "batter_woba",
                                     std::vector<double>{}, 1, boot, 1);
  require(single.size() == 1 && single[0].included, "all-covering stratum missing");
  require(single[0].ate.tau_hat == total.tau,
          "all-covering stratum tau differs from the total");

  // (b) Heterogeneous-tau preset: per-stratum 99% CIs cover the true taus
  // in at least 2 of 3 bins, propensities fit once globally.
  SynthConfig cfg = preset_hetero_by_woba();
  cfg.n_units = 30000;
  cfg.seed = 20240802;
  const SynthData data = generate(cfg, 1);

  ForestHyperparams hp;
  hp.seed = 7;
  const PropensityModel model = train_forest(data.matrix, hp, 1);
  const std::vector<double> p =
      clip_propensities(predict_all(model, data.matrix, 1), 0.01, nullptr);

  std::vector<double> feature(data.matrix.n());
  for (std::size_t i = 0; i < feature.size(); ++i) {
    feature[i] = data.matrix.at(i, woba_col);
  }
  BootstrapConfig hetero_boot;
  hetero_boot.n_replicates = 500;
  hetero_boot.level = 0.99;
  hetero_boot.seed = 13;
  const auto strata =
      stratified_ate(data.matrix.z, data.matrix.y, p, feature, "batter_woba",
                     cfg.hetero->edges, 1000, hetero_boot, 1);
  require(strata.size() == 3, "expected 3 strata");

  int covered = 0;
  std::ostringstream detail;
  for (std::size_t b = 0; b < strata.size(); ++b) {
    require(strata[b].included, "stratum below min_n unexpectedly");
    const double truth = cfg.hetero->taus[b];
    const bool hit = strata[b].ate.ci_low <= truth && truth <= strata[b].ate.ci_high;
    if (hit) ++covered;
    detail << (b ? ", " : "") << "bin" << b << " tau " << fmt(strata[b].ate.tau_hat)
           << (hit ? " covers " : " misses ") << fmt(truth);
  }
  require(covered >= 2, "only " + std::to_string(covered) + "/3 strata cover the truth (" +
                            detail.str() + ")");
  return "all-covering stratum exact; " + std::to_string(covered) + "/3 CIs cover (" +
         detail.str() + ")";
}

// ---------------------------------------------------------------------------
// 11. Zone classifier: exhaustive grid against an independent restatement.

std::string criterion_zone_grid() {
  auto brute = [](double x, double y, Hand hand) {
    if (y > 80.0) return DemandZone::Excluded;
    const bool right = hand == Hand::Right;
    if (right ? x >= 96.0 : x <= 64.0) return DemandZone::Inside;
    if (right ? x <= 64.0 : x >= 96.0) return DemandZone::Outside;
    return DemandZone::Excluded;
  };

  std::int64_t mismatches = 0;
  std::int64_t mirror_breaks = 0;
  for (int x = 0; x <= 160; ++x) {
    for (int y = 0; y <= 200; ++y) {
      for (Hand hand : {Hand::Right, Hand::Left}) {
        if (classify_demand_zone(x, y, hand) != brute(x, y, hand)) ++mismatches;
      }
      if (classify_demand_zone(x, y, Hand::Left) !=
          classify_demand_zone(160 - x, y, Hand::Right)) {
        ++mirror_breaks;
      }
    }
  }
  require(mismatches == 0, std::to_string(mismatches) + " grid mismatches");
  require(mirror_breaks == 0, std::to_string(mirror_breaks) + " mirror violations");
  return "64722 grid evaluations, zero mismatches, mirror symmetry exact";
}

struct Criterion {
  int id;
  const char* name;
  std::function<std::string()> run;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> list = {
      {1, "oracle ATE recovery", criterion_oracle_recovery},
      {2, "trivial-weight equivalence", criterion_trivial_weights},
      {3, "hand-checked IPW", criterion_hand_checked_ipw},
      {4, "balance restoration", criterion_balance_restoration},
      {5, "bootstrap coverage", criterion_bootstrap_coverage},
      {6, "confidence recursion", criterion_confidence_recursion},
      {7, "delta-RE telescoping", criterion_telescoping},
      {8, "RE calibration", criterion_re_calibration},
      {9, "forest determinism and skill", criterion_forest},
      {10, "stratified consistency", criterion_stratified},
      {11, "zone classifier grid", criterion_zone_grid},
  };
  return list;
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--criterion" && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else if (arg == "--list") {
      for (const auto& c : criteria()) std::printf("%2d  %s\n", c.id, c.name);
      return 0;
    } else {
      std::fprintf(stderr, "usage: %s [--criterion N | --list]\n", argv[0]);
      return 2;
    }
  }

  int failures = 0;
  int ran = 0;
  for (const auto& criterion : criteria()) {
    if (only != 0 && criterion.id != only) continue;
    ++ran;
    try {
      const std::string detail = criterion.run();
      std::printf("[PASS] criterion %d: %s (%s)\n", criterion.id, criterion.name,
                  detail.c_str());
    } catch (const CheckFailure& failure) {
      ++failures;
      std::printf("[FAIL] criterion %d: %s (%s)\n", criterion.id, criterion.name,
                  failure.message.c_str());
    } catch (const std::exception& e) {
      ++failures;
      std::printf("[FAIL] criterion %d: %s (unexpected error: %s)\n", criterion.id,
                  criterion.name, e.what());
    }
    std::fflush(stdout);
  }
  if (ran == 0) {
    std::fprintf(stderr, "no such criterion: %d\n", only);
    return 2;
  }
  return failures == 0 ? 0 : 1;
}
