#include <doctest.h>

#include <cmath>

#include "pitcheval/error.hpp"
#include "pitcheval/estimate.hpp"
#include "pitcheval/meta.hpp"
#include "pitcheval/synth.hpp"
#include "pitcheval/valuation.hpp"

using namespace pitcheval;

namespace {

// Exact run expectancy of the 24-state chain by solving the linear system
// V = A V + b with Gaussian elimination. Independent of build_re_table and
// generate_innings; serves as the closed-form oracle.
std::array<double, kBaseOutStateCount> solve_chain_re(
    const std::vector<std::pair<EventCode, double>>& probs) {
  constexpr int N = kBaseOutStateCount;
  std::array<std::array<double, N>, N> m{};
  std::array<double, N> b{};
  for (int s = 0; s < N; ++s) {
    m[s][s] = 1.0;
    const BaseOutState state = BaseOutState::from_index(s);
    for (const auto& [code, p] : probs) {
      const EventTransition t = apply_inning_event(state, code);
      b[s] += p * t.runs;
      if (t.after) m[s][t.after->index()] -= p;
    }
  }
  for (int col = 0; col < N; ++col) {
    int pivot = col;
    for (int r = col + 1; r < N; ++r) {
      if (std::fabs(m[r][col]) > std::fabs(m[pivot][col])) pivot = r;
    }
    std::swap(m[pivot], m[col]);
    std::swap(b[pivot], b[col]);
    for (int r = 0; r < N; ++r) {
      if (r == col || m[r][col] == 0.0) continue;
      const double f = m[r][col] / m[col][col];
      for (int c = col; c < N; ++c) m[r][c] -= f * m[col][c];
      b[r] -= f * b[col];
    }
  }
  std::array<double, N> v{};
  for (int s = 0; s < N; ++s) v[s] = b[s] / m[s][s];
  return v;
}

}  // namespace

TEST_CASE("generate: determinism and hidden propensities") {
  SynthConfig cfg = preset_confounded_strong();
  cfg.n_units = 2000;
  cfg.seed = 31;
  const SynthData a = generate(cfg);
  const SynthData b = generate(cfg);
  CHECK(a.matrix.x == b.matrix.x);
  CHECK(a.matrix.z == b.matrix.z);
  CHECK(a.matrix.y == b.matrix.y);
  CHECK(a.true_propensity == b.true_propensity);
  // Parallel generation agrees with serial.
  const SynthData c = generate(cfg, 4);
  CHECK(c.matrix.x == a.matrix.x);
  CHECK(c.matrix.y == a.matrix.y);

  cfg.seed = 32;
  const SynthData d = generate(cfg);
  CHECK(d.matrix.x != a.matrix.x);
}

TEST_CASE("generate: zero assignment coefficients mean p = 0.5 everywhere") {
  SynthConfig cfg = preset_randomized();
  cfg.n_units = 500;
  cfg.seed = 2;
  const SynthData data = generate(cfg);
  for (double p : data.true_propensity) CHECK(p == doctest::Approx(0.5));
}

TEST_CASE("generate: noiseless null baseline puts y in {0, tau}") {
  SynthConfig cfg = preset_randomized();
  cfg.n_units = 300;
  cfg.seed = 3;
  cfg.noise_sd = 0.0;
  cfg.outcome = LinearIndexSpec{};  // g == 0
  cfg.true_tau = 0.006;
  const SynthData data = generate(cfg);
  for (std::size_t i = 0; i < data.matrix.n(); ++i) {
    if (data.matrix.z[i]) {
      CHECK(data.matrix.y[i] == doctest::Approx(0.006));
    } else {
      CHECK(data.matrix.y[i] == doctest::Approx(0.0));
    }
  }
}

TEST_CASE("generate: randomized design makes naive and ipw agree") {
  SynthConfig cfg = preset_randomized();
  cfg.n_units = 60000;
  cfg.seed = 4;
  cfg.true_tau = 0.006;
  const SynthData data = generate(cfg);
  const NaiveResult naive = naive_diff(data.matrix.z, data.matrix.y);
  const PointEstimate est = ipw_ate(data.matrix.z, data.matrix.y, data.true_propensity);
  CHECK(std::fabs(naive.treated_minus_control - est.tau) < 0.002);
  CHECK(std::fabs(est.tau - 0.006) < 0.002);
}

TEST_CASE("generate: treated share matches mean true propensity within 3 se") {
  SynthConfig cfg = preset_confounded_strong();
  cfg.n_units = 30000;
  cfg.seed = 17;
  const SynthData data = generate(cfg);
  const double share =
      static_cast<double>(data.manifest.n_treated) / static_cast<double>(cfg.n_units);
  const double se = std::sqrt(data.manifest.mean_true_propensity *
                              (1.0 - data.manifest.mean_true_propensity) /
                              static_cast<double>(cfg.n_units));
  CHECK(std::fabs(share - data.manifest.mean_true_propensity) < 3.0 * se);
}

TEST_CASE("generate: out-of-range true propensity is rejected") {
  SynthConfig cfg = preset_randomized();
  cfg.n_units = 100;
  cfg.seed = 5;
  cfg.assignment.intercept = 5.0;  // logistic(5) > 0.98
  cfg.assignment.eta_clip = 0.0;   // disable the clamp
  CHECK_THROWS_AS(generate(cfg), Error);
  try {
    generate(cfg);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateAssignment);
  }
}

TEST_CASE("correlated confounders hit the configured correlation") {
  SynthConfig cfg = preset_confounded_strong();
  cfg.n_units = 60000;
  cfg.seed = 8;
  const SynthData data = generate(cfg);
  const int woba = feature_index("batter_woba");
  const int ratio = feature_index("batter_inside_ratio");
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  const double n = static_cast<double>(data.matrix.n());
  for (std::size_t i = 0; i < data.matrix.n(); ++i) {
    const double x = data.matrix.at(i, woba);
    const double y = data.matrix.at(i, ratio);
    sx += x;
    sy += y;
    sxx += x * x;
    syy += y * y;
    sxy += x * y;
  }
  const double r = (sxy - sx * sy / n) /
                   std::sqrt((sxx - sx * sx / n) * (syy - sy * sy / n));
  CHECK(r == doctest::Approx(0.31).epsilon(0.1));
}

TEST_CASE("manifest round-trip and oracle_ate") {
  SynthConfig cfg = preset_hetero_by_woba();
  cfg.n_units = 20000;
  cfg.seed = 44;
  const SynthData data = generate(cfg);

  // Heterogeneous oracle equals the brute-force average of per-unit taus.
  const int woba = feature_index("batter_woba");
  double expected = 0.0;
  for (std::size_t i = 0; i < data.matrix.n(); ++i) {
    const double v = data.matrix.at(i, woba);
    std::size_t bin = 0;
    while (bin < cfg.hetero->edges.size() && v >= cfg.hetero->edges[bin]) ++bin;
    expected += cfg.hetero->taus[bin];
  }
  expected /= static_cast<double>(data.matrix.n());
  CHECK(oracle_ate(data.manifest) == doctest::Approx(expected).epsilon(1e-12));

  const std::string path = "/tmp/pitcheval_test_manifest.json";
  save_manifest(path, data.manifest, MetaBlock{});
  const Manifest loaded = load_manifest(path);
  CHECK(oracle_ate(loaded) == doctest::Approx(oracle_ate(data.manifest)).epsilon(1e-15));
  CHECK(loaded.assignment.intercept == data.manifest.assignment.intercept);
  CHECK(loaded.n_treated == data.manifest.n_treated);

  // Homogeneous manifests return the stored tau.
  SynthConfig homog = preset_randomized();
  homog.n_units = 10;
  homog.true_tau = 0.006;
  homog.seed = 1;
  CHECK(oracle_ate(generate(homog).manifest) == doctest::Approx(0.006));
  SynthConfig null_tau = homog;
  null_tau.true_tau = 0.0;
  CHECK(oracle_ate(generate(null_tau).manifest) == doctest::Approx(0.0));

  CHECK_THROWS_AS(load_manifest("/tmp/pitcheval_no_such_manifest.json"), Error);
  try {
    load_manifest("/tmp/pitcheval_no_such_manifest.json");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingManifest);
  }
}

TEST_CASE("true propensities are recomputable from the manifest") {
  SynthConfig cfg = preset_confounded_strong();
  cfg.n_units = 1000;
  cfg.seed = 55;
  const SynthData data = generate(cfg);
  for (std::size_t i = 0; i < data.matrix.n(); ++i) {
    CHECK(true_propensity(data.manifest.assignment, data.matrix.row(i)) ==
          doctest::Approx(data.true_propensity[i]).epsilon(1e-15));
  }
}

TEST_CASE("generate_innings: outs-only chain gives three-out zero-run innings") {
  InningsConfig cfg;
  cfg.event_probs = {{EventCode::FieldOut, 1.0}};
  cfg.n_innings = 50;
  cfg.seed = 9;
  const auto innings = generate_innings(cfg);
  REQUIRE(innings.size() == 50);
  for (const auto& inning : innings) {
    CHECK(inning.events.size() == 3);
    int runs = 0;
    for (const auto& ev : inning.events) runs += ev.runs_scored;
    CHECK(runs == 0);
    CHECK(!inning.events.back().after.has_value());
  }
  const RunExpectancyTable table = build_re_table(innings);
  CHECK(table.value[0] == doctest::Approx(0.0));
}

TEST_CASE("generate_innings: HR/out chain matches the closed form") {
  // With events {home run q, out 1-q}: RE from (o, empty) is (3-o) q/(1-q).
  const double q = 0.2;
  InningsConfig cfg;
  cfg.event_probs = {{EventCode::HomeRun, q}, {EventCode::FieldOut, 1.0 - q}};
  cfg.n_innings = 60000;
  cfg.seed = 10;
  const auto innings = generate_innings(cfg, 4);
  const RunExpectancyTable table = build_re_table(innings);

  const double expected0 = 3.0 * q / (1.0 - q);
  CHECK(table.value[BaseOutState{0, {}}.index()] == doctest::Approx(expected0).epsilon(0.03));
  CHECK(table.value[BaseOutState{1, {}}.index()] ==
        doctest::Approx(2.0 * q / (1.0 - q)).epsilon(0.03));

  // And against the general linear-system oracle.
  const auto exact = solve_chain_re(cfg.event_probs);
  CHECK(exact[0] == doctest::Approx(expected0).epsilon(1e-10));
  for (int s = 0; s < kBaseOutStateCount; ++s) {
    if (table.sample_n[s] > 500) {
      CHECK(table.value[s] == doctest::Approx(exact[s]).epsilon(0.05));
    }
  }
}

TEST_CASE("generate_innings: chains, determinism and the calibrated preset") {
  InningsConfig cfg = innings_preset_calibrated();
  cfg.n_innings = 4000;
  cfg.seed = 77;
  const auto innings = generate_innings(cfg);

  // Transitions chain within each half-inning.
  for (const auto& inning : innings) {
    REQUIRE(!inning.events.empty());
    CHECK(inning.events.front().before.index() == 0);
    for (std::size_t k = 0; k + 1 < inning.events.size(); ++k) {
      REQUIRE(inning.events[k].after.has_value());
      CHECK(inning.events[k].after->index() == inning.events[k + 1].before.index());
    }
    CHECK(!inning.events.back().after.has_value());
  }

  const auto again = generate_innings(cfg);
  REQUIRE(again.size() == innings.size());
  for (std::size_t i = 0; i < innings.size(); ++i) {
    CHECK(again[i].events.size() == innings[i].events.size());
  }

  // Calibrated preset's exact chain value sits at the published anchor.
  const auto exact = solve_chain_re(cfg.event_probs);
  CHECK(exact[0] == doctest::Approx(0.44).epsilon(0.02));
}

TEST_CASE("calibrate_innings hits an exact target") {
  for (double target : {0.30, 0.44, 0.60}) {
    const InningsConfig calibrated = calibrate_innings(innings_preset_calibrated(), target);
    // Check with this file's independent solver, not the library's.
    const auto exact = solve_chain_re(calibrated.event_probs);
    CHECK(exact[0] == doctest::Approx(target).epsilon(1e-9));
    double total = 0.0;
    for (const auto& [code, p] : calibrated.event_probs) {
      CHECK(p >= 0.0);
      total += p;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(calibrate_innings(innings_preset_calibrated(), -0.4), Error);
  CHECK_THROWS_AS(calibrate_innings(innings_preset_calibrated(), 1e9), Error);
}

TEST_CASE("generate_innings: non-absorbing mixes are rejected") {
  InningsConfig cfg;
  cfg.event_probs = {{EventCode::Walk, 0.5}, {EventCode::Single, 0.5}};
  cfg.n_innings = 10;
  cfg.seed = 1;
  CHECK_THROWS_AS(generate_innings(cfg), Error);
  try {
    generate_innings(cfg);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonterminatingChain);
  }

  InningsConfig bad_sum;
  bad_sum.event_probs = {{EventCode::FieldOut, 0.4}};
  bad_sum.n_innings = 10;
  CHECK_THROWS_AS(generate_innings(bad_sum), Error);
}
