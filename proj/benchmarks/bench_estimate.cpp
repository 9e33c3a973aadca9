#include <benchmark/benchmark.h>

#include "pitcheval/estimate.hpp"
#include "pitcheval/synth.hpp"

using namespace pitcheval;

namespace {

void BM_IpwAte(benchmark::State& state) {
  SynthConfig cfg = preset_confounded_strong();
  cfg.n_units = state.range(0);
  cfg.seed = 3;
  const SynthData data = generate(cfg);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ipw_ate(data.matrix.z, data.matrix.y, data.true_propensity));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_IpwAte)->Arg(50000)->Unit(benchmark::kMicrosecond);

void BM_BootstrapCi(benchmark::State& state) {
  SynthConfig cfg = preset_confounded_strong();
  cfg.n_units = 5000;
  cfg.seed = 3;
  const SynthData data = generate(cfg);
  BootstrapConfig boot;
  boot.n_replicates = static_cast<int>(state.range(0));
  boot.seed = 4;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        bootstrap_ci(data.matrix.z, data.matrix.y, data.true_propensity, boot));
  }
}
BENCHMARK(BM_BootstrapCi)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

}  // namespace
