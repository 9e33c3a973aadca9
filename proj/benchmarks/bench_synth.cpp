#include <benchmark/benchmark.h>

#include "pitcheval/synth.hpp"
#include "pitcheval/valuation.hpp"

using namespace pitcheval;

namespace {

void BM_GenerateUnits(benchmark::State& state) {
  SynthConfig cfg = preset_confounded_strong();
  cfg.n_units = state.range(0);
  cfg.seed = 5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(generate(cfg));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GenerateUnits)->Arg(10000)->Arg(50000)->Unit(benchmark::kMillisecond);

void BM_GenerateInnings(benchmark::State& state) {
  InningsConfig cfg = innings_preset_calibrated();
  cfg.n_innings = state.range(0);
  cfg.seed = 6;
  for (auto _ : state) {
    const auto innings = generate_innings(cfg);
    benchmark::DoNotOptimize(build_re_table(innings));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GenerateInnings)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace
