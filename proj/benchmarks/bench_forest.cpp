#include <benchmark/benchmark.h>

#include "pitcheval/propensity.hpp"
#include "pitcheval/synth.hpp"

using namespace pitcheval;

namespace {

SynthData make_data(std::int64_t n) {
  SynthConfig cfg = preset_confounded_strong();
  cfg.n_units = n;
  cfg.seed = 1;
  return generate(cfg);
}

void BM_TrainForest(benchmark::State& state) {
  const SynthData data = make_data(state.range(0));
  ForestHyperparams hp;
  hp.n_trees = 16;
  hp.seed = 2;
  for (auto _ : state) {
    benchmark::DoNotOptimize(train_forest(data.matrix, hp));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TrainForest)->Arg(2000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_PredictAll(benchmark::State& state) {
  const SynthData data = make_data(state.range(0));
  ForestHyperparams hp;
  hp.seed = 2;
  const PropensityModel model = train_forest(data.matrix, hp);
  for (auto _ : state) {
    benchmark::DoNotOptimize(predict_all(model, data.matrix));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_PredictAll)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace
