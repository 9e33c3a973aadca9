#include <benchmark/benchmark.h>

#include "pitcheval/csv.hpp"
#include "pitcheval/ingest.hpp"

using namespace pitcheval;

namespace {

void BM_ClassifyZone(benchmark::State& state) {
  for (auto _ : state) {
    for (int x = 0; x <= 160; x += 4) {
      for (int y = 0; y <= 200; y += 4) {
        benchmark::DoNotOptimize(classify_demand_zone(x, y, Hand::Right));
        benchmark::DoNotOptimize(classify_demand_zone(x, y, Hand::Left));
      }
    }
  }
}
BENCHMARK(BM_ClassifyZone)->Unit(benchmark::kMicrosecond);

void BM_SplitCsvLine(benchmark::State& state) {
  const std::string line =
      "g001,2024-07-02,5,top,p42,b19,c3,2,1,1,1,0,1,-2,4,61,four-seam,145.2,"
      "101.5,63.25,99.0,70.5,R,L,swinging_strike_out,0";
  for (auto _ : state) {
    benchmark::DoNotOptimize(split_csv_line(line));
  }
}
BENCHMARK(BM_SplitCsvLine);

}  // namespace
