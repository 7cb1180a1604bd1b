// benchmarks/bench_gmm.cpp

#include <benchmark/benchmark.h>

#include "chanfuse/gmm.hpp"
#include "chanfuse/scenegen.hpp"

namespace {

void BM_UtteranceScore(benchmark::State& state) {
  const chanfuse::GmmModel ref = chanfuse::reference_model(40, static_cast<int>(state.range(0)), 7);
  const chanfuse::FeatureMatrix f = chanfuse::sample_features(ref, 700, 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(chanfuse::utterance_score(ref, f));
  }
  state.SetItemsProcessed(state.iterations() * 700);
}
BENCHMARK(BM_UtteranceScore)->Arg(64)->Arg(512);

void BM_GmmTrain(benchmark::State& state) {
  const chanfuse::GmmModel ref = chanfuse::reference_model(40, 8, 7);
  const chanfuse::FeatureMatrix frames = chanfuse::sample_features(ref, 2000, 5);
  chanfuse::EmConfig cfg;
  cfg.max_iters = 5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        chanfuse::gmm_train(frames.frames, static_cast<int>(state.range(0)), cfg));
  }
}
BENCHMARK(BM_GmmTrain)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace
