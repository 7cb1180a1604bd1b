// benchmarks/bench_featkit.cpp

#include <benchmark/benchmark.h>

#include "chanfuse/featkit.hpp"
#include "chanfuse/rng.hpp"

namespace {

chanfuse::AudioBuffer noise_seconds(double seconds) {
  chanfuse::Rng rng(1);
  chanfuse::AudioBuffer a;
  a.samples.resize(static_cast<std::size_t>(seconds * 16000));
  for (auto& s : a.samples) s = 0.1 * rng.normal();
  return a;
}

void BM_LogMel(benchmark::State& state) {
  const chanfuse::AudioBuffer audio = noise_seconds(static_cast<double>(state.range(0)));
  const chanfuse::MelConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(chanfuse::log_mel(audio, cfg));
  }
  state.SetItemsProcessed(state.iterations() * (audio.samples.size() - 400) / 160);
}
BENCHMARK(BM_LogMel)->Arg(1)->Arg(7);

void BM_Normalize(benchmark::State& state) {
  chanfuse::Rng rng(2);
  chanfuse::FeatureMatrix f;
  f.frames.resize(state.range(0), 40);
  for (Eigen::Index t = 0; t < f.frames.rows(); ++t) {
    for (int d = 0; d < 40; ++d) f.frames(t, d) = rng.normal();
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(chanfuse::normalize(f, chanfuse::NormState::kCmnCvn));
  }
}
BENCHMARK(BM_Normalize)->Arg(200)->Arg(700);

}  // namespace
