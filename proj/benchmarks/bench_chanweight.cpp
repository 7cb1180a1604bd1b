// benchmarks/bench_chanweight.cpp

#include <benchmark/benchmark.h>

#include "chanfuse/chanweight.hpp"
#include "chanfuse/rng.hpp"
#include "chanfuse/scenegen.hpp"

namespace {

chanfuse::MultichannelUtterance bench_utterance(int channels, int frames) {
  const chanfuse::GmmModel ref = chanfuse::reference_model(40, 8, 7);
  const chanfuse::FeatureMatrix clean = chanfuse::sample_features(ref, frames, 11);
  chanfuse::MultichannelUtterance u;
  chanfuse::Rng rng(13);
  for (int c = 0; c < channels; ++c) {
    chanfuse::FeatureMatrix ch = clean;
    const double sigma = 0.1 + 0.15 * c;
    for (Eigen::Index t = 0; t < ch.frames.rows(); ++t) {
      for (int d = 0; d < 40; ++d) ch.frames(t, d) += sigma * rng.normal();
    }
    u.channels.push_back(chanfuse::normalize(ch, chanfuse::NormState::kCmnCvn));
  }
  return u;
}

void BM_FrameAccumulators(benchmark::State& state) {
  const chanfuse::GmmModel ref = chanfuse::reference_model(40, 64, 7);
  const chanfuse::MultichannelUtterance u = bench_utterance(6, 8);
  const Eigen::MatrixXd stack = u.frame_stack(0);
  const Eigen::VectorXd gamma = Eigen::VectorXd::Constant(64, 1.0 / 64);
  for (auto _ : state) {
    benchmark::DoNotOptimize(chanfuse::frame_accumulators(ref, stack, gamma));
  }
}
BENCHMARK(BM_FrameAccumulators);

void BM_EstimateWeightsMl(benchmark::State& state) {
  const chanfuse::GmmModel ref = chanfuse::reference_model(40, 64, 7);
  const chanfuse::MultichannelUtterance u = bench_utterance(6, static_cast<int>(state.range(0)));
  const chanfuse::JacobianConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(chanfuse::estimate_weights_ml(ref, u, cfg));
  }
}
BENCHMARK(BM_EstimateWeightsMl)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_EstimateWeightsJacobian(benchmark::State& state) {
  const chanfuse::GmmModel ref = chanfuse::reference_model(40, 64, 7);
  const chanfuse::MultichannelUtterance u = bench_utterance(6, static_cast<int>(state.range(0)));
  const chanfuse::JacobianConfig cfg;
  const chanfuse::LbfgsConfig lbfgs;
  for (auto _ : state) {
    benchmark::DoNotOptimize(chanfuse::estimate_weights_jacobian(ref, u, cfg, lbfgs));
  }
}
BENCHMARK(BM_EstimateWeightsJacobian)->Arg(200)->Unit(benchmark::kMillisecond);

}  // namespace
