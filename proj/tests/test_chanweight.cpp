// tests/test_chanweight.cpp

#include <cmath>

#include <Eigen/Dense>

#include <doctest.h>

#include "chanfuse/chanweight.hpp"
#include "chanfuse/scenegen.hpp"
#include "test_util.hpp"

using namespace chanfuse;

namespace {

MultichannelUtterance normalized_utterance(int channels, Eigen::Index frames, Eigen::Index dim,
                                           std::uint64_t seed) {
  MultichannelUtterance u = testutil::random_utterance(channels, frames, dim, seed);
  for (FeatureMatrix& ch : u.channels) ch = normalize(ch, NormState::kCmnCvn);
  return u;
}

// Scene-like utterance: every channel is a noisy copy of clean model samples.
MultichannelUtterance noisy_copies(const FeatureMatrix& clean, const std::vector<double>& sigmas,
                                   std::uint64_t seed) {
  MultichannelUtterance u;
  for (std::size_t c = 0; c < sigmas.size(); ++c) {
    FeatureMatrix ch = clean;
    Rng rng(Rng::mix(seed, c));
    for (Eigen::Index t = 0; t < ch.frames.rows(); ++t) {
      for (Eigen::Index d = 0; d < ch.frames.cols(); ++d) {
        ch.frames(t, d) += sigmas[c] * rng.normal();
      }
    }
    u.channels.push_back(ch);
  }
  return u;
}

}  // namespace

TEST_SUITE("chanweight") {

TEST_CASE("one-hot weights reproduce the channel exactly") {
  const MultichannelUtterance u = testutil::random_utterance(4, 12, 5, 1);
  for (int hot = 0; hot < 4; ++hot) {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(4);
    w[hot] = 1.0;
    const FeatureMatrix fused = apply_weights(u, w);
    CHECK(fused.frames == u.channels[hot].frames);
  }
}

TEST_CASE("identical channels collapse under any unit-sum weighting") {
  const FeatureMatrix ch = testutil::random_features(10, 4, 2);
  MultichannelUtterance u;
  u.channels = {ch, ch, ch};
  Eigen::VectorXd w(3);
  w << 0.2, 0.5, 0.3;
  CHECK((apply_weights(u, w).frames - ch.frames).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("opposite channels cancel under equal weights") {
  const FeatureMatrix ch = testutil::random_features(8, 3, 3);
  FeatureMatrix neg;
  neg.frames = -ch.frames;
  MultichannelUtterance u;
  u.channels = {ch, neg};
  Eigen::VectorXd w(2);
  w << 0.5, 0.5;
  CHECK(apply_weights(u, w).frames.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("scalar accumulators reduce to the textbook forms") {
  GmmModel model;
  model.weights = Eigen::VectorXd::Ones(1);
  model.means.resize(1, 3);
  model.means << 0.5, -1.0, 2.0;
  model.vars = Eigen::MatrixXd::Ones(1, 3);

  Eigen::MatrixXd stack(3, 1);
  stack << 1.0, 2.0, -0.5;
  const FrameAccumulators acc = frame_accumulators(model, stack, Eigen::VectorXd::Ones(1));
  CHECK(acc.a(0, 0) == doctest::Approx(stack.col(0).squaredNorm()).epsilon(1e-14));
  CHECK(acc.b[0] == doctest::Approx(stack.col(0).dot(model.means.row(0).transpose())).epsilon(1e-14));
}

TEST_CASE("a one-hot posterior keeps a single component's terms") {
  const GmmModel model = testutil::random_gmm(3, 4, 4);
  const Eigen::MatrixXd stack = testutil::random_features(4, 2, 5).frames.transpose();
  Eigen::VectorXd gamma = Eigen::VectorXd::Zero(3);
  gamma[1] = 1.0;
  const FrameAccumulators acc = frame_accumulators(model, stack, gamma);

  const Eigen::VectorXd inv = model.vars.row(1).cwiseInverse().transpose();
  const Eigen::MatrixXd expected_a = stack.transpose() * inv.asDiagonal() * stack;
  const Eigen::VectorXd expected_b =
      stack.transpose() * (model.means.row(1).transpose().cwiseProduct(inv));
  CHECK((acc.a - expected_a).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((acc.b - expected_b).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("accumulators match a dense per-component oracle") {
  const GmmModel model = testutil::random_gmm(5, 6, 6);
  Rng rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::MatrixXd stack(6, 3);
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 3; ++j) stack(i, j) = rng.uniform(-2.0, 2.0);
    }
    Eigen::VectorXd gamma(5);
    for (int m = 0; m < 5; ++m) gamma[m] = rng.uniform(0.01, 1.0);
    gamma /= gamma.sum();

    Eigen::MatrixXd dense_a = Eigen::MatrixXd::Zero(3, 3);
    Eigen::VectorXd dense_b = Eigen::VectorXd::Zero(3);
    for (int m = 0; m < 5; ++m) {
      const Eigen::MatrixXd sigma_inv = model.vars.row(m).cwiseInverse().asDiagonal();
      dense_a += gamma[m] * stack.transpose() * sigma_inv * stack;
      dense_b += gamma[m] * stack.transpose() * sigma_inv * model.means.row(m).transpose();
    }
    const FrameAccumulators acc = frame_accumulators(model, stack, gamma);
    CHECK((acc.a - dense_a).cwiseAbs().maxCoeff() / dense_a.cwiseAbs().maxCoeff() < 1e-10);
    CHECK((acc.b - dense_b).cwiseAbs().maxCoeff() / dense_b.cwiseAbs().maxCoeff() < 1e-10);
    CHECK((acc.a - acc.a.transpose()).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(acc.a).eigenvalues().minCoeff() >= -1e-10);
  }
}

TEST_CASE("frame weight solves the normal equations") {
  FrameAccumulators acc;
  acc.a = Eigen::MatrixXd::Identity(3, 3);
  acc.b = Eigen::VectorXd::LinSpaced(3, 1.0, 3.0);
  CHECK((solve_frame_weight(acc, 0.0) - acc.b).cwiseAbs().maxCoeff() < 1e-12);

  acc.a = Eigen::Vector2d(2.0, 4.0).asDiagonal();
  acc.b = Eigen::Vector2d(2.0, 8.0);
  const Eigen::VectorXd w = solve_frame_weight(acc, 0.0);
  CHECK(w[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(w[1] == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("the solved weight maximizes the quadratic on a local grid") {
  Rng rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::MatrixXd root(3, 3);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) root(i, j) = rng.uniform(-1.0, 1.0);
    }
    FrameAccumulators acc;
    acc.a = root.transpose() * root + 0.1 * Eigen::MatrixXd::Identity(3, 3);
    acc.b.resize(3);
    for (int i = 0; i < 3; ++i) acc.b[i] = rng.uniform(-1.0, 1.0);

    const Eigen::VectorXd w = solve_frame_weight(acc, 0.0);
    const auto quad = [&](const Eigen::VectorXd& v) {
      return -0.5 * v.dot(acc.a * v) + acc.b.dot(v);
    };
    const double best = quad(w);
    for (int i = 0; i < 3; ++i) {
      for (double delta : {-0.01, 0.01, -0.1, 0.1}) {
        Eigen::VectorXd v = w;
        v[i] += delta;
        CHECK(quad(v) <= best);
      }
    }
  }
}

TEST_CASE("a singular system is reported as a degenerate frame") {
  FrameAccumulators acc;
  acc.a = Eigen::MatrixXd::Zero(2, 2);
  acc.b = Eigen::Vector2d(1.0, 1.0);
  CHECK_THROWS_WITH_AS(static_cast<void>(solve_frame_weight(acc, 0.0)), "degenerate frame",
                       std::runtime_error);
}

TEST_CASE("softmax maps onto the open simplex") {
  WeightVector w;
  w.w = Eigen::VectorXd::Zero(3);
  const WeightVector u = softmax_constrain(w);
  CHECK(u.kind == WeightKind::kSoftmax);
  for (int i = 0; i < 3; ++i) CHECK(u.w[i] == doctest::Approx(1.0 / 3).epsilon(1e-12));

  w.w.resize(2);
  w.w << std::log(2.0), 0.0;
  const WeightVector v = softmax_constrain(w);
  CHECK(v.w[0] == doctest::Approx(2.0 / 3).epsilon(1e-12));
  CHECK(v.w[1] == doctest::Approx(1.0 / 3).epsilon(1e-12));

  w.w << 1000.0, 0.0;
  const WeightVector s = softmax_constrain(w);
  CHECK(s.w.allFinite());
  CHECK(s.w[0] == doctest::Approx(1.0).epsilon(1e-9));

  Rng rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    WeightVector r;
    r.w.resize(4);
    for (int i = 0; i < 4; ++i) r.w[i] = rng.uniform(-30.0, 30.0);
    const WeightVector m = softmax_constrain(r);
    CHECK(m.w.minCoeff() > 0.0);
    CHECK(std::abs(m.w.sum() - 1.0) < 1e-9);

    WeightVector shifted = r;
    shifted.w.array() += 5.75;
    CHECK((softmax_constrain(shifted).w - m.w).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("weighted stats match the two-pass covariance oracle") {
  const double eps = 1e-6;

  // Constant fused features: covariance is exactly the regularizer.
  MultichannelUtterance constant;
  FeatureMatrix ones;
  ones.frames = Eigen::MatrixXd::Ones(5, 3);
  constant.channels = {ones, ones};
  const WeightedStats cs = weighted_stats(constant, Eigen::Vector2d(0.4, 0.6), eps);
  CHECK((cs.cov - eps * Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-15);

  // One-dimensional arithmetic case: values {0, 2}.
  MultichannelUtterance tiny;
  FeatureMatrix a;
  a.frames.resize(2, 1);
  a.frames << 0.0, 2.0;
  tiny.channels = {a};
  const WeightedStats ts = weighted_stats(tiny, Eigen::VectorXd::Ones(1), eps);
  CHECK(ts.mean[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(ts.cov(0, 0) == doctest::Approx(1.0 + eps).epsilon(1e-12));

  // Random case vs the textbook two-pass formula.
  const MultichannelUtterance u = testutil::random_utterance(3, 40, 4, 10);
  Eigen::VectorXd w(3);
  w << 0.2, 0.3, 0.5;
  const WeightedStats ws = weighted_stats(u, w, eps);
  const FeatureMatrix fused = apply_weights(u, w);
  const Eigen::RowVectorXd mean = fused.frames.colwise().mean();
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(4, 4);
  for (Eigen::Index t = 0; t < 40; ++t) {
    const Eigen::VectorXd dev = (fused.frames.row(t) - mean).transpose();
    cov += dev * dev.transpose();
  }
  cov /= 40.0;
  cov += eps * Eigen::MatrixXd::Identity(4, 4);
  CHECK((ws.cov - cov).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((ws.mean.transpose() - mean).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((ws.cov - ws.cov.transpose()).cwiseAbs().maxCoeff() < 1e-12);

  CHECK_THROWS_AS(static_cast<void>(weighted_stats(
                      MultichannelUtterance{{testutil::random_features(1, 2, 1)}},
                      Eigen::VectorXd::Ones(1), eps)),
                  std::runtime_error);
}

TEST_CASE("with beta 0 the objective is the fused utterance score") {
  const GmmModel model = testutil::random_gmm(3, 4, 11);
  const MultichannelUtterance u = normalized_utterance(3, 25, 4, 12);
  Eigen::VectorXd w(3);
  w << 0.5, 0.25, 0.25;
  JacobianConfig cfg;
  cfg.beta = 0.0;
  const double obj = jacobian_objective(model, u, w, cfg);
  CHECK(obj == doctest::Approx(utterance_score(model, apply_weights(u, w))).epsilon(1e-14));
}

TEST_CASE("identity covariance makes the log-determinant term vanish") {
  // Orthonormal-ish construction: two frames, one dimension, values +1/-1
  // give unit variance exactly; epsilon is negligible.
  MultichannelUtterance u;
  FeatureMatrix f;
  f.frames.resize(2, 1);
  f.frames << 1.0, -1.0;
  u.channels = {f};
  const GmmModel model = testutil::random_gmm(2, 1, 13);
  JacobianConfig cfg;
  cfg.beta = 1.0;
  cfg.cov_epsilon = 1e-12;
  const double with_pen = jacobian_objective(model, u, Eigen::VectorXd::Ones(1), cfg);
  cfg.beta = 0.0;
  const double without = jacobian_objective(model, u, Eigen::VectorXd::Ones(1), cfg);
  CHECK(std::abs(with_pen - without) < 1e-10);
}

TEST_CASE("doubling the weights shifts the log-determinant by 2 D log 2") {
  const MultichannelUtterance u = normalized_utterance(2, 60, 5, 14);
  Eigen::VectorXd w(2);
  w << 0.7, 0.4;
  const double eps = 1e-12;
  const double ld1 = std::log(weighted_stats(u, w, eps).cov.determinant());
  const double ld2 = std::log(weighted_stats(u, 2.0 * w, eps).cov.determinant());
  CHECK(ld2 - ld1 == doctest::Approx(2.0 * 5 * std::log(2.0)).epsilon(1e-6));
}

TEST_CASE("the gradient matches finite differences of the frozen objective") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const int channels = 2 + static_cast<int>(seed % 3);
    const GmmModel model = testutil::random_gmm(3, 6, 200 + seed);
    const MultichannelUtterance u = normalized_utterance(channels, 30, 6, 300 + seed);
    Eigen::VectorXd w = Eigen::VectorXd::Constant(channels, 1.0 / channels);
    Rng rng(400 + seed);
    for (int c = 0; c < channels; ++c) w[c] += 0.2 * rng.uniform(-1.0, 1.0);

    JacobianConfig cfg;
    cfg.beta = (seed % 3 == 0) ? 0.0 : (seed % 3 == 1 ? 0.5 : 1.0);
    const Eigen::MatrixXd gamma = fused_posteriors(model, u, w);
    const Eigen::VectorXd analytic = jacobian_gradient(model, u, gamma, w, cfg);
    const auto frozen = [&](const Eigen::VectorXd& v) {
      return auxiliary_objective(model, u, gamma, v, cfg);
    };
    const Eigen::VectorXd numeric = finite_diff_grad(frozen, w, 1e-6);
    const double scale = std::max(analytic.cwiseAbs().maxCoeff(), 1e-8);
    CHECK((analytic - numeric).cwiseAbs().maxCoeff() / scale < 1e-5);
  }
}

TEST_CASE("the scalar case matches hand calculus") {
  // One channel of all-ones features, a single unit-variance component:
  // aux(w) = -(D/2) (w - mean_avg)^2 + const, so the gradient is
  // D (mean_avg - w).
  GmmModel model;
  model.weights = Eigen::VectorXd::Ones(1);
  model.means.resize(1, 3);
  model.means << 0.3, -0.1, 0.7;
  model.vars = Eigen::MatrixXd::Ones(1, 3);

  MultichannelUtterance u;
  FeatureMatrix ones;
  ones.frames = Eigen::MatrixXd::Ones(4, 3);
  u.channels = {ones};

  JacobianConfig cfg;
  cfg.beta = 0.0;
  Eigen::VectorXd w(1);
  w << 0.4;
  const Eigen::MatrixXd gamma = Eigen::MatrixXd::Ones(4, 1);
  const Eigen::VectorXd grad = jacobian_gradient(model, u, gamma, w, cfg);
  const double expected = 3.0 * (model.means.row(0).mean() - w[0]);
  CHECK(grad[0] == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("identical channels get identical gradient components and weights") {
  const GmmModel model = testutil::random_gmm(3, 4, 15);
  const FeatureMatrix ch = normalize(testutil::random_features(30, 4, 16), NormState::kCmnCvn);
  MultichannelUtterance u;
  u.channels = {ch, ch, ch};

  JacobianConfig cfg;
  const Eigen::VectorXd w = Eigen::VectorXd::Constant(3, 0.3);
  const Eigen::VectorXd grad = jacobian_gradient(model, u, w, cfg);
  CHECK(std::abs(grad[0] - grad[1]) < 1e-10);
  CHECK(std::abs(grad[1] - grad[2]) < 1e-10);

  const WeightVector ml = estimate_weights_ml(model, u, cfg);
  CHECK(std::abs(ml.w[0] - ml.w[1]) < 1e-8);
  CHECK(std::abs(ml.w[1] - ml.w[2]) < 1e-8);

  const WeightVector jac = estimate_weights_jacobian(model, u, cfg, LbfgsConfig{});
  CHECK(std::abs(jac.w[0] - jac.w[1]) < 1e-6);
  CHECK(std::abs(jac.w[1] - jac.w[2]) < 1e-6);
}

TEST_CASE("the auxiliary quadratic tracks the posterior-weighted log-density") {
  // Evaluated at several weights, differences of the two forms agree: they
  // differ only by a weight-independent constant.
  const GmmModel model = testutil::random_gmm(4, 3, 17);
  MultichannelUtterance u;
  u.channels = {testutil::random_features(1, 3, 18), testutil::random_features(1, 3, 19)};

  Eigen::VectorXd gamma(4);
  gamma << 0.4, 0.3, 0.2, 0.1;
  const Eigen::MatrixXd stack = u.frame_stack(0);
  const FrameAccumulators acc = frame_accumulators(model, stack, gamma);

  const GmmScorer scorer(model);
  const auto weighted_logdens = [&](const Eigen::VectorXd& w) {
    return gamma.dot(scorer.component_log_terms(stack * w));
  };
  const auto quadratic = [&](const Eigen::VectorXd& w) {
    return -0.5 * w.dot(acc.a * w) + acc.b.dot(w);
  };

  Rng rng(20);
  Eigen::VectorXd w0(2);
  w0 << 0.5, 0.5;
  const double offset = weighted_logdens(w0) - quadratic(w0);
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::VectorXd w(2);
    w << rng.uniform(-1.0, 1.5), rng.uniform(-1.0, 1.5);
    CHECK(weighted_logdens(w) - quadratic(w) == doctest::Approx(offset).epsilon(1e-8));
  }
}

TEST_CASE("single-channel model-matched data estimates a weight near one") {
  const GmmModel ref = reference_model(6, 4, 21);
  MultichannelUtterance u;
  u.channels = {sample_features(ref, 1000, 22)};
  JacobianConfig cfg;
  const WeightVector w = estimate_weights_ml(ref, u, cfg);
  CHECK(std::abs(w.w[0] - 1.0) < 0.1);
}

TEST_CASE("the cleaner channel receives the larger weight") {
  const GmmModel ref = reference_model(6, 4, 23);
  int wins = 0;
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    const FeatureMatrix clean = sample_features(ref, 60, 5000 + trial);
    MultichannelUtterance u;
    u.channels.push_back(clean);
    FeatureMatrix biased = clean;
    biased.frames.array() += 3.0;  // strong additive bias
    Rng rng(6000 + trial);
    for (Eigen::Index t = 0; t < biased.frames.rows(); ++t) {
      for (int d = 0; d < 6; ++d) biased.frames(t, d) += 0.5 * rng.normal();
    }
    u.channels.push_back(biased);
    const WeightVector w = estimate_weights_ml(ref, u, JacobianConfig{});
    if (w.w[0] > w.w[1]) ++wins;
  }
  CHECK(wins >= 95);
}

TEST_CASE("weight estimation commutes with channel permutation") {
  const GmmModel model = testutil::random_gmm(3, 4, 24);
  const MultichannelUtterance u = normalized_utterance(3, 25, 4, 25);
  MultichannelUtterance swapped;
  swapped.channels = {u.channels[2], u.channels[0], u.channels[1]};

  const JacobianConfig cfg;
  const WeightVector base = estimate_weights_ml(model, u, cfg);
  const WeightVector moved = estimate_weights_ml(model, swapped, cfg);
  CHECK(std::abs(moved.w[0] - base.w[2]) < 1e-12);
  CHECK(std::abs(moved.w[1] - base.w[0]) < 1e-12);
  CHECK(std::abs(moved.w[2] - base.w[1]) < 1e-12);
}

TEST_CASE("with beta 0 and frozen posteriors the optimizer matches the pooled solve") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const GmmModel model = testutil::random_gmm(3, 5, 600 + seed);
    const MultichannelUtterance u = normalized_utterance(3, 40, 5, 700 + seed);

    JacobianConfig cfg;
    cfg.beta = 0.0;
    cfg.em_iters = 1;  // single outer loop: posteriors from the uniform start
    const WeightVector opt = estimate_weights_jacobian(model, u, cfg, LbfgsConfig{});

    const Eigen::VectorXd w0 = Eigen::VectorXd::Constant(3, 1.0 / 3);
    const Eigen::MatrixXd gamma = fused_posteriors(model, u, w0);
    const PooledAccumulators pooled = pooled_accumulators(model, u, gamma);
    const Eigen::VectorXd closed = pooled.a.ldlt().solve(pooled.b);
    CHECK((opt.w - closed).cwiseAbs().maxCoeff() < 1e-4);
  }
}

TEST_CASE("the outer loop objective is non-decreasing") {
  const GmmModel ref = reference_model(5, 4, 26);
  for (std::uint64_t trial = 0; trial < 5; ++trial) {
    const FeatureMatrix clean = sample_features(ref, 50, 800 + trial);
    const MultichannelUtterance u = noisy_copies(clean, {0.3, 0.9, 0.6}, 900 + trial);
    MultichannelUtterance norm_u;
    for (const FeatureMatrix& ch : u.channels) {
      norm_u.channels.push_back(normalize(ch, NormState::kCmnCvn));
    }
    JacobianConfig cfg;
    JacobianDiagnostics diag;
    static_cast<void>(estimate_weights_jacobian(ref, norm_u, cfg, LbfgsConfig{}, &diag));
    REQUIRE(diag.outer_objectives.size() == static_cast<std::size_t>(cfg.em_iters) + 1);
    for (std::size_t i = 1; i < diag.outer_objectives.size(); ++i) {
      CHECK(diag.outer_objectives[i] >= diag.outer_objectives[i - 1] - 1e-6);
    }
  }
}

TEST_CASE("the variance penalty keeps fused variance from shrinking") {
  const GmmModel ref = reference_model(5, 4, 27);
  int wins = 0;
  for (std::uint64_t trial = 0; trial < 10; ++trial) {
    const FeatureMatrix clean = sample_features(ref, 60, 1000 + trial);
    const MultichannelUtterance u = noisy_copies(clean, {0.2, 0.8, 0.5}, 1100 + trial);
    MultichannelUtterance norm_u;
    for (const FeatureMatrix& ch : u.channels) {
      norm_u.channels.push_back(normalize(ch, NormState::kCmnCvn));
    }
    JacobianConfig cfg;
    const WeightVector raw = estimate_weights_ml(ref, norm_u, cfg);
    cfg.beta = 1.0;
    const WeightVector jac = estimate_weights_jacobian(ref, norm_u, cfg, LbfgsConfig{});
    const double trace_raw = weighted_stats(norm_u, raw.w, cfg.cov_epsilon).cov.trace();
    const double trace_jac = weighted_stats(norm_u, jac.w, cfg.cov_epsilon).cov.trace();
    if (trace_jac >= trace_raw) ++wins;
  }
  CHECK(wins >= 9);
}

TEST_CASE("length mismatches are rejected") {
  const MultichannelUtterance u = testutil::random_utterance(3, 10, 4, 28);
  CHECK_THROWS_AS(static_cast<void>(apply_weights(u, Eigen::VectorXd::Ones(2))),
                  std::invalid_argument);
}

}  // TEST_SUITE
