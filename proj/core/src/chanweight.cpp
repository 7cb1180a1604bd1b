// core/src/chanweight.cpp

// Copyright 2026  Chanfuse Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "chanfuse/chanweight.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Cholesky>

namespace chanfuse {

const char* weight_kind_name(WeightKind k) {
  switch (k) {
    case WeightKind::kRawMl: return "raw_ml";
    case WeightKind::kSoftmax: return "softmax";
    case WeightKind::kJacobian: return "jacobian";
  }
  return "unknown";
}

FeatureMatrix apply_weights(const MultichannelUtterance& u, const Eigen::VectorXd& w) {
  u.validate();
  if (w.size() != u.num_channels()) throw std::invalid_argument("apply_weights: weight length mismatch");
  FeatureMatrix out;
  out.frames = Eigen::MatrixXd::Zero(u.num_frames(), u.dim());
  for (int c = 0; c < u.num_channels(); ++c) out.frames += w[c] * u.channels[c].frames;
  out.norm = NormState::kRaw;
  return out;
}

FrameAccumulators frame_accumulators(const GmmModel& model, const Eigen::MatrixXd& frame_stack,
                                     const Eigen::VectorXd& posteriors) {
  if (frame_stack.rows() != model.dim()) {
    throw std::invalid_argument("frame_accumulators: stack dimension mismatch");
  }
  if (posteriors.size() != model.num_components()) {
    throw std::invalid_argument("frame_accumulators: posterior length mismatch");
  }
  // The component sum collapses onto a single diagonal because all
  // covariances are diagonal:
  //   sum_m g_m X' Sigma_m^{-1} X = X' diag(sum_m g_m / var_m) X.
  const Eigen::MatrixXd inv_vars = model.vars.cwiseInverse();
  const Eigen::VectorXd s = inv_vars.transpose() * posteriors;                       // D
  const Eigen::VectorXd r = (model.means.cwiseProduct(inv_vars)).transpose() * posteriors;  // D
  FrameAccumulators acc;
  acc.a = frame_stack.transpose() * s.asDiagonal() * frame_stack;
  acc.b = frame_stack.transpose() * r;
  return acc;
}

namespace {

bool try_solve_frame_weight(const FrameAccumulators& acc, double ridge, Eigen::VectorXd* out) {
  const Eigen::Index c = acc.a.rows();
  const Eigen::MatrixXd lhs = acc.a + ridge * Eigen::MatrixXd::Identity(c, c);
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(lhs);
  if (ldlt.info() != Eigen::Success) return false;
  Eigen::VectorXd w = ldlt.solve(acc.b);
  if (!w.allFinite()) return false;
  const double residual = (lhs * w - acc.b).norm();
  if (residual > 1e-6 * std::max(1.0, acc.b.norm())) return false;
  *out = std::move(w);
  return true;
}

}  // namespace

Eigen::VectorXd solve_frame_weight(const FrameAccumulators& acc, double ridge) {
  if (acc.a.rows() != acc.a.cols() || acc.a.rows() != acc.b.size()) {
    throw std::invalid_argument("solve_frame_weight: accumulator shape mismatch");
  }
  Eigen::VectorXd w;
  if (!try_solve_frame_weight(acc, ridge, &w)) throw std::runtime_error("degenerate frame");
  return w;
}

Eigen::MatrixXd fused_posteriors(const GmmModel& model, const MultichannelUtterance& u,
                                 const Eigen::VectorXd& w) {
  const FeatureMatrix fused = apply_weights(u, w);
  const GmmScorer scorer(model);
  Eigen::MatrixXd gamma(u.num_frames(), model.num_components());
  for (Eigen::Index t = 0; t < u.num_frames(); ++t) {
    gamma.row(t) = scorer.posteriors(fused.frames.row(t).transpose()).transpose();
  }
  return gamma;
}

PooledAccumulators pooled_accumulators(const GmmModel& model, const MultichannelUtterance& u,
                                       const Eigen::MatrixXd& gamma) {
  u.validate();
  const auto t_count = u.num_frames();
  const int c = u.num_channels();
  if (gamma.rows() != t_count || gamma.cols() != model.num_components()) {
    throw std::invalid_argument("pooled_accumulators: gamma shape mismatch");
  }

  // Per-component constant of the auxiliary function:
  //   log w_m - 0.5 sum_d log(2 pi var) - 0.5 mu' Sigma^{-1} mu
  constexpr double kTwoPi = 6.283185307179586477;
  const Eigen::MatrixXd inv_vars = model.vars.cwiseInverse();
  Eigen::VectorXd comp_const(model.num_components());
  for (int m = 0; m < model.num_components(); ++m) {
    const double log_norm =
        std::log(model.weights[m]) - 0.5 * (model.vars.row(m).array() * kTwoPi).log().sum();
    const double mahal = (model.means.row(m).array().square() * inv_vars.row(m).array()).sum();
    comp_const[m] = log_norm - 0.5 * mahal;
  }

  PooledAccumulators pooled;
  pooled.a = Eigen::MatrixXd::Zero(c, c);
  pooled.b = Eigen::VectorXd::Zero(c);
  pooled.constant = 0.0;
  for (Eigen::Index t = 0; t < t_count; ++t) {
    const Eigen::MatrixXd stack = u.frame_stack(t);
    const Eigen::VectorXd g = gamma.row(t).transpose();
    const FrameAccumulators acc = frame_accumulators(model, stack, g);
    pooled.a += acc.a;
    pooled.b += acc.b;
    pooled.constant += g.dot(comp_const);
  }
  const double inv_t = 1.0 / static_cast<double>(t_count);
  pooled.a *= inv_t;
  pooled.b *= inv_t;
  pooled.constant *= inv_t;
  return pooled;
}

WeightVector softmax_constrain(const WeightVector& w) {
  if (!w.w.allFinite()) throw std::invalid_argument("softmax_constrain: non-finite weights");
  WeightVector out;
  out.kind = WeightKind::kSoftmax;
  const double max_w = w.w.maxCoeff();
  Eigen::VectorXd e = (w.w.array() - max_w).exp();
  out.w = e / e.sum();
  return out;
}

WeightedStats weighted_stats(const MultichannelUtterance& u, const Eigen::VectorXd& w,
                             double epsilon) {
  u.validate();
  if (epsilon <= 0.0) throw std::invalid_argument("weighted_stats: epsilon must be positive");
  if (u.num_frames() < 2) throw std::runtime_error("weighted_stats: needs at least two frames");
  const FeatureMatrix fused = apply_weights(u, w);
  WeightedStats stats;
  stats.mean = fused.frames.colwise().mean().transpose();
  const Eigen::MatrixXd centered = fused.frames.rowwise() - stats.mean.transpose();
  stats.cov = centered.transpose() * centered / static_cast<double>(u.num_frames());
  stats.cov += epsilon * Eigen::MatrixXd::Identity(u.dim(), u.dim());
  return stats;
}

namespace {

double log_det_spd(const Eigen::MatrixXd& m) {
  const Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("covariance factorization failed");
  }
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

// Everything of the auxiliary problem that does not depend on w: the pooled
// quadratic and the mean-centered per-channel frame matrices.
struct FrozenProblem {
  PooledAccumulators pooled;
  std::vector<Eigen::MatrixXd> centered;  // per channel, T x D
  double beta = 0.0;
  double epsilon = 1e-6;
  Eigen::Index frames = 0;
  Eigen::Index dim = 0;

  FrozenProblem(const GmmModel& model, const MultichannelUtterance& u,
                const Eigen::MatrixXd& gamma, const JacobianConfig& cfg)
      : pooled(pooled_accumulators(model, u, gamma)),
        beta(cfg.beta),
        epsilon(cfg.cov_epsilon),
        frames(u.num_frames()),
        dim(u.dim()) {
    centered.reserve(u.num_channels());
    for (const FeatureMatrix& ch : u.channels) {
      centered.push_back(ch.frames.rowwise() - ch.frames.colwise().mean());
    }
  }

  Eigen::MatrixXd fused_deviation(const Eigen::VectorXd& w) const {
    Eigen::MatrixXd v = Eigen::MatrixXd::Zero(frames, dim);
    for (std::size_t c = 0; c < centered.size(); ++c) v += w[c] * centered[c];
    return v;
  }

  Eigen::MatrixXd covariance(const Eigen::MatrixXd& v) const {
    Eigen::MatrixXd cov = v.transpose() * v / static_cast<double>(frames);
    cov += epsilon * Eigen::MatrixXd::Identity(dim, dim);
    return cov;
  }

  double objective(const Eigen::VectorXd& w) const {
    double value = -0.5 * w.dot(pooled.a * w) + pooled.b.dot(w) + pooled.constant;
    if (beta != 0.0) value += 0.5 * beta * log_det_spd(covariance(fused_deviation(w)));
    return value;
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd& w) const {
    Eigen::VectorXd grad = pooled.b - pooled.a * w;
    if (beta != 0.0) {
      const Eigen::MatrixXd v = fused_deviation(w);
      const Eigen::LLT<Eigen::MatrixXd> llt(covariance(v));
      if (llt.info() != Eigen::Success) {
        throw std::runtime_error("covariance factorization failed");
      }
      const Eigen::MatrixXd u_mat = llt.solve(v.transpose()).transpose();  // rows: C^{-1} v_t
      for (std::size_t c = 0; c < centered.size(); ++c) {
        grad[c] += beta * centered[c].cwiseProduct(u_mat).sum() / static_cast<double>(frames);
      }
    }
    return grad;
  }
};

}  // namespace

double jacobian_objective(const GmmModel& model, const MultichannelUtterance& u,
                          const Eigen::VectorXd& w, const JacobianConfig& cfg) {
  const FeatureMatrix fused = apply_weights(u, w);
  double value = utterance_score(model, fused);
  if (cfg.beta != 0.0) {
    const WeightedStats stats = weighted_stats(u, w, cfg.cov_epsilon);
    value += 0.5 * cfg.beta * log_det_spd(stats.cov);
  }
  return value;
}

double auxiliary_objective(const GmmModel& model, const MultichannelUtterance& u,
                           const Eigen::MatrixXd& gamma, const Eigen::VectorXd& w,
                           const JacobianConfig& cfg) {
  return FrozenProblem(model, u, gamma, cfg).objective(w);
}

Eigen::VectorXd jacobian_gradient(const GmmModel& model, const MultichannelUtterance& u,
                                  const Eigen::MatrixXd& gamma, const Eigen::VectorXd& w,
                                  const JacobianConfig& cfg) {
  return FrozenProblem(model, u, gamma, cfg).gradient(w);
}

Eigen::VectorXd jacobian_gradient(const GmmModel& model, const MultichannelUtterance& u,
                                  const Eigen::VectorXd& w, const JacobianConfig& cfg) {
  return jacobian_gradient(model, u, fused_posteriors(model, u, w), w, cfg);
}

WeightVector estimate_weights_ml(const GmmModel& model, const MultichannelUtterance& u,
                                 const JacobianConfig& cfg, std::vector<std::string>* warnings) {
  u.validate();
  const int c = u.num_channels();
  Eigen::VectorXd w = Eigen::VectorXd::Constant(c, 1.0 / c);

  for (int iter = 0; iter < cfg.em_iters; ++iter) {
    const Eigen::MatrixXd gamma = fused_posteriors(model, u, w);
    if (cfg.pooled_solve) {
      const PooledAccumulators pooled = pooled_accumulators(model, u, gamma);
      FrameAccumulators acc{pooled.a, pooled.b};
      Eigen::VectorXd pooled_w;
      if (!try_solve_frame_weight(acc, cfg.ridge, &pooled_w)) {
        if (warnings != nullptr) warnings->push_back("weighting failed, fall back to uniform");
        return {Eigen::VectorXd::Constant(c, 1.0 / c), WeightKind::kRawMl};
      }
      w = pooled_w;
      continue;
    }

    Eigen::VectorXd sum = Eigen::VectorXd::Zero(c);
    Eigen::Index solved = 0;
    for (Eigen::Index t = 0; t < u.num_frames(); ++t) {
      const FrameAccumulators acc =
          frame_accumulators(model, u.frame_stack(t), gamma.row(t).transpose());
      Eigen::VectorXd frame_w;
      if (try_solve_frame_weight(acc, cfg.ridge, &frame_w)) {
        sum += frame_w;
        ++solved;
      }
    }
    if (solved == 0) {
      if (warnings != nullptr) warnings->push_back("weighting failed, fall back to uniform");
      return {Eigen::VectorXd::Constant(c, 1.0 / c), WeightKind::kRawMl};
    }
    w = sum / static_cast<double>(solved);
  }
  return {w, WeightKind::kRawMl};
}

WeightVector estimate_weights_jacobian(const GmmModel& model, const MultichannelUtterance& u,
                                       const JacobianConfig& cfg, const LbfgsConfig& lbfgs_cfg,
                                       JacobianDiagnostics* diag) {
  u.validate();
  const int c = u.num_channels();
  Eigen::VectorXd w = Eigen::VectorXd::Constant(c, 1.0 / c);
  if (diag != nullptr) diag->outer_objectives.push_back(jacobian_objective(model, u, w, cfg));

  for (int iter = 0; iter < cfg.em_iters; ++iter) {
    const Eigen::MatrixXd gamma = fused_posteriors(model, u, w);
    const FrozenProblem problem(model, u, gamma, cfg);
    const auto f = [&problem](const Eigen::VectorXd& x) { return -problem.objective(x); };
    const auto g = [&problem](const Eigen::VectorXd& x) {
      return Eigen::VectorXd(-problem.gradient(x));
    };
    const LbfgsResult result = lbfgs_minimize(f, g, w, lbfgs_cfg);
    if (result.status == LbfgsStatus::kLineSearchFailed && diag != nullptr) {
      diag->optimizer_warning = true;
    }
    w = result.x;
    if (diag != nullptr) diag->outer_objectives.push_back(jacobian_objective(model, u, w, cfg));
  }
  return {w, WeightKind::kJacobian};
}

}  // namespace chanfuse
