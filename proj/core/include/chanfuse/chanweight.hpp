// core/include/chanfuse/chanweight.hpp

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

#ifndef CHANFUSE_CHANWEIGHT_HPP_
#define CHANFUSE_CHANWEIGHT_HPP_

#include <string>
#include <vector>

#include <Eigen/Core>

#include "chanfuse/chansel.hpp"
#include "chanfuse/gmm.hpp"
#include "chanfuse/optim.hpp"

namespace chanfuse {

enum class WeightKind { kRawMl, kSoftmax, kJacobian };

const char* weight_kind_name(WeightKind k);

struct WeightVector {
  Eigen::VectorXd w;  // length C
  WeightKind kind = WeightKind::kRawMl;
};

/// Per-frame quadratic statistics of the weight likelihood:
///   a = sum_m gamma_m X_t' Sigma_m^{-1} X_t      (C x C, symmetric PSD)
///   b = sum_m gamma_m X_t' Sigma_m^{-1} mu_m     (C)
struct FrameAccumulators {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
};

/// Frame accumulators pooled (averaged) over an utterance, together with the
/// weight-independent constant of the auxiliary function:
///   aux(w) = -0.5 w'Aw + b'w + constant
struct PooledAccumulators {
  Eigen::MatrixXd a;       // C x C, mean over frames
  Eigen::VectorXd b;       // C
  double constant = 0.0;   // mean over frames of the gamma-weighted constants
};

/// Sample mean and (regularized) covariance of fused features X_t w.
struct WeightedStats {
  Eigen::VectorXd mean;  // D
  Eigen::MatrixXd cov;   // D x D, epsilon * I already added
};

struct JacobianConfig {
  double beta = 1.0;          // weight of the 0.5 * log|C| term
  double cov_epsilon = 1e-6;  // added to the covariance diagonal
  int em_iters = 3;           // outer posterior-refresh loops
  double ridge = 1e-8;        // added to each A_t before the per-frame solve
  bool pooled_solve = false;  // raw estimate via (sum A_t)^{-1} (sum B_t)
                              // instead of the default per-frame averaging
};

struct JacobianDiagnostics {
  std::vector<double> outer_objectives;  // objective at the start and after each outer loop
  bool optimizer_warning = false;        // an inner optimization failed; best iterate kept
};

/// Fuses channels frame-by-frame: output frame t = sum_c w_c x_c(t).
FeatureMatrix apply_weights(const MultichannelUtterance& u, const Eigen::VectorXd& w);

/// Accumulators of one frame stack (D x C) at the given component posteriors.
FrameAccumulators frame_accumulators(const GmmModel& model, const Eigen::MatrixXd& frame_stack,
                                     const Eigen::VectorXd& posteriors);

/// Solves (a + ridge I) w = b. Throws "degenerate frame" when the system is
/// numerically singular.
Eigen::VectorXd solve_frame_weight(const FrameAccumulators& acc, double ridge);

/// Component posteriors of every fused frame X_t w, T x M.
Eigen::MatrixXd fused_posteriors(const GmmModel& model, const MultichannelUtterance& u,
                                 const Eigen::VectorXd& w);

/// Pooled accumulators under fixed posteriors (rows of `gamma` follow frames).
PooledAccumulators pooled_accumulators(const GmmModel& model, const MultichannelUtterance& u,
                                       const Eigen::MatrixXd& gamma);

/// Maximum-likelihood weights: alternates posterior refresh on the fused
/// features with per-frame solves averaged over the utterance (or a pooled
/// solve when cfg.pooled_solve). Starts from uniform 1/C. Falls back to
/// uniform weights with a warning when every frame is degenerate.
WeightVector estimate_weights_ml(const GmmModel& model, const MultichannelUtterance& u,
                                 const JacobianConfig& cfg,
                                 std::vector<std::string>* warnings = nullptr);

/// Maps raw weights onto the open simplex with a max-subtracted softmax.
WeightVector softmax_constrain(const WeightVector& w);

/// Mean and covariance of the fused features, with epsilon added to the
/// covariance diagonal. Requires T >= 2.
WeightedStats weighted_stats(const MultichannelUtterance& u, const Eigen::VectorXd& w,
                             double epsilon);

/// Mean fused log-likelihood plus (beta / 2) log|C_hat|; the log-determinant
/// uses a Cholesky factorization of the regularized covariance.
double jacobian_objective(const GmmModel& model, const MultichannelUtterance& u,
                          const Eigen::VectorXd& w, const JacobianConfig& cfg);

/// Auxiliary objective under fixed posteriors: the pooled quadratic plus the
/// log-determinant term. Touching the same maximum as jacobian_objective at
/// the freeze point; used by the inner optimizer and by gradient checks.
double auxiliary_objective(const GmmModel& model, const MultichannelUtterance& u,
                           const Eigen::MatrixXd& gamma, const Eigen::VectorXd& w,
                           const JacobianConfig& cfg);

/// Analytic gradient of auxiliary_objective in w:
///   (b - A w) + (beta / 2) * d log|C_hat| / dw
/// where d log|C_hat| / dw_c = Tr(C^{-1}(D_c + D_c')) with mean-centered D_c.
Eigen::VectorXd jacobian_gradient(const GmmModel& model, const MultichannelUtterance& u,
                                  const Eigen::MatrixXd& gamma, const Eigen::VectorXd& w,
                                  const JacobianConfig& cfg);

/// Convenience overload; freezes posteriors at w.
Eigen::VectorXd jacobian_gradient(const GmmModel& model, const MultichannelUtterance& u,
                                  const Eigen::VectorXd& w, const JacobianConfig& cfg);

/// Constrained weight estimate: em_iters outer loops of posterior refresh,
/// each maximizing the auxiliary objective over w with L-BFGS. The true
/// objective is non-decreasing across outer loops up to line-search
/// tolerance.
WeightVector estimate_weights_jacobian(const GmmModel& model, const MultichannelUtterance& u,
                                       const JacobianConfig& cfg, const LbfgsConfig& lbfgs_cfg,
                                       JacobianDiagnostics* diag = nullptr);

}  // namespace chanfuse

#endif  // CHANFUSE_CHANWEIGHT_HPP_
