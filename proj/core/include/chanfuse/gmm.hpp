// core/include/chanfuse/gmm.hpp

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

#ifndef CHANFUSE_GMM_HPP_
#define CHANFUSE_GMM_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "chanfuse/featkit.hpp"

namespace chanfuse {

/// Diagonal-covariance Gaussian mixture. Rows of means/vars are components.
struct GmmModel {
  Eigen::VectorXd weights;  // M, positive, sums to 1
  Eigen::MatrixXd means;    // M x D
  Eigen::MatrixXd vars;     // M x D, all >= var floor used in training

  int num_components() const { return static_cast<int>(weights.size()); }
  int dim() const { return static_cast<int>(means.cols()); }

  /// Throws std::invalid_argument when the simplex/positivity/shape
  /// invariants are violated.
  void validate() const;
};

struct EmConfig {
  int max_iters = 20;
  double var_floor = 1e-3;
  double tol = 1e-4;  // on the change of mean per-frame log-likelihood
  std::uint64_t seed = 0;
};

struct EmDiagnostics {
  std::vector<double> loglik_trace;  // mean per-frame log-likelihood per iteration
  int reseeded_components = 0;
};

/// EM training on pooled frames (rows). Seeded k-means initialization, then
/// EM with a variance floor. Deterministic for a fixed seed. Throws
/// "insufficient data" when there are fewer frames than components.
GmmModel gmm_train(const Eigen::MatrixXd& frames, int num_components, const EmConfig& cfg,
                   EmDiagnostics* diag = nullptr);
GmmModel gmm_train(const std::vector<FeatureMatrix>& corpus, int num_components,
                   const EmConfig& cfg, EmDiagnostics* diag = nullptr);

/// Precomputed per-component constants for repeated scoring of one model.
class GmmScorer {
 public:
  explicit GmmScorer(const GmmModel& model);

  /// log(w_m) + log N(x; mu_m, Sigma_m) for every component.
  Eigen::VectorXd component_log_terms(const Eigen::VectorXd& x) const;

  double frame_log_likelihood(const Eigen::VectorXd& x) const;
  Eigen::VectorXd posteriors(const Eigen::VectorXd& x) const;

  const GmmModel& model() const { return *model_; }

 private:
  const GmmModel* model_;
  Eigen::VectorXd log_const_;  // log w_m - 0.5 * sum_d log(2 pi var_md)
  Eigen::MatrixXd inv_vars_;   // M x D
};

/// log p(x | model) via log-sum-exp over components.
double frame_log_likelihood(const GmmModel& model, const Eigen::VectorXd& x);

/// Mean per-frame log-likelihood of an utterance.
double utterance_score(const GmmModel& model, const FeatureMatrix& f);

/// Component posteriors at x, computed in the log domain; sums to 1.
Eigen::VectorXd posteriors(const GmmModel& model, const Eigen::VectorXd& x);

/// "CGM1" container: magic, u32 M, u32 D, then weights, means, vars as
/// little-endian f64 row-major arrays. Round-trips are bit-exact.
void save_gmm(const std::string& path, const GmmModel& model);
GmmModel load_gmm(const std::string& path);

}  // namespace chanfuse

#endif  // CHANFUSE_GMM_HPP_
