// core/src/gmm.cpp

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

#include "chanfuse/gmm.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "chanfuse/binio.hpp"
#include "chanfuse/rng.hpp"

namespace chanfuse {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;  // log(2 pi)
}

void GmmModel::validate() const {
  const int m = num_components();
  if (m < 1) throw std::invalid_argument("gmm: needs at least one component");
  if (means.rows() != m || vars.rows() != m || vars.cols() != means.cols()) {
    throw std::invalid_argument("gmm: inconsistent parameter shapes");
  }
  if (!weights.allFinite() || !means.allFinite() || !vars.allFinite()) {
    throw std::invalid_argument("gmm: non-finite parameters");
  }
  if ((weights.array() <= 0.0).any()) throw std::invalid_argument("gmm: weights must be positive");
  if (std::abs(weights.sum() - 1.0) > 1e-9) throw std::invalid_argument("gmm: weights must sum to 1");
  if ((vars.array() <= 0.0).any()) throw std::invalid_argument("gmm: variances must be positive");
}

GmmScorer::GmmScorer(const GmmModel& model) : model_(&model) {
  const int m = model.num_components();
  inv_vars_ = model.vars.cwiseInverse();
  log_const_.resize(m);
  for (int i = 0; i < m; ++i) {
    log_const_[i] = std::log(model.weights[i]) -
                    0.5 * (model.vars.row(i).array().log() + kLog2Pi).sum();
  }
}

Eigen::VectorXd GmmScorer::component_log_terms(const Eigen::VectorXd& x) const {
  if (x.size() != model_->dim()) throw std::invalid_argument("gmm: dimension mismatch");
  const int m = model_->num_components();
  Eigen::VectorXd terms(m);
  for (int i = 0; i < m; ++i) {
    const auto diff = x.transpose().array() - model_->means.row(i).array();
    terms[i] = log_const_[i] - 0.5 * (diff.square() * inv_vars_.row(i).array()).sum();
  }
  return terms;
}

double GmmScorer::frame_log_likelihood(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd terms = component_log_terms(x);
  const double max_term = terms.maxCoeff();
  return max_term + std::log((terms.array() - max_term).exp().sum());
}

Eigen::VectorXd GmmScorer::posteriors(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd terms = component_log_terms(x);
  const double max_term = terms.maxCoeff();
  Eigen::VectorXd p = (terms.array() - max_term).exp();
  p /= p.sum();
  return p;
}

double frame_log_likelihood(const GmmModel& model, const Eigen::VectorXd& x) {
  return GmmScorer(model).frame_log_likelihood(x);
}

Eigen::VectorXd posteriors(const GmmModel& model, const Eigen::VectorXd& x) {
  return GmmScorer(model).posteriors(x);
}

double utterance_score(const GmmModel& model, const FeatureMatrix& f) {
  if (f.dim() != model.dim()) throw std::invalid_argument("gmm: dimension mismatch");
  if (f.num_frames() < 1) throw std::invalid_argument("gmm: empty utterance");
  const GmmScorer scorer(model);
  double total = 0.0;
  for (Eigen::Index t = 0; t < f.num_frames(); ++t) {
    total += scorer.frame_log_likelihood(f.frames.row(t).transpose());
  }
  return total / static_cast<double>(f.num_frames());
}

namespace {

// Seeded pick of `count` distinct frame indices (partial Fisher-Yates).
std::vector<int> sample_distinct(int count, int total, Rng& rng) {
  std::vector<int> idx(total);
  for (int i = 0; i < total; ++i) idx[i] = i;
  for (int i = 0; i < count; ++i) {
    const int j = i + rng.uniform_int(total - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(count);
  return idx;
}

}  // namespace

GmmModel gmm_train(const Eigen::MatrixXd& frames, int num_components, const EmConfig& cfg,
                   EmDiagnostics* diag) {
  const auto t = frames.rows();
  const auto d = frames.cols();
  if (num_components < 1) throw std::invalid_argument("gmm_train: need at least one component");
  if (cfg.max_iters < 1) throw std::invalid_argument("gmm_train: max_iters must be >= 1");
  if (cfg.var_floor <= 0.0) throw std::invalid_argument("gmm_train: var_floor must be positive");
  if (t < num_components) throw std::runtime_error("insufficient data");
  if (!frames.allFinite()) throw std::invalid_argument("gmm_train: non-finite features");

  Rng rng(cfg.seed);
  const int m = num_components;

  // Means seeded from M distinct frames, then two k-means passes.
  GmmModel model;
  model.means.resize(m, d);
  const std::vector<int> seeds = sample_distinct(m, static_cast<int>(t), rng);
  for (int i = 0; i < m; ++i) model.means.row(i) = frames.row(seeds[i]);

  std::vector<int> assign(t, 0);
  for (int pass = 0; pass < 2; ++pass) {
    for (Eigen::Index n = 0; n < t; ++n) {
      Eigen::Index best = 0;
      (model.means.rowwise() - frames.row(n)).rowwise().squaredNorm().minCoeff(&best);
      assign[n] = static_cast<int>(best);
    }
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(m, d);
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(m);
    for (Eigen::Index n = 0; n < t; ++n) {
      sums.row(assign[n]) += frames.row(n);
      counts[assign[n]] += 1.0;
    }
    for (int i = 0; i < m; ++i) {
      if (counts[i] > 0.0) {
        model.means.row(i) = sums.row(i) / counts[i];
      } else {
        // Empty cluster: reseed on the frame farthest from its own center.
        Eigen::Index worst = 0;
        double worst_dist = -1.0;
        for (Eigen::Index n = 0; n < t; ++n) {
          const double dist = (frames.row(n) - model.means.row(assign[n])).squaredNorm();
          if (dist > worst_dist) {
            worst_dist = dist;
            worst = n;
          }
        }
        model.means.row(i) = frames.row(worst);
        assign[worst] = i;
      }
    }
  }

  // Cluster statistics as the starting mixture.
  {
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(m, d);
    Eigen::MatrixXd sq_sums = Eigen::MatrixXd::Zero(m, d);
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(m);
    for (Eigen::Index n = 0; n < t; ++n) {
      sums.row(assign[n]) += frames.row(n);
      sq_sums.row(assign[n]) += frames.row(n).array().square().matrix();
      counts[assign[n]] += 1.0;
    }
    const Eigen::RowVectorXd global_mean = frames.colwise().mean();
    const Eigen::RowVectorXd global_var =
        (frames.rowwise() - global_mean).array().square().colwise().mean();
    model.weights.resize(m);
    model.vars.resize(m, d);
    for (int i = 0; i < m; ++i) {
      model.weights[i] = std::max(counts[i], 1.0) / static_cast<double>(t);
      if (counts[i] > 0.0) {
        model.means.row(i) = sums.row(i) / counts[i];
        model.vars.row(i) = (sq_sums.row(i) / counts[i] -
                             model.means.row(i).array().square().matrix())
                                .cwiseMax(cfg.var_floor);
      } else {
        // Mean keeps its k-means reseed; spread it with the global variance.
        model.vars.row(i) = global_var.cwiseMax(cfg.var_floor);
      }
    }
    model.weights /= model.weights.sum();
  }

  // EM with variance flooring and deterministic empty-component reseeding.
  double prev_ll = -std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    const GmmScorer scorer(model);
    Eigen::VectorXd occ = Eigen::VectorXd::Zero(m);
    Eigen::MatrixXd mean_acc = Eigen::MatrixXd::Zero(m, d);
    Eigen::MatrixXd var_acc = Eigen::MatrixXd::Zero(m, d);
    double total_ll = 0.0;

    for (Eigen::Index n = 0; n < t; ++n) {
      const Eigen::VectorXd x = frames.row(n).transpose();
      const Eigen::VectorXd terms = scorer.component_log_terms(x);
      const double max_term = terms.maxCoeff();
      Eigen::VectorXd gamma = (terms.array() - max_term).exp();
      const double denom = gamma.sum();
      total_ll += max_term + std::log(denom);
      gamma /= denom;
      occ += gamma;
      mean_acc += gamma * frames.row(n);
      var_acc += gamma * frames.row(n).array().square().matrix();
    }

    const double ll = total_ll / static_cast<double>(t);
    if (diag != nullptr) diag->loglik_trace.push_back(ll);

    for (int i = 0; i < m; ++i) {
      if (occ[i] < 1e-10) {
        // Re-seed a dead component by splitting the one with the largest
        // total variance.
        int donor = 0;
        model.vars.rowwise().sum().maxCoeff(&donor);
        model.means.row(i) =
            model.means.row(donor) + 0.5 * model.vars.row(donor).cwiseSqrt();
        model.vars.row(i) = model.vars.row(donor);
        model.weights[i] = 0.5 * model.weights[donor];
        model.weights[donor] *= 0.5;
        if (diag != nullptr) ++diag->reseeded_components;
        continue;
      }
      model.weights[i] = occ[i] / static_cast<double>(t);
      model.means.row(i) = mean_acc.row(i) / occ[i];
      model.vars.row(i) =
          (var_acc.row(i) / occ[i] - model.means.row(i).array().square().matrix())
              .cwiseMax(cfg.var_floor);
    }
    model.weights /= model.weights.sum();

    if (std::abs(ll - prev_ll) < cfg.tol) break;
    prev_ll = ll;
  }

  model.validate();
  return model;
}

GmmModel gmm_train(const std::vector<FeatureMatrix>& corpus, int num_components,
                   const EmConfig& cfg, EmDiagnostics* diag) {
  if (corpus.empty()) throw std::runtime_error("insufficient data");
  Eigen::Index total = 0;
  const Eigen::Index d = corpus.front().dim();
  for (const FeatureMatrix& f : corpus) {
    if (f.dim() != d) throw std::invalid_argument("gmm_train: mixed feature dimensions");
    total += f.num_frames();
  }
  Eigen::MatrixXd pooled(total, d);
  Eigen::Index row = 0;
  for (const FeatureMatrix& f : corpus) {
    pooled.middleRows(row, f.num_frames()) = f.frames;
    row += f.num_frames();
  }
  return gmm_train(pooled, num_components, cfg, diag);
}

void save_gmm(const std::string& path, const GmmModel& model) {
  model.validate();
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write model file: " + path);
  binio::write_magic(os, "CGM1");
  const int m = model.num_components();
  const int d = model.dim();
  binio::write_u32(os, static_cast<std::uint32_t>(m));
  binio::write_u32(os, static_cast<std::uint32_t>(d));
  for (int i = 0; i < m; ++i) binio::write_f64(os, model.weights[i]);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < d; ++j) binio::write_f64(os, model.means(i, j));
  }
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < d; ++j) binio::write_f64(os, model.vars(i, j));
  }
}

GmmModel load_gmm(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open model file: " + path);
  binio::expect_magic(is, "CGM1");
  const std::uint32_t m = binio::read_u32(is);
  const std::uint32_t d = binio::read_u32(is);
  GmmModel model;
  model.weights.resize(m);
  model.means.resize(m, d);
  model.vars.resize(m, d);
  for (std::uint32_t i = 0; i < m; ++i) model.weights[i] = binio::read_f64(is);
  for (std::uint32_t i = 0; i < m; ++i) {
    for (std::uint32_t j = 0; j < d; ++j) model.means(i, j) = binio::read_f64(is);
  }
  for (std::uint32_t i = 0; i < m; ++i) {
    for (std::uint32_t j = 0; j < d; ++j) model.vars(i, j) = binio::read_f64(is);
  }
  model.validate();
  return model;
}

}  // namespace chanfuse
