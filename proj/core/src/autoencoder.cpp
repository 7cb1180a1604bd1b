// core/src/autoencoder.cpp

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

#include "chanfuse/autoencoder.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "chanfuse/binio.hpp"
#include "chanfuse/rng.hpp"

namespace chanfuse {

namespace {

inline Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& z) {
  return (1.0 / (1.0 + (-z.array()).exp())).matrix();
}

}  // namespace

void AutoencoderModel::validate() const {
  if (weights.empty() || weights.size() != biases.size()) {
    throw std::invalid_argument("autoencoder: empty or inconsistent layer lists");
  }
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (biases[l].size() != weights[l].rows()) {
      throw std::invalid_argument("autoencoder: bias/weight shape mismatch");
    }
    if (l + 1 < weights.size() && weights[l + 1].cols() != weights[l].rows()) {
      throw std::invalid_argument("autoencoder: consecutive layer dimensions incompatible");
    }
    if (!weights[l].allFinite() || !biases[l].allFinite()) {
      throw std::invalid_argument("autoencoder: non-finite parameters");
    }
  }
}

Eigen::MatrixXd windowize(const FeatureMatrix& f, int context) {
  if (context < 1 || context % 2 == 0) throw std::invalid_argument("windowize: context must be odd");
  const auto t = f.num_frames();
  const auto d = f.dim();
  if (t < 1) throw std::invalid_argument("windowize: empty feature matrix");

  const int half = context / 2;
  Eigen::MatrixXd out(t, context * d);
  for (Eigen::Index i = 0; i < t; ++i) {
    for (int k = -half; k <= half; ++k) {
      const Eigen::Index src = std::clamp<Eigen::Index>(i + k, 0, t - 1);
      out.block(i, (k + half) * d, 1, d) = f.frames.row(src);
    }
  }
  return out;
}

Eigen::MatrixXd ae_forward_batch(const AutoencoderModel& model, const Eigen::MatrixXd& windows) {
  if (windows.cols() != model.input_dim()) {
    throw std::invalid_argument("autoencoder: input width mismatch");
  }
  const int layers = model.num_layers();
  Eigen::MatrixXd a = windows;
  for (int l = 0; l < layers; ++l) {
    Eigen::MatrixXd z = a * model.weights[l].transpose();
    z.rowwise() += model.biases[l].transpose();
    a = l + 1 < layers ? sigmoid(z) : z;  // hidden sigmoid, linear output
  }
  return a;
}

Eigen::VectorXd ae_forward(const AutoencoderModel& model, const Eigen::VectorXd& window) {
  return ae_forward_batch(model, window.transpose()).row(0).transpose();
}

AeGradients ae_backprop(const AutoencoderModel& model, const Eigen::MatrixXd& windows,
                        const Eigen::MatrixXd& targets) {
  if (windows.rows() != targets.rows()) throw std::invalid_argument("batch size mismatch");
  const int layers = model.num_layers();
  const double batch = static_cast<double>(windows.rows());

  // Forward pass keeping activations per layer.
  std::vector<Eigen::MatrixXd> acts(layers + 1);
  acts[0] = windows;
  for (int l = 0; l < layers; ++l) {
    Eigen::MatrixXd z = acts[l] * model.weights[l].transpose();
    z.rowwise() += model.biases[l].transpose();
    acts[l + 1] = l + 1 < layers ? sigmoid(z) : z;
  }

  AeGradients grads;
  grads.weight_grads.resize(layers);
  grads.bias_grads.resize(layers);

  // loss = (1 / (2 B)) * ||out - target||_F^2
  Eigen::MatrixXd delta = (acts[layers] - targets) / batch;
  grads.loss = (acts[layers] - targets).squaredNorm() / (2.0 * batch);

  for (int l = layers - 1; l >= 0; --l) {
    grads.weight_grads[l] = delta.transpose() * acts[l];
    grads.bias_grads[l] = delta.colwise().sum().transpose();
    if (l > 0) {
      delta = (delta * model.weights[l]).cwiseProduct(
          (acts[l].array() * (1.0 - acts[l].array())).matrix());
    }
  }
  return grads;
}

AutoencoderModel ae_init(int feat_dim, const AeTrainConfig& cfg) {
  if (feat_dim < 1) throw std::invalid_argument("ae_init: feature dim must be >= 1");
  if (cfg.hidden < 1) throw std::invalid_argument("ae_init: hidden width must be >= 1");
  const std::vector<int> sizes = {cfg.context * feat_dim, cfg.hidden, cfg.hidden, cfg.hidden,
                                  feat_dim};
  Rng rng(Rng::mix(cfg.seed, 0x6165696e6974ull));
  AutoencoderModel model;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const int fan_in = sizes[l], fan_out = sizes[l + 1];
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    Eigen::MatrixXd w(fan_out, fan_in);
    for (int i = 0; i < fan_out; ++i) {
      for (int j = 0; j < fan_in; ++j) w(i, j) = rng.uniform(-limit, limit);
    }
    model.weights.push_back(std::move(w));
    model.biases.push_back(Eigen::VectorXd::Zero(fan_out));
  }
  return model;
}

AutoencoderModel ae_train(const std::vector<FeatureMatrix>& clean, const AeTrainConfig& cfg,
                          AeTrainDiagnostics* diag) {
  if (clean.empty()) throw std::runtime_error("ae_train: empty corpus");
  if (cfg.epochs < 1) throw std::invalid_argument("ae_train: epochs must be >= 1");
  if (cfg.learning_rate <= 0.0) throw std::invalid_argument("ae_train: learning rate must be positive");

  const auto d = clean.front().dim();
  Eigen::Index total = 0;
  for (const FeatureMatrix& f : clean) {
    if (f.dim() != d) throw std::invalid_argument("ae_train: mixed feature dimensions");
    total += f.num_frames();
  }

  Eigen::MatrixXd windows(total, cfg.context * d);
  Eigen::MatrixXd targets(total, d);
  Eigen::Index row = 0;
  for (const FeatureMatrix& f : clean) {
    windows.middleRows(row, f.num_frames()) = windowize(f, cfg.context);
    targets.middleRows(row, f.num_frames()) = f.frames;
    row += f.num_frames();
  }

  AutoencoderModel model = ae_init(static_cast<int>(d), cfg);
  Rng rng(Rng::mix(cfg.seed, 0x61657368756666ull));

  const auto corpus_mse = [&]() {
    const Eigen::MatrixXd out = ae_forward_batch(model, windows);
    return (out - targets).squaredNorm() / static_cast<double>(total * d);
  };
  if (diag != nullptr) diag->epoch_mse.push_back(corpus_mse());

  std::vector<Eigen::Index> order(total);
  std::iota(order.begin(), order.end(), 0);
  const int batch = std::max(1, cfg.batch_size);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    // Seeded shuffle per epoch.
    for (Eigen::Index i = total - 1; i > 0; --i) {
      const Eigen::Index j = rng.uniform_int(static_cast<int>(i + 1));
      std::swap(order[i], order[j]);
    }
    for (Eigen::Index start = 0; start < total; start += batch) {
      const Eigen::Index n = std::min<Eigen::Index>(batch, total - start);
      Eigen::MatrixXd bw(n, windows.cols());
      Eigen::MatrixXd bt(n, d);
      for (Eigen::Index i = 0; i < n; ++i) {
        bw.row(i) = windows.row(order[start + i]);
        bt.row(i) = targets.row(order[start + i]);
      }
      const AeGradients grads = ae_backprop(model, bw, bt);
      for (int l = 0; l < model.num_layers(); ++l) {
        model.weights[l] -= cfg.learning_rate * grads.weight_grads[l];
        model.biases[l] -= cfg.learning_rate * grads.bias_grads[l];
      }
    }
    if (diag != nullptr) diag->epoch_mse.push_back(corpus_mse());
  }
  return model;
}

double reconstruction_error(const AutoencoderModel& model, const FeatureMatrix& f) {
  if (f.dim() < 1 || model.output_dim() != f.dim()) {
    throw std::invalid_argument("reconstruction_error: dimension mismatch");
  }
  const int context = model.input_dim() / static_cast<int>(f.dim());
  if (context * f.dim() != model.input_dim()) {
    throw std::invalid_argument("reconstruction_error: dimension mismatch");
  }
  const Eigen::MatrixXd windows = windowize(f, context);
  const Eigen::MatrixXd out = ae_forward_batch(model, windows);
  return (out - f.frames).squaredNorm();
}

void save_autoencoder(const std::string& path, const AutoencoderModel& model) {
  model.validate();
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write model file: " + path);
  binio::write_magic(os, "CAE1");
  binio::write_u32(os, static_cast<std::uint32_t>(model.num_layers()));
  for (int l = 0; l < model.num_layers(); ++l) {
    const auto& w = model.weights[l];
    binio::write_u32(os, static_cast<std::uint32_t>(w.rows()));
    binio::write_u32(os, static_cast<std::uint32_t>(w.cols()));
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (Eigen::Index j = 0; j < w.cols(); ++j) binio::write_f64(os, w(i, j));
    }
    for (Eigen::Index i = 0; i < w.rows(); ++i) binio::write_f64(os, model.biases[l][i]);
  }
}

AutoencoderModel load_autoencoder(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open model file: " + path);
  binio::expect_magic(is, "CAE1");
  const std::uint32_t layers = binio::read_u32(is);
  AutoencoderModel model;
  for (std::uint32_t l = 0; l < layers; ++l) {
    const std::uint32_t rows = binio::read_u32(is);
    const std::uint32_t cols = binio::read_u32(is);
    Eigen::MatrixXd w(rows, cols);
    for (std::uint32_t i = 0; i < rows; ++i) {
      for (std::uint32_t j = 0; j < cols; ++j) w(i, j) = binio::read_f64(is);
    }
    Eigen::VectorXd b(rows);
    for (std::uint32_t i = 0; i < rows; ++i) b[i] = binio::read_f64(is);
    model.weights.push_back(std::move(w));
    model.biases.push_back(std::move(b));
  }
  model.validate();
  return model;
}

}  // namespace chanfuse
