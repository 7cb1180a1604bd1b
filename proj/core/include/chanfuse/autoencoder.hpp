// core/include/chanfuse/autoencoder.hpp

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

#ifndef CHANFUSE_AUTOENCODER_HPP_
#define CHANFUSE_AUTOENCODER_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "chanfuse/featkit.hpp"

namespace chanfuse {

/// Feedforward reconstruction network: a context window of frames in, the
/// center frame out. Sigmoid hidden layers, linear output layer.
struct AutoencoderModel {
  std::vector<Eigen::MatrixXd> weights;  // layer l: rows = out, cols = in
  std::vector<Eigen::VectorXd> biases;   // layer l: out

  int num_layers() const { return static_cast<int>(weights.size()); }
  int input_dim() const { return weights.empty() ? 0 : static_cast<int>(weights.front().cols()); }
  int output_dim() const { return weights.empty() ? 0 : static_cast<int>(weights.back().rows()); }

  void validate() const;
};

struct AeTrainConfig {
  int epochs = 50;
  double learning_rate = 0.05;
  int batch_size = 32;
  std::uint64_t seed = 0;
  int context = 9;   // frames per input window
  int hidden = 64;   // width of each of the 3 hidden layers
};

struct AeTrainDiagnostics {
  std::vector<double> epoch_mse;  // per-element MSE after each epoch; [0] is pre-training
};

/// Stacks a 9-frame context around every frame: row t is the concatenation of
/// frames t-4 .. t+4, with edges padded by repeating the first/last frame.
Eigen::MatrixXd windowize(const FeatureMatrix& f, int context = 9);

/// Deterministic forward pass of a single window.
Eigen::VectorXd ae_forward(const AutoencoderModel& model, const Eigen::VectorXd& window);

/// Forward pass of a batch (rows are windows).
Eigen::MatrixXd ae_forward_batch(const AutoencoderModel& model, const Eigen::MatrixXd& windows);

struct AeGradients {
  double loss = 0.0;  // (1 / (2 B)) * sum of squared errors over the batch
  std::vector<Eigen::MatrixXd> weight_grads;
  std::vector<Eigen::VectorXd> bias_grads;
};

/// Backprop of the batch MSE loss; used by ae_train and by gradient checks.
AeGradients ae_backprop(const AutoencoderModel& model, const Eigen::MatrixXd& windows,
                        const Eigen::MatrixXd& targets);

/// Fresh seeded model of shape [context*D, hidden, hidden, hidden, D].
AutoencoderModel ae_init(int feat_dim, const AeTrainConfig& cfg);

/// Minibatch SGD on mean squared reconstruction error of the center frame.
/// The corpus must be mean-normalized. Deterministic for a fixed seed.
AutoencoderModel ae_train(const std::vector<FeatureMatrix>& clean, const AeTrainConfig& cfg,
                          AeTrainDiagnostics* diag = nullptr);

/// Total squared reconstruction error over the utterance (a sum, not a mean).
double reconstruction_error(const AutoencoderModel& model, const FeatureMatrix& f);

/// "CAE1" container: magic, u32 layer count, then per layer u32 rows,
/// u32 cols, weights row-major and bias as little-endian f64. Bit-exact.
void save_autoencoder(const std::string& path, const AutoencoderModel& model);
AutoencoderModel load_autoencoder(const std::string& path);

}  // namespace chanfuse

#endif  // CHANFUSE_AUTOENCODER_HPP_
