// core/include/chanfuse/chansel.hpp

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

#ifndef CHANFUSE_CHANSEL_HPP_
#define CHANFUSE_CHANSEL_HPP_

#include <vector>

#include <Eigen/Core>

#include "chanfuse/autoencoder.hpp"
#include "chanfuse/featkit.hpp"
#include "chanfuse/gmm.hpp"

namespace chanfuse {

/// C time-aligned channels of one utterance. All channels share (T, D).
struct MultichannelUtterance {
  std::vector<FeatureMatrix> channels;  // channel ids are 1-based positions

  int num_channels() const { return static_cast<int>(channels.size()); }
  Eigen::Index num_frames() const { return channels.empty() ? 0 : channels.front().num_frames(); }
  Eigen::Index dim() const { return channels.empty() ? 0 : channels.front().dim(); }

  /// D x C stack of all channels' frame t.
  Eigen::MatrixXd frame_stack(Eigen::Index t) const;

  /// Throws std::invalid_argument unless C >= 1 and shapes agree.
  void validate() const;
};

enum class SelectionMethod { kMaxLikelihood, kAutoencoder, kOracle };

const char* selection_method_name(SelectionMethod m);

struct SelectionResult {
  int chosen = 1;            // 1-based channel id
  Eigen::VectorXd scores;    // per-channel score under the method's sense
  SelectionMethod method = SelectionMethod::kMaxLikelihood;
};

/// Picks argmax of the mean per-frame log-likelihood. Channels should be
/// mean- and variance-normalized so scores are comparable. Ties go to the
/// lowest channel id.
SelectionResult select_ml(const GmmModel& model, const MultichannelUtterance& u);

/// Picks argmin of the autoencoder reconstruction error over mean-normalized
/// channels. Ties go to the lowest channel id.
SelectionResult select_ae(const AutoencoderModel& model, const MultichannelUtterance& u);

/// Upper-bound selector: argmin Frobenius distance to the clean reference.
SelectionResult select_oracle(const MultichannelUtterance& u, const FeatureMatrix& clean);

}  // namespace chanfuse

#endif  // CHANFUSE_CHANSEL_HPP_
