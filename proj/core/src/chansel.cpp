// core/src/chansel.cpp

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

#include "chanfuse/chansel.hpp"

#include <stdexcept>

namespace chanfuse {

void MultichannelUtterance::validate() const {
  if (channels.empty()) throw std::invalid_argument("utterance: needs at least one channel");
  const auto t = channels.front().num_frames();
  const auto d = channels.front().dim();
  if (t < 1) throw std::invalid_argument("utterance: empty channels");
  for (const FeatureMatrix& c : channels) {
    if (c.num_frames() != t || c.dim() != d) {
      throw std::invalid_argument("utterance: channels disagree on (T, D)");
    }
  }
}

Eigen::MatrixXd MultichannelUtterance::frame_stack(Eigen::Index t) const {
  const int c = num_channels();
  Eigen::MatrixXd stack(dim(), c);
  for (int i = 0; i < c; ++i) stack.col(i) = channels[i].frames.row(t).transpose();
  return stack;
}

const char* selection_method_name(SelectionMethod m) {
  switch (m) {
    case SelectionMethod::kMaxLikelihood: return "ml";
    case SelectionMethod::kAutoencoder: return "ae";
    case SelectionMethod::kOracle: return "oracle";
  }
  return "unknown";
}

namespace {

// Lowest channel id wins ties, for both senses of optimum.
int arg_best(const Eigen::VectorXd& scores, bool maximize) {
  int best = 0;
  for (int i = 1; i < scores.size(); ++i) {
    if (maximize ? scores[i] > scores[best] : scores[i] < scores[best]) best = i;
  }
  return best + 1;
}

}  // namespace

SelectionResult select_ml(const GmmModel& model, const MultichannelUtterance& u) {
  u.validate();
  if (u.dim() != model.dim()) throw std::invalid_argument("select_ml: dimension mismatch");
  SelectionResult result;
  result.method = SelectionMethod::kMaxLikelihood;
  result.scores.resize(u.num_channels());
  for (int c = 0; c < u.num_channels(); ++c) {
    result.scores[c] = utterance_score(model, u.channels[c]);
  }
  result.chosen = arg_best(result.scores, /*maximize=*/true);
  return result;
}

SelectionResult select_ae(const AutoencoderModel& model, const MultichannelUtterance& u) {
  u.validate();
  SelectionResult result;
  result.method = SelectionMethod::kAutoencoder;
  result.scores.resize(u.num_channels());
  for (int c = 0; c < u.num_channels(); ++c) {
    result.scores[c] = reconstruction_error(model, u.channels[c]);
  }
  result.chosen = arg_best(result.scores, /*maximize=*/false);
  return result;
}

SelectionResult select_oracle(const MultichannelUtterance& u, const FeatureMatrix& clean) {
  u.validate();
  if (clean.num_frames() != u.num_frames() || clean.dim() != u.dim()) {
    throw std::invalid_argument("select_oracle: clean reference shape mismatch");
  }
  SelectionResult result;
  result.method = SelectionMethod::kOracle;
  result.scores.resize(u.num_channels());
  for (int c = 0; c < u.num_channels(); ++c) {
    result.scores[c] = (u.channels[c].frames - clean.frames).norm();
  }
  result.chosen = arg_best(result.scores, /*maximize=*/false);
  return result;
}

}  // namespace chanfuse
