// core/include/chanfuse/featkit.hpp

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

#ifndef CHANFUSE_FEATKIT_HPP_
#define CHANFUSE_FEATKIT_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace chanfuse {

/// Mono audio, amplitudes nominally in [-1, 1].
struct AudioBuffer {
  std::vector<double> samples;
  int sample_rate = 16000;
};

/// Which per-utterance normalizations have been applied to a FeatureMatrix.
/// Values are also the on-disk codes of the "CFB1" container.
enum class NormState : std::uint8_t {
  kRaw = 0,
  kCmn = 1,     // per-column mean removed
  kCmnCvn = 2,  // mean removed, then scaled to unit population variance
};

/// T x D matrix of log-Mel frames (rows are frames).
struct FeatureMatrix {
  Eigen::MatrixXd frames;
  NormState norm = NormState::kRaw;

  Eigen::Index num_frames() const { return frames.rows(); }
  Eigen::Index dim() const { return frames.cols(); }
};

/// Front-end configuration. Defaults are a 25 ms Hann window with 10 ms hop
/// at 16 kHz and a 40-band filterbank.
struct MelConfig {
  int n_mels = 40;
  int n_fft = 512;
  int frame_len = 400;
  int hop = 160;
  double fmin = 0.0;
  double fmax = 0.0;  // 0 means sample_rate / 2
  double floor = 1e-10;

  double effective_fmax(int sample_rate) const {
    return fmax > 0.0 ? fmax : 0.5 * static_cast<double>(sample_rate);
  }
};

/// Hann-windowed power spectrogram, T x (n_fft/2 + 1).
/// T = floor((len - frame_len) / hop) + 1. Throws "utterance too short" when
/// the signal does not cover one frame.
Eigen::MatrixXd stft_power(const AudioBuffer& audio, const MelConfig& cfg);

/// Triangular Mel filterbank, n_mels x (n_fft/2 + 1). HTK Mel scale.
/// Rows are non-negative with a single contiguous support each.
Eigen::MatrixXd mel_filterbank(const MelConfig& cfg, int sample_rate);

/// log(max(filterbank * power, floor)). Output state is kRaw.
FeatureMatrix log_mel(const AudioBuffer& audio, const MelConfig& cfg);

/// Removes each column's mean. Idempotent; accepts any normalization state.
FeatureMatrix cmn(const FeatureMatrix& f);

/// Scales each column to unit population variance (divide by sqrt of the 1/T
/// variance). Requires mean-normalized input. Constant columns are left
/// unchanged and reported through `warnings` when given.
FeatureMatrix cvn(const FeatureMatrix& f, std::vector<std::string>* warnings = nullptr);

/// Applies whatever of cmn/cvn is still needed to reach `target`.
FeatureMatrix normalize(const FeatureMatrix& f, NormState target,
                        std::vector<std::string>* warnings = nullptr);

/// WAV reader for 16-bit PCM little-endian mono files. Preserves the file's
/// sample rate; feature extraction entry points reject anything but 16 kHz.
AudioBuffer read_wav(const std::string& path);
void write_wav(const std::string& path, const AudioBuffer& audio);

/// "CFB1" container: magic, u32 T, u32 D, u8 normalization state, then T*D
/// little-endian f32 values row-major. Round-trips are bit-exact.
void write_features(const std::string& path, const FeatureMatrix& f);
FeatureMatrix read_features(const std::string& path);

void write_features(std::ostream& os, const FeatureMatrix& f);
FeatureMatrix read_features(std::istream& is);

}  // namespace chanfuse

#endif  // CHANFUSE_FEATKIT_HPP_
