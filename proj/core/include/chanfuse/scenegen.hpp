// core/include/chanfuse/scenegen.hpp

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

#ifndef CHANFUSE_SCENEGEN_HPP_
#define CHANFUSE_SCENEGEN_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "chanfuse/chansel.hpp"
#include "chanfuse/featkit.hpp"
#include "chanfuse/gmm.hpp"

namespace chanfuse {

enum class SceneMode { kSignal, kFeature };

/// Synthetic multichannel scene: channel c = gain_c * clean + white noise of
/// strength sigma_c. The degraded channel, when set, gets its sigma scaled by
/// degraded_noise_factor (a microphone facing away from the talker).
struct SceneSpec {
  int num_channels = 6;
  std::vector<double> gains;        // size C; empty means all 1
  std::vector<double> noise_sigma;  // size C; empty means all 0
  SceneMode mode = SceneMode::kFeature;
  int degraded_channel = 0;  // 1-based id, 0 = none
  double degraded_noise_factor = 10.0;
  double length_seconds = 7.0;
  std::uint64_t seed = 0;
  MelConfig mel;  // used in signal mode only

  /// Frames generated in feature mode (100 frames per second).
  int feature_frames() const { return static_cast<int>(length_seconds * 100.0 + 0.5); }

  double gain_of(int channel_id) const;
  double effective_sigma(int channel_id) const;  // with the degraded factor applied
  void validate() const;
};

struct SceneMeta {
  std::vector<double> snr_db;  // +infinity when sigma is 0
  int oracle_channel = 1;      // argmax SNR, ties to the lowest id
  FeatureMatrix clean;         // reference features, raw state
};

struct Scene {
  MultichannelUtterance utterance;  // raw features per channel
  SceneMeta meta;
};

/// Feature-domain scene: noise added directly to feature entries.
Scene make_scene(const FeatureMatrix& clean, const SceneSpec& spec);

/// Signal-domain scene: noise added to samples, then log-Mel per channel.
Scene make_scene(const AudioBuffer& clean, const SceneSpec& spec);

/// Deterministic standardized reference mixture (per-dimension mixture mean 0
/// and variance 1) used as the clean-feature generator. Ground truth for
/// likelihood scoring of synthetic material.
GmmModel reference_model(int dim, int num_components, std::uint64_t seed);

/// The reference model shared by the CLI defaults (40 dims, 8 components).
GmmModel default_reference_model();

/// Clean feature material: frames drawn from the given mixture.
FeatureMatrix sample_features(const GmmModel& model, int num_frames, std::uint64_t seed);

/// Clean audio material: a few exact-period harmonics plus white noise.
AudioBuffer synth_tone_audio(std::uint64_t seed, double seconds, double noise_sigma,
                             int sample_rate = 16000);

/// Line-oriented manifest, one scene per line:
///   seed C gains sigmas degraded length mode
/// where gains/sigmas are comma-separated (a single value broadcasts), mode is
/// "feature" or "signal", and '#' starts a comment.
std::vector<SceneSpec> read_manifest(const std::string& path);
SceneSpec parse_manifest_line(const std::string& line);

/// Renders a scene from its spec, generating clean material from the default
/// reference model (feature mode) or the tone synthesizer (signal mode).
Scene render_scene(const SceneSpec& spec);

/// Writes ch_<c>.cfb, clean.cfb and a key=value meta.txt into `dir`.
void write_scene(const std::string& dir, const Scene& scene);

}  // namespace chanfuse

#endif  // CHANFUSE_SCENEGEN_HPP_
