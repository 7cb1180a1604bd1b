// core/src/scenegen.cpp

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

#include "chanfuse/scenegen.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "chanfuse/rng.hpp"

namespace chanfuse {

namespace {

double broadcast_at(const std::vector<double>& values, int channel_id, double fallback) {
  if (values.empty()) return fallback;
  if (values.size() == 1) return values[0];
  return values[static_cast<std::size_t>(channel_id - 1)];
}

// Population variance of all entries, the signal-power convention of the
// scene SNRs.
double pooled_variance(const Eigen::MatrixXd& m) {
  const double mean = m.mean();
  return (m.array() - mean).square().mean();
}

double pooled_variance(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  return var / static_cast<double>(v.size());
}

double snr_db_of(double signal_var, double sigma) {
  if (sigma <= 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(signal_var / (sigma * sigma));
}

int arg_max_snr(const std::vector<double>& snr) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(snr.size()); ++i) {
    if (snr[i] > snr[best]) best = i;
  }
  return best + 1;
}

}  // namespace

double SceneSpec::gain_of(int channel_id) const { return broadcast_at(gains, channel_id, 1.0); }

double SceneSpec::effective_sigma(int channel_id) const {
  double sigma = broadcast_at(noise_sigma, channel_id, 0.0);
  if (channel_id == degraded_channel) sigma *= degraded_noise_factor;
  return sigma;
}

void SceneSpec::validate() const {
  if (num_channels < 1) throw std::invalid_argument("scene: needs at least one channel");
  const auto check_list = [&](const std::vector<double>& v, const char* what) {
    if (!v.empty() && v.size() != 1 && v.size() != static_cast<std::size_t>(num_channels)) {
      throw std::invalid_argument(std::string("scene: ") + what + " list must have 1 or C entries");
    }
  };
  check_list(gains, "gain");
  check_list(noise_sigma, "sigma");
  for (double g : gains) {
    if (g <= 0.0) throw std::invalid_argument("scene: gains must be positive");
  }
  for (double s : noise_sigma) {
    if (s < 0.0) throw std::invalid_argument("scene: noise sigma must be non-negative");
  }
  if (degraded_channel < 0 || degraded_channel > num_channels) {
    throw std::invalid_argument("scene: degraded channel id out of range");
  }
  if (degraded_noise_factor <= 0.0) throw std::invalid_argument("scene: degraded factor must be positive");
  if (length_seconds <= 0.0) throw std::invalid_argument("scene: length must be positive");
}

Scene make_scene(const FeatureMatrix& clean, const SceneSpec& spec) {
  spec.validate();
  if (spec.mode != SceneMode::kFeature) {
    throw std::invalid_argument("make_scene: feature-matrix clean material needs feature mode");
  }
  if (clean.num_frames() < 1) throw std::invalid_argument("make_scene: empty clean features");

  Scene scene;
  scene.meta.clean = clean;
  const double clean_var = pooled_variance(clean.frames);

  scene.utterance.channels.resize(spec.num_channels);
  scene.meta.snr_db.resize(spec.num_channels);
  for (int c = 1; c <= spec.num_channels; ++c) {
    const double gain = spec.gain_of(c);
    const double sigma = spec.effective_sigma(c);
    Rng rng(Rng::mix(spec.seed, static_cast<std::uint64_t>(c)));
    FeatureMatrix& ch = scene.utterance.channels[c - 1];
    ch.frames = gain * clean.frames;
    if (sigma > 0.0) {
      for (Eigen::Index t = 0; t < ch.frames.rows(); ++t) {
        for (Eigen::Index d = 0; d < ch.frames.cols(); ++d) ch.frames(t, d) += sigma * rng.normal();
      }
    }
    ch.norm = NormState::kRaw;
    scene.meta.snr_db[c - 1] = snr_db_of(gain * gain * clean_var, sigma);
  }
  scene.meta.oracle_channel = arg_max_snr(scene.meta.snr_db);
  return scene;
}

Scene make_scene(const AudioBuffer& clean, const SceneSpec& spec) {
  spec.validate();
  if (spec.mode != SceneMode::kSignal) {
    throw std::invalid_argument("make_scene: audio clean material needs signal mode");
  }
  if (clean.samples.empty()) throw std::invalid_argument("make_scene: empty clean audio");

  Scene scene;
  scene.meta.clean = log_mel(clean, spec.mel);
  const double clean_var = pooled_variance(clean.samples);

  scene.utterance.channels.resize(spec.num_channels);
  scene.meta.snr_db.resize(spec.num_channels);
  for (int c = 1; c <= spec.num_channels; ++c) {
    const double gain = spec.gain_of(c);
    const double sigma = spec.effective_sigma(c);
    Rng rng(Rng::mix(spec.seed, static_cast<std::uint64_t>(c)));
    AudioBuffer noisy;
    noisy.sample_rate = clean.sample_rate;
    noisy.samples.resize(clean.samples.size());
    for (std::size_t i = 0; i < clean.samples.size(); ++i) {
      noisy.samples[i] = gain * clean.samples[i] + (sigma > 0.0 ? sigma * rng.normal() : 0.0);
    }
    scene.utterance.channels[c - 1] = log_mel(noisy, spec.mel);
    scene.meta.snr_db[c - 1] = snr_db_of(gain * gain * clean_var, sigma);
  }
  scene.meta.oracle_channel = arg_max_snr(scene.meta.snr_db);
  return scene;
}

GmmModel reference_model(int dim, int num_components, std::uint64_t seed) {
  if (dim < 1 || num_components < 1) throw std::invalid_argument("reference_model: bad shape");
  Rng rng(Rng::mix(seed, 0x7265666d6f64ull));
  GmmModel model;
  model.weights.resize(num_components);
  model.means.resize(num_components, dim);
  model.vars.resize(num_components, dim);
  for (int m = 0; m < num_components; ++m) {
    model.weights[m] = 1.0 + 0.25 * rng.uniform();
    for (int d = 0; d < dim; ++d) {
      model.means(m, d) = rng.uniform(-2.2, 2.2);
      model.vars(m, d) = rng.uniform(0.05, 0.3);
    }
  }
  model.weights /= model.weights.sum();

  // Standardize so each dimension of the mixture has mean 0 and variance 1;
  // clean material drawn from the model is then nearly invariant under
  // per-utterance mean/variance normalization.
  for (int d = 0; d < dim; ++d) {
    const double mix_mean = model.weights.dot(model.means.col(d));
    double mix_var = 0.0;
    for (int m = 0; m < num_components; ++m) {
      const double centered = model.means(m, d) - mix_mean;
      mix_var += model.weights[m] * (model.vars(m, d) + centered * centered);
    }
    const double scale = 1.0 / std::sqrt(mix_var);
    for (int m = 0; m < num_components; ++m) {
      model.means(m, d) = (model.means(m, d) - mix_mean) * scale;
      model.vars(m, d) *= scale * scale;
    }
  }
  model.validate();
  return model;
}

GmmModel default_reference_model() { return reference_model(40, 8, 7); }

FeatureMatrix sample_features(const GmmModel& model, int num_frames, std::uint64_t seed) {
  if (num_frames < 1) throw std::invalid_argument("sample_features: need at least one frame");
  model.validate();
  Rng rng(Rng::mix(seed, 0x73616d706c65ull));
  const int dim = model.dim();

  Eigen::VectorXd cumulative(model.num_components());
  double acc = 0.0;
  for (int m = 0; m < model.num_components(); ++m) {
    acc += model.weights[m];
    cumulative[m] = acc;
  }

  FeatureMatrix out;
  out.frames.resize(num_frames, dim);
  out.norm = NormState::kRaw;
  for (int t = 0; t < num_frames; ++t) {
    const double u = rng.uniform() * acc;
    int comp = 0;
    while (comp + 1 < model.num_components() && u > cumulative[comp]) ++comp;
    for (int d = 0; d < dim; ++d) {
      out.frames(t, d) = model.means(comp, d) + std::sqrt(model.vars(comp, d)) * rng.normal();
    }
  }
  return out;
}

AudioBuffer synth_tone_audio(std::uint64_t seed, double seconds, double noise_sigma,
                             int sample_rate) {
  if (seconds <= 0.0) throw std::invalid_argument("synth_tone_audio: length must be positive");
  Rng rng(Rng::mix(seed, 0x746f6e6573ull));
  AudioBuffer out;
  out.sample_rate = sample_rate;
  const auto count = static_cast<std::size_t>(seconds * sample_rate);
  out.samples.resize(count);

  // Harmonics of 200 Hz; at 16 kHz the fundamental period is exactly 80
  // samples, so the noiseless waveform is exactly periodic (phases are
  // evaluated modulo the period).
  const int period = sample_rate / 200;
  constexpr int kHarmonics = 4;
  double amp[kHarmonics];
  double phase[kHarmonics];
  for (int h = 0; h < kHarmonics; ++h) {
    amp[h] = rng.uniform(0.05, 0.18);
    phase[h] = rng.uniform(0.0, 2.0 * std::numbers::pi);
  }
  for (std::size_t i = 0; i < count; ++i) {
    const auto n = static_cast<int>(i % static_cast<std::size_t>(period));
    double s = 0.0;
    for (int h = 0; h < kHarmonics; ++h) {
      s += amp[h] * std::sin(2.0 * std::numbers::pi * (h + 1) * n / period + phase[h]);
    }
    if (noise_sigma > 0.0) s += noise_sigma * rng.normal();
    out.samples[i] = s;
  }
  return out;
}

SceneSpec parse_manifest_line(const std::string& line) {
  std::istringstream is(line);
  std::string gains_field, sigmas_field, mode_field;
  SceneSpec spec;
  double length = 0.0;
  if (!(is >> spec.seed >> spec.num_channels >> gains_field >> sigmas_field >>
        spec.degraded_channel >> length >> mode_field)) {
    throw std::runtime_error("manifest: expected 'seed C gains sigmas degraded length mode'");
  }
  spec.length_seconds = length;

  const auto parse_list = [](const std::string& field) {
    std::vector<double> values;
    std::istringstream fs(field);
    std::string item;
    while (std::getline(fs, item, ',')) {
      if (item.empty()) throw std::runtime_error("manifest: empty list entry");
      values.push_back(std::stod(item));
    }
    return values;
  };
  spec.gains = parse_list(gains_field);
  spec.noise_sigma = parse_list(sigmas_field);

  if (mode_field == "feature") {
    spec.mode = SceneMode::kFeature;
  } else if (mode_field == "signal") {
    spec.mode = SceneMode::kSignal;
  } else {
    throw std::runtime_error("manifest: mode must be 'feature' or 'signal'");
  }
  spec.validate();
  return spec;
}

std::vector<SceneSpec> read_manifest(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open manifest: " + path);
  std::vector<SceneSpec> specs;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    try {
      specs.push_back(parse_manifest_line(line));
    } catch (const std::exception& e) {
      throw std::runtime_error("manifest line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return specs;
}

Scene render_scene(const SceneSpec& spec) {
  spec.validate();
  if (spec.mode == SceneMode::kFeature) {
    const FeatureMatrix clean = sample_features(default_reference_model(), spec.feature_frames(),
                                                Rng::mix(spec.seed, 0x636c65616eull));
    return make_scene(clean, spec);
  }
  const AudioBuffer clean =
      synth_tone_audio(Rng::mix(spec.seed, 0x636c65616eull), spec.length_seconds, 0.01);
  return make_scene(clean, spec);
}

void write_scene(const std::string& dir, const Scene& scene) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const fs::path base(dir);
  for (int c = 1; c <= scene.utterance.num_channels(); ++c) {
    write_features((base / ("ch_" + std::to_string(c) + ".cfb")).string(),
                   scene.utterance.channels[c - 1]);
  }
  write_features((base / "clean.cfb").string(), scene.meta.clean);

  std::ofstream meta((base / "meta.txt").string());
  if (!meta) throw std::runtime_error("cannot write scene metadata in " + dir);
  meta << "channels=" << scene.utterance.num_channels() << "\n";
  meta << "frames=" << scene.utterance.num_frames() << "\n";
  meta << "dim=" << scene.utterance.dim() << "\n";
  meta << "oracle=" << scene.meta.oracle_channel << "\n";
  for (int c = 1; c <= scene.utterance.num_channels(); ++c) {
    const double snr = scene.meta.snr_db[c - 1];
    meta << "snr_" << c << "=";
    if (std::isinf(snr)) {
      meta << "inf";
    } else {
      meta << snr;
    }
    meta << "\n";
  }
}

}  // namespace chanfuse
