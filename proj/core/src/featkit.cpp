// core/src/featkit.cpp

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

#include "chanfuse/featkit.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "chanfuse/binio.hpp"

namespace chanfuse {

namespace {

void check_mel_config(const MelConfig& cfg) {
  if (cfg.n_mels < 1) throw std::invalid_argument("n_mels must be >= 1");
  if (cfg.frame_len > cfg.n_fft) throw std::invalid_argument("frame_len must be <= n_fft");
  if (cfg.hop < 1) throw std::invalid_argument("hop must be >= 1");
  if (cfg.floor <= 0.0) throw std::invalid_argument("log floor must be positive");
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

}  // namespace

Eigen::MatrixXd stft_power(const AudioBuffer& audio, const MelConfig& cfg) {
  check_mel_config(cfg);
  if (audio.sample_rate <= 0) throw std::invalid_argument("sample rate must be positive");
  const auto len = static_cast<Eigen::Index>(audio.samples.size());
  if (len < cfg.frame_len) throw std::runtime_error("utterance too short");

  const Eigen::Index num_frames = (len - cfg.frame_len) / cfg.hop + 1;
  const Eigen::Index num_bins = cfg.n_fft / 2 + 1;

  Eigen::VectorXd window(cfg.frame_len);
  for (int n = 0; n < cfg.frame_len; ++n) {
    window[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / (cfg.frame_len - 1));
  }

  Eigen::FFT<double> fft;
  std::vector<double> frame(cfg.n_fft, 0.0);
  std::vector<std::complex<double>> spectrum(cfg.n_fft);

  Eigen::MatrixXd power(num_frames, num_bins);
  for (Eigen::Index t = 0; t < num_frames; ++t) {
    const double* src = audio.samples.data() + t * cfg.hop;
    for (int n = 0; n < cfg.frame_len; ++n) frame[n] = src[n] * window[n];
    std::fill(frame.begin() + cfg.frame_len, frame.end(), 0.0);
    fft.fwd(spectrum, frame);
    for (Eigen::Index k = 0; k < num_bins; ++k) power(t, k) = std::norm(spectrum[k]);
  }
  return power;
}

Eigen::MatrixXd mel_filterbank(const MelConfig& cfg, int sample_rate) {
  check_mel_config(cfg);
  const int num_bins = cfg.n_fft / 2 + 1;
  const double fmax = cfg.effective_fmax(sample_rate);
  if (cfg.fmin < 0.0 || cfg.fmin >= fmax) throw std::invalid_argument("need 0 <= fmin < fmax");

  // n_mels + 2 equally spaced points on the Mel axis; filter i rises from
  // point i to i+1 and falls to i+2.
  const double mel_lo = hz_to_mel(cfg.fmin);
  const double mel_hi = hz_to_mel(fmax);
  std::vector<double> hz_points(cfg.n_mels + 2);
  for (int i = 0; i < cfg.n_mels + 2; ++i) {
    hz_points[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * i / (cfg.n_mels + 1));
  }

  const double bin_hz = static_cast<double>(sample_rate) / cfg.n_fft;
  Eigen::MatrixXd fb = Eigen::MatrixXd::Zero(cfg.n_mels, num_bins);
  for (int m = 0; m < cfg.n_mels; ++m) {
    const double left = hz_points[m], center = hz_points[m + 1], right = hz_points[m + 2];
    for (int k = 0; k < num_bins; ++k) {
      const double f = k * bin_hz;
      double w = 0.0;
      if (f > left && f < right) {
        w = f <= center ? (f - left) / (center - left) : (right - f) / (right - center);
      }
      fb(m, k) = std::max(0.0, w);
    }
  }
  return fb;
}

FeatureMatrix log_mel(const AudioBuffer& audio, const MelConfig& cfg) {
  const Eigen::MatrixXd power = stft_power(audio, cfg);
  const Eigen::MatrixXd fb = mel_filterbank(cfg, audio.sample_rate);
  FeatureMatrix out;
  out.frames = (power * fb.transpose()).cwiseMax(cfg.floor).array().log().matrix();
  out.norm = NormState::kRaw;
  return out;
}

FeatureMatrix cmn(const FeatureMatrix& f) {
  if (f.num_frames() < 1) throw std::invalid_argument("cmn: empty feature matrix");
  FeatureMatrix out;
  out.frames = f.frames.rowwise() - f.frames.colwise().mean();
  out.norm = f.norm == NormState::kRaw ? NormState::kCmn : f.norm;
  return out;
}

FeatureMatrix cvn(const FeatureMatrix& f, std::vector<std::string>* warnings) {
  if (f.norm == NormState::kRaw) throw std::invalid_argument("cvn: input must be mean-normalized first");
  const auto t = f.num_frames();
  if (t < 1) throw std::invalid_argument("cvn: empty feature matrix");

  FeatureMatrix out;
  out.frames = f.frames;
  out.norm = NormState::kCmnCvn;
  const Eigen::RowVectorXd mean = f.frames.colwise().mean();
  for (Eigen::Index d = 0; d < f.dim(); ++d) {
    const double var = (f.frames.col(d).array() - mean[d]).square().sum() / static_cast<double>(t);
    if (var < 1e-24) {
      if (warnings != nullptr) {
        warnings->push_back("cvn: column " + std::to_string(d) + " is constant, left unscaled");
      }
      continue;
    }
    out.frames.col(d) = f.frames.col(d) / std::sqrt(var);
  }
  return out;
}

FeatureMatrix normalize(const FeatureMatrix& f, NormState target, std::vector<std::string>* warnings) {
  if (target == NormState::kRaw || f.norm == target) return f;
  FeatureMatrix cur = f;
  if (cur.norm == NormState::kRaw) cur = cmn(cur);
  if (target == NormState::kCmnCvn && cur.norm == NormState::kCmn) cur = cvn(cur, warnings);
  return cur;
}

// --- WAV ---------------------------------------------------------------

AudioBuffer read_wav(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open WAV file: " + path);

  binio::expect_magic(is, "RIFF");
  binio::read_u32(is);  // chunk size, unused
  binio::expect_magic(is, "WAVE");

  AudioBuffer out;
  bool have_fmt = false;
  while (true) {
    char id[4];
    if (!is.read(id, 4)) break;
    const std::uint32_t size = binio::read_u32(is);
    const std::string chunk(id, 4);
    if (chunk == "fmt ") {
      const std::uint16_t format = binio::read_u16(is);
      const std::uint16_t channels = binio::read_u16(is);
      const std::uint32_t rate = binio::read_u32(is);
      binio::read_u32(is);  // byte rate
      binio::read_u16(is);  // block align
      const std::uint16_t bits = binio::read_u16(is);
      if (size > 16) is.seekg(size - 16, std::ios::cur);
      if (format != 1) throw std::runtime_error("WAV is not PCM: " + path);
      if (channels != 1) throw std::runtime_error("WAV is not mono: " + path);
      if (bits != 16) throw std::runtime_error("WAV is not 16-bit: " + path);
      out.sample_rate = static_cast<int>(rate);
      have_fmt = true;
    } else if (chunk == "data") {
      if (!have_fmt) throw std::runtime_error("WAV data chunk before fmt: " + path);
      const std::uint32_t count = size / 2;
      out.samples.resize(count);
      for (std::uint32_t i = 0; i < count; ++i) {
        const auto v = static_cast<std::int16_t>(binio::read_u16(is));
        out.samples[i] = static_cast<double>(v) / 32768.0;
      }
      return out;
    } else {
      is.seekg(size + (size & 1), std::ios::cur);  // chunks are word-aligned
    }
  }
  throw std::runtime_error("WAV has no data chunk: " + path);
}

void write_wav(const std::string& path, const AudioBuffer& audio) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write WAV file: " + path);
  const auto count = static_cast<std::uint32_t>(audio.samples.size());
  const std::uint32_t data_bytes = count * 2;

  binio::write_magic(os, "RIFF");
  binio::write_u32(os, 36 + data_bytes);
  binio::write_magic(os, "WAVE");
  binio::write_magic(os, "fmt ");
  binio::write_u32(os, 16);
  binio::write_u16(os, 1);  // PCM
  binio::write_u16(os, 1);  // mono
  binio::write_u32(os, static_cast<std::uint32_t>(audio.sample_rate));
  binio::write_u32(os, static_cast<std::uint32_t>(audio.sample_rate) * 2);
  binio::write_u16(os, 2);
  binio::write_u16(os, 16);
  binio::write_magic(os, "data");
  binio::write_u32(os, data_bytes);
  for (double s : audio.samples) {
    const double clamped = std::clamp(s, -1.0, 32767.0 / 32768.0);
    const auto v = static_cast<std::int16_t>(std::lrint(clamped * 32768.0));
    binio::write_u16(os, static_cast<std::uint16_t>(v));
  }
}

// --- CFB1 --------------------------------------------------------------

void write_features(std::ostream& os, const FeatureMatrix& f) {
  binio::write_magic(os, "CFB1");
  binio::write_u32(os, static_cast<std::uint32_t>(f.num_frames()));
  binio::write_u32(os, static_cast<std::uint32_t>(f.dim()));
  binio::write_u8(os, static_cast<std::uint8_t>(f.norm));
  for (Eigen::Index t = 0; t < f.num_frames(); ++t) {
    for (Eigen::Index d = 0; d < f.dim(); ++d) {
      binio::write_f32(os, static_cast<float>(f.frames(t, d)));
    }
  }
}

FeatureMatrix read_features(std::istream& is) {
  binio::expect_magic(is, "CFB1");
  const std::uint32_t t = binio::read_u32(is);
  const std::uint32_t d = binio::read_u32(is);
  const std::uint8_t state = binio::read_u8(is);
  if (state > 2) throw std::runtime_error("CFB1: bad normalization state");
  FeatureMatrix f;
  f.norm = static_cast<NormState>(state);
  f.frames.resize(t, d);
  for (std::uint32_t i = 0; i < t; ++i) {
    for (std::uint32_t j = 0; j < d; ++j) {
      f.frames(i, j) = static_cast<double>(binio::read_f32(is));
    }
  }
  return f;
}

void write_features(const std::string& path, const FeatureMatrix& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write feature file: " + path);
  write_features(os, f);
}

FeatureMatrix read_features(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open feature file: " + path);
  return read_features(is);
}

}  // namespace chanfuse
