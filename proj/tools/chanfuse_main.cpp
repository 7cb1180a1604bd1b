// tools/chanfuse_main.cpp

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

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "chanfuse/autoencoder.hpp"
#include "chanfuse/chansel.hpp"
#include "chanfuse/chanweight.hpp"
#include "chanfuse/featkit.hpp"
#include "chanfuse/gmm.hpp"
#include "chanfuse/harness.hpp"
#include "chanfuse/rng.hpp"
#include "chanfuse/scenegen.hpp"

namespace fs = std::filesystem;
using namespace chanfuse;

namespace {

std::string format_g6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

struct GlobalOpts {
  std::uint64_t seed = 0;
  std::string config;
  std::string out;
  int threads = 1;
};

NormState parse_norm(const std::string& name) {
  if (name == "raw") return NormState::kRaw;
  if (name == "cmn") return NormState::kCmn;
  if (name == "cmn_cvn") return NormState::kCmnCvn;
  throw CLI::ValidationError("--norm", "must be raw, cmn or cmn_cvn");
}

/// Loads ch_<c>.cfb (+ clean.cfb when present) from a directory written by
/// `simulate`.
struct SceneDir {
  std::string utt_id;
  MultichannelUtterance utterance;
  std::optional<FeatureMatrix> clean;
};

SceneDir load_scene_dir(const std::string& dir) {
  SceneDir scene;
  scene.utt_id = fs::path(dir).filename().string();
  if (scene.utt_id.empty()) scene.utt_id = fs::path(dir).parent_path().filename().string();
  for (int c = 1;; ++c) {
    const fs::path p = fs::path(dir) / ("ch_" + std::to_string(c) + ".cfb");
    if (!fs::exists(p)) break;
    scene.utterance.channels.push_back(read_features(p.string()));
  }
  if (scene.utterance.channels.empty()) {
    throw std::runtime_error("no ch_<c>.cfb files in " + dir);
  }
  const fs::path clean_path = fs::path(dir) / "clean.cfb";
  if (fs::exists(clean_path)) scene.clean = read_features(clean_path.string());
  return scene;
}

MultichannelUtterance normalize_channels(const MultichannelUtterance& u, NormState target) {
  MultichannelUtterance out;
  out.channels.reserve(u.channels.size());
  for (const FeatureMatrix& ch : u.channels) out.channels.push_back(normalize(ch, target));
  return out;
}

/// Feature corpus for the trainers: CFB1 files, or synthetic clean draws.
std::vector<FeatureMatrix> load_corpus(const std::vector<std::string>& paths, int synth_frames,
                                       std::uint64_t seed, NormState target) {
  std::vector<FeatureMatrix> corpus;
  if (synth_frames > 0) {
    corpus.push_back(sample_features(default_reference_model(), synth_frames, seed));
  }
  for (const std::string& p : paths) corpus.push_back(read_features(p));
  if (corpus.empty()) {
    throw std::runtime_error("no training data: give feature files or --synth-frames");
  }
  for (FeatureMatrix& f : corpus) f = normalize(f, target);
  return corpus;
}

int run(int argc, char** argv) {
  CLI::App app{"Microphone channel selection and weighting over log-Mel features"};
  app.require_subcommand(1);

  GlobalOpts global;
  app.add_option("--seed", global.seed, "Seed for every stochastic step")->capture_default_str();
  app.add_option("--config", global.config, "Configuration file (key = value lines)");
  app.add_option("--out", global.out, "Output path (meaning depends on the subcommand)");
  app.add_option("--threads", global.threads, "Worker threads for evaluate")
      ->capture_default_str();

  // features: WAV -> CFB1
  auto* c_feat = app.add_subcommand("features", "Extract 40-dim log-Mel features from 16 kHz WAV");
  std::string feat_in;
  std::string feat_norm = "raw";
  MelConfig mel;
  c_feat->add_option("wav", feat_in, "Input WAV (PCM 16-bit mono)")->required();
  c_feat->add_option("--norm", feat_norm, "Normalization to apply: raw, cmn, cmn_cvn")
      ->capture_default_str();
  c_feat->add_option("--n-mels", mel.n_mels)->capture_default_str();
  c_feat->add_option("--n-fft", mel.n_fft)->capture_default_str();
  c_feat->add_option("--frame-len", mel.frame_len)->capture_default_str();
  c_feat->add_option("--hop", mel.hop)->capture_default_str();

  // train-gmm
  auto* c_gmm = app.add_subcommand("train-gmm", "Train the clean-speech mixture model");
  std::vector<std::string> gmm_inputs;
  int gmm_mixtures = 64;
  int gmm_synth = 0;
  EmConfig em_cfg;
  c_gmm->add_option("features", gmm_inputs, "CFB1 training files");
  c_gmm->add_option("-M,--mixtures", gmm_mixtures)->capture_default_str();
  c_gmm->add_option("--iters", em_cfg.max_iters)->capture_default_str();
  c_gmm->add_option("--var-floor", em_cfg.var_floor)->capture_default_str();
  c_gmm->add_option("--synth-frames", gmm_synth,
                    "Draw this many clean frames from the built-in reference mixture");

  // train-ae
  auto* c_ae = app.add_subcommand("train-ae", "Train the clean-speech reconstruction network");
  std::vector<std::string> ae_inputs;
  int ae_synth = 0;
  AeTrainConfig ae_cfg;
  c_ae->add_option("features", ae_inputs, "CFB1 training files");
  c_ae->add_option("--hidden", ae_cfg.hidden)->capture_default_str();
  c_ae->add_option("--epochs", ae_cfg.epochs)->capture_default_str();
  c_ae->add_option("--lr", ae_cfg.learning_rate)->capture_default_str();
  c_ae->add_option("--batch", ae_cfg.batch_size)->capture_default_str();
  c_ae->add_option("--synth-frames", ae_synth,
                   "Draw this many clean frames from the built-in reference mixture");

  // simulate
  auto* c_sim = app.add_subcommand("simulate", "Render synthetic scenes from a manifest");
  std::string sim_manifest;
  c_sim->add_option("--manifest", sim_manifest, "Scene manifest")->required();

  // select
  auto* c_sel = app.add_subcommand("select", "Pick one channel per scene directory");
  std::vector<std::string> sel_dirs;
  std::string sel_method = "ml";
  std::string sel_gmm, sel_ae;
  c_sel->add_option("scenes", sel_dirs, "Scene directories from `simulate`")->required();
  c_sel->add_option("--method", sel_method, "ml, ae or oracle")->capture_default_str();
  c_sel->add_option("--gmm", sel_gmm, "CGM1 model (for --method ml)");
  c_sel->add_option("--ae", sel_ae, "CAE1 model (for --method ae)");

  // weight
  auto* c_wgt = app.add_subcommand("weight", "Estimate channel weights and write fused features");
  std::vector<std::string> wgt_dirs;
  std::string wgt_kind = "jacobian";
  std::string wgt_gmm;
  JacobianConfig wgt_cfg;
  LbfgsConfig lbfgs_cfg;
  c_wgt->add_option("scenes", wgt_dirs, "Scene directories from `simulate`")->required();
  c_wgt->add_option("--gmm", wgt_gmm, "CGM1 model")->required();
  c_wgt->add_option("--kind", wgt_kind, "raw, softmax or jacobian")->capture_default_str();
  c_wgt->add_option("--beta", wgt_cfg.beta)->capture_default_str();
  c_wgt->add_option("--em-iters", wgt_cfg.em_iters)->capture_default_str();

  // evaluate
  auto* c_eval = app.add_subcommand("evaluate", "Run methods over a manifest and report metrics");

  // report
  auto* c_rep = app.add_subcommand("report", "Render a CSV report as a text table");
  std::string rep_in;
  c_rep->add_option("csv", rep_in, "Report CSV from `evaluate`")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }

  if (c_feat->parsed()) {
    const AudioBuffer audio = read_wav(feat_in);
    if (audio.sample_rate != 16000) {
      throw std::runtime_error("only 16 kHz input is supported (resampling is out of scope), got " +
                               std::to_string(audio.sample_rate) + " Hz");
    }
    const FeatureMatrix f = normalize(log_mel(audio, mel), parse_norm(feat_norm));
    const std::string out =
        global.out.empty() ? fs::path(feat_in).replace_extension(".cfb").string() : global.out;
    write_features(out, f);
    std::cout << out << "\t" << f.num_frames() << "x" << f.dim() << "\n";
    return 0;
  }

  if (c_gmm->parsed()) {
    em_cfg.seed = global.seed;
    const auto corpus = load_corpus(gmm_inputs, gmm_synth, global.seed, NormState::kCmnCvn);
    EmDiagnostics diag;
    const GmmModel model = gmm_train(corpus, gmm_mixtures, em_cfg, &diag);
    const std::string out = global.out.empty() ? "model.cgm" : global.out;
    save_gmm(out, model);
    std::cout << out << "\tM=" << model.num_components() << "\tD=" << model.dim()
              << "\tfinal_loglik=" << format_g6(diag.loglik_trace.back()) << "\n";
    return 0;
  }

  if (c_ae->parsed()) {
    ae_cfg.seed = global.seed;
    const auto corpus = load_corpus(ae_inputs, ae_synth, global.seed, NormState::kCmn);
    AeTrainDiagnostics diag;
    const AutoencoderModel model = ae_train(corpus, ae_cfg, &diag);
    const std::string out = global.out.empty() ? "model.cae" : global.out;
    save_autoencoder(out, model);
    std::cout << out << "\tin=" << model.input_dim() << "\tout=" << model.output_dim()
              << "\tmse=" << format_g6(diag.epoch_mse.back()) << "\n";
    return 0;
  }

  if (c_sim->parsed()) {
    const std::vector<SceneSpec> specs = read_manifest(sim_manifest);
    const std::string out = global.out.empty() ? "scenes" : global.out;
    for (std::size_t i = 0; i < specs.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof(name), "scene_%03zu", i);
      const Scene scene = render_scene(specs[i]);
      write_scene((fs::path(out) / name).string(), scene);
      std::cout << name << "\tC=" << scene.utterance.num_channels()
                << "\toracle=" << scene.meta.oracle_channel << "\n";
    }
    return 0;
  }

  if (c_sel->parsed()) {
    std::optional<GmmModel> gmm;
    std::optional<AutoencoderModel> ae;
    if (sel_method == "ml") {
      if (sel_gmm.empty()) throw CLI::ValidationError("--gmm", "required for --method ml");
      gmm = load_gmm(sel_gmm);
    } else if (sel_method == "ae") {
      if (sel_ae.empty()) throw CLI::ValidationError("--ae", "required for --method ae");
      ae = load_autoencoder(sel_ae);
    } else if (sel_method != "oracle") {
      throw CLI::ValidationError("--method", "must be ml, ae or oracle");
    }
    for (const std::string& dir : sel_dirs) {
      const SceneDir scene = load_scene_dir(dir);
      SelectionResult res;
      if (sel_method == "ml") {
        res = select_ml(*gmm, normalize_channels(scene.utterance, NormState::kCmnCvn));
      } else if (sel_method == "ae") {
        res = select_ae(*ae, normalize_channels(scene.utterance, NormState::kCmn));
      } else {
        if (!scene.clean.has_value()) throw std::runtime_error("no clean.cfb in " + dir);
        FeatureMatrix clean_raw = *scene.clean;
        clean_raw.norm = NormState::kRaw;
        res = select_oracle(normalize_channels(scene.utterance, NormState::kCmnCvn),
                            normalize(clean_raw, NormState::kCmnCvn));
      }
      std::cout << scene.utt_id << "\t" << selection_method_name(res.method) << "\t" << res.chosen;
      for (Eigen::Index c = 0; c < res.scores.size(); ++c) {
        std::cout << "\t" << format_g6(res.scores[c]);
      }
      std::cout << "\n";
    }
    return 0;
  }

  if (c_wgt->parsed()) {
    const GmmModel gmm = load_gmm(wgt_gmm);
    for (const std::string& dir : wgt_dirs) {
      const SceneDir scene = load_scene_dir(dir);
      const MultichannelUtterance norm_u =
          normalize_channels(scene.utterance, NormState::kCmnCvn);
      WeightVector w;
      JacobianConfig cfg = wgt_cfg;
      if (wgt_kind == "raw") {
        cfg.beta = 0.0;
        w = estimate_weights_ml(gmm, norm_u, cfg);
      } else if (wgt_kind == "softmax") {
        cfg.beta = 0.0;
        w = softmax_constrain(estimate_weights_ml(gmm, norm_u, cfg));
      } else if (wgt_kind == "jacobian") {
        w = estimate_weights_jacobian(gmm, norm_u, cfg, lbfgs_cfg);
      } else {
        throw CLI::ValidationError("--kind", "must be raw, softmax or jacobian");
      }
      const double objective = jacobian_objective(gmm, norm_u, w.w, cfg);
      const FeatureMatrix fused = apply_weights(norm_u, w.w);

      const fs::path out_dir = global.out.empty() ? fs::path(dir) : fs::path(global.out);
      fs::create_directories(out_dir);
      const fs::path fused_path = out_dir / (scene.utt_id + "_fused_" + wgt_kind + ".cfb");
      write_features(fused_path.string(), fused);

      std::cout << scene.utt_id << "\t" << weight_kind_name(w.kind);
      for (Eigen::Index c = 0; c < w.w.size(); ++c) std::cout << "\t" << format_g6(w.w[c]);
      std::cout << "\t" << format_g6(objective) << "\n";
    }
    return 0;
  }

  if (c_eval->parsed()) {
    if (global.config.empty()) throw CLI::ValidationError("--config", "required for evaluate");
    ExperimentConfig cfg = read_experiment_config(global.config);
    if (!global.out.empty()) cfg.output_path = global.out;
    if (global.threads > 1) cfg.threads = global.threads;
    const MetricReport report = run_experiment(cfg);
    if (!cfg.output_path.empty()) write_report_csv(report, cfg.output_path);
    render_report_text(report, std::cout);
    return 0;
  }

  if (c_rep->parsed()) {
    render_report_text(read_report_csv(rep_in), std::cout);
    return 0;
  }

  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const CLI::ValidationError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
