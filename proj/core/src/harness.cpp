// core/src/harness.cpp

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

#include "chanfuse/harness.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "chanfuse/autoencoder.hpp"
#include "chanfuse/chansel.hpp"

namespace chanfuse {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

const Method kAllMethods[] = {
    Method::kChannelBest, Method::kSelectMl,      Method::kSelectAe, Method::kWeightRaw,
    Method::kWeightSoftmax, Method::kWeightJacobian, Method::kOracle,
};

std::string format_g6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string format_weights(const Eigen::VectorXd& w) {
  std::string out;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (i > 0) out += ';';
    out += format_g6(w[i]);
  }
  return out;
}

Eigen::VectorXd parse_weights(const std::string& field) {
  if (field.empty()) return {};
  std::vector<double> values;
  std::istringstream is(field);
  std::string item;
  while (std::getline(is, item, ';')) values.push_back(std::stod(item));
  return Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace

const char* method_name(Method m) {
  switch (m) {
    case Method::kChannelBest: return "ch_best";
    case Method::kSelectMl: return "select_ml";
    case Method::kSelectAe: return "select_ae";
    case Method::kWeightRaw: return "weight_raw";
    case Method::kWeightSoftmax: return "weight_softmax";
    case Method::kWeightJacobian: return "weight_jacobian";
    case Method::kOracle: return "oracle";
  }
  return "unknown";
}

Method method_from_name(const std::string& name) {
  for (Method m : kAllMethods) {
    if (name == method_name(m)) return m;
  }
  throw std::runtime_error("unknown method: " + name);
}

void ExperimentConfig::validate() const {
  if (methods.empty()) throw std::runtime_error("experiment: no methods requested");
  if (manifest_path.empty()) throw std::runtime_error("experiment: manifest path missing");
  if (threads < 1) throw std::runtime_error("experiment: thread count must be >= 1");
  bool needs_ae = false;
  for (Method m : methods) needs_ae |= m == Method::kSelectAe;
  // The likelihood proxy metric needs the model even for oracle rows.
  if (gmm_path.empty()) throw std::runtime_error("experiment: gmm model path missing");
  if (needs_ae && ae_path.empty()) {
    throw std::runtime_error("experiment: select_ae requested but no autoencoder path");
  }
}

double feature_distance(const FeatureMatrix& a, const FeatureMatrix& b) {
  if (a.num_frames() != b.num_frames() || a.dim() != b.dim()) {
    throw std::invalid_argument("feature_distance: shape mismatch");
  }
  return (a.frames - b.frames).norm() /
         std::sqrt(static_cast<double>(a.num_frames() * a.dim()));
}

namespace {

FeatureMatrix standardized(const FeatureMatrix& f) {
  FeatureMatrix raw = f;
  raw.norm = NormState::kRaw;
  return normalize(raw, NormState::kCmnCvn);
}

}  // namespace

double normalized_feature_distance(const FeatureMatrix& a, const FeatureMatrix& b) {
  return feature_distance(standardized(a), standardized(b));
}

ExperimentConfig read_experiment_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config: " + path);

  ExperimentConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    if (key == "gmm") {
      cfg.gmm_path = value;
    } else if (key == "ae") {
      cfg.ae_path = value;
    } else if (key == "manifest") {
      cfg.manifest_path = value;
    } else if (key == "out") {
      cfg.output_path = value;
    } else if (key == "threads") {
      cfg.threads = std::stoi(value);
    } else if (key == "beta") {
      cfg.weighting.beta = std::stod(value);
    } else if (key == "em_iters") {
      cfg.weighting.em_iters = std::stoi(value);
    } else if (key == "cov_epsilon") {
      cfg.weighting.cov_epsilon = std::stod(value);
    } else if (key == "ridge") {
      cfg.weighting.ridge = std::stod(value);
    } else if (key == "methods") {
      std::istringstream ms(value);
      std::string name;
      while (std::getline(ms, name, ',')) {
        const auto b = name.find_first_not_of(" \t");
        const auto e = name.find_last_not_of(" \t");
        if (b == std::string::npos) continue;
        cfg.methods.push_back(method_from_name(name.substr(b, e - b + 1)));
      }
    } else {
      throw std::runtime_error("config line " + std::to_string(line_no) + ": unknown key '" + key +
                               "'");
    }
  }
  return cfg;
}

namespace {

struct SceneModels {
  const GmmModel* gmm = nullptr;
  const AutoencoderModel* ae = nullptr;
};

std::vector<SceneRow> evaluate_scene(int scene_id, const SceneSpec& spec, const SceneModels& models,
                                     const ExperimentConfig& cfg) {
  const Scene scene = render_scene(spec);

  MultichannelUtterance norm_u;   // mean+variance normalized, for GMM methods
  MultichannelUtterance cmn_u;    // mean normalized, for the autoencoder
  norm_u.channels.reserve(scene.utterance.channels.size());
  cmn_u.channels.reserve(scene.utterance.channels.size());
  for (const FeatureMatrix& ch : scene.utterance.channels) {
    const FeatureMatrix centered = cmn(ch);
    cmn_u.channels.push_back(centered);
    norm_u.channels.push_back(cvn(centered));
  }
  const FeatureMatrix clean_norm = standardized(scene.meta.clean);

  // The raw estimate is shared by weight_raw and weight_softmax.
  std::optional<WeightVector> raw_weights;
  const auto ml_weights = [&]() -> const WeightVector& {
    if (!raw_weights.has_value()) {
      raw_weights = estimate_weights_ml(*models.gmm, norm_u, cfg.weighting);
    }
    return *raw_weights;
  };

  std::vector<SceneRow> rows;
  rows.reserve(cfg.methods.size());
  for (Method method : cfg.methods) {
    SceneRow row;
    row.scene_id = scene_id;
    row.method = method;
    row.accuracy = kNan;
    row.distance = kNan;
    row.loglik = kNan;
    try {
      switch (method) {
        case Method::kChannelBest:
        case Method::kSelectMl:
        case Method::kSelectAe:
        case Method::kOracle: {
          int chosen = 0;
          if (method == Method::kChannelBest) {
            chosen = select_oracle(norm_u, clean_norm).chosen;
          } else if (method == Method::kSelectMl) {
            chosen = select_ml(*models.gmm, norm_u).chosen;
          } else if (method == Method::kSelectAe) {
            chosen = select_ae(*models.ae, cmn_u).chosen;
          } else {
            chosen = scene.meta.oracle_channel;
          }
          row.chosen = chosen;
          row.accuracy = chosen == scene.meta.oracle_channel ? 1.0 : 0.0;
          const FeatureMatrix& picked = norm_u.channels[chosen - 1];
          row.distance = normalized_feature_distance(picked, clean_norm);
          row.loglik = utterance_score(*models.gmm, picked);
          break;
        }
        case Method::kWeightRaw:
        case Method::kWeightSoftmax:
        case Method::kWeightJacobian: {
          WeightVector w;
          if (method == Method::kWeightRaw) {
            w = ml_weights();
          } else if (method == Method::kWeightSoftmax) {
            w = softmax_constrain(ml_weights());
          } else {
            w = estimate_weights_jacobian(*models.gmm, norm_u, cfg.weighting, cfg.lbfgs);
          }
          row.weights = w.w;
          const FeatureMatrix fused = apply_weights(norm_u, w.w);
          row.distance = normalized_feature_distance(fused, clean_norm);
          row.loglik = utterance_score(*models.gmm, fused);
          break;
        }
      }
    } catch (const std::exception& e) {
      row.status = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

MetricReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::vector<SceneSpec> specs = read_manifest(cfg.manifest_path);
  if (specs.empty()) throw std::runtime_error("experiment: manifest has no scenes");

  const GmmModel gmm = load_gmm(cfg.gmm_path);
  std::optional<AutoencoderModel> ae;
  for (Method m : cfg.methods) {
    if (m == Method::kSelectAe) {
      ae = load_autoencoder(cfg.ae_path);
      break;
    }
  }
  SceneModels models;
  models.gmm = &gmm;
  models.ae = ae.has_value() ? &*ae : nullptr;

  // Scenes are rendered and evaluated in parallel; results land in a
  // per-scene slot, so aggregation is independent of completion order.
  std::vector<std::vector<SceneRow>> per_scene(specs.size());
  std::atomic<std::size_t> next{0};
  std::vector<std::string> worker_errors(std::max<std::size_t>(1, cfg.threads));
  const auto worker = [&](std::size_t worker_id) {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= specs.size()) return;
      try {
        per_scene[i] = evaluate_scene(static_cast<int>(i), specs[i], models, cfg);
      } catch (const std::exception& e) {
        worker_errors[worker_id] = e.what();
        return;
      }
    }
  };
  if (cfg.threads <= 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(cfg.threads);
    for (int i = 0; i < cfg.threads; ++i) pool.emplace_back(worker, static_cast<std::size_t>(i));
    for (std::thread& t : pool) t.join();
  }
  for (const std::string& err : worker_errors) {
    if (!err.empty()) throw std::runtime_error("experiment worker failed: " + err);
  }

  MetricReport report;
  report.num_channels = specs.front().num_channels;
  for (std::vector<SceneRow>& rows : per_scene) {
    for (SceneRow& row : rows) report.rows.push_back(std::move(row));
  }

  // Aggregates over successful rows, in the order methods were requested.
  for (Method method : cfg.methods) {
    MethodAggregate agg;
    agg.method = method;
    double acc_sum = 0.0, dist_sum = 0.0, ll_sum = 0.0;
    int acc_n = 0, ok_n = 0;
    Eigen::VectorXd w_sum;
    int w_n = 0;
    for (const SceneRow& row : report.rows) {
      if (row.method != method) continue;
      ++agg.scenes;
      if (row.status != "ok") {
        ++agg.failures;
        continue;
      }
      ++ok_n;
      dist_sum += row.distance;
      ll_sum += row.loglik;
      if (!std::isnan(row.accuracy)) {
        acc_sum += row.accuracy;
        ++acc_n;
      }
      if (row.weights.size() > 0) {
        if (w_n == 0) w_sum = Eigen::VectorXd::Zero(row.weights.size());
        w_sum += row.weights;
        ++w_n;
      }
    }
    agg.accuracy = acc_n > 0 ? acc_sum / acc_n : kNan;
    agg.distance = ok_n > 0 ? dist_sum / ok_n : kNan;
    agg.loglik = ok_n > 0 ? ll_sum / ok_n : kNan;
    if (w_n > 0) agg.mean_weights = w_sum / w_n;
    report.aggregates.push_back(std::move(agg));
  }
  return report;
}

// --- report rendering ----------------------------------------------------

namespace {

constexpr const char* kCsvHeader =
    "scene,method,chosen,accuracy,distance,loglik,weights,scenes,failures,status";

std::string csv_field(double v) { return std::isnan(v) ? std::string() : format_g6(v); }

}  // namespace

std::string report_csv_string(const MetricReport& report) {
  std::ostringstream os;
  os << kCsvHeader << "\n";
  for (const SceneRow& row : report.rows) {
    os << row.scene_id << ',' << method_name(row.method) << ','
       << (row.chosen > 0 ? std::to_string(row.chosen) : std::string()) << ','
       << csv_field(row.accuracy) << ',' << csv_field(row.distance) << ','
       << csv_field(row.loglik) << ',' << format_weights(row.weights) << ",,," << row.status
       << "\n";
  }
  for (const MethodAggregate& agg : report.aggregates) {
    os << "ALL," << method_name(agg.method) << ",," << csv_field(agg.accuracy) << ','
       << csv_field(agg.distance) << ',' << csv_field(agg.loglik) << ','
       << format_weights(agg.mean_weights) << ',' << agg.scenes << ',' << agg.failures << ",\n";
  }
  return os.str();
}

void write_report_csv(const MetricReport& report, const std::string& path) {
  std::ofstream os(path, std::ios::binary);  // binary: byte-identical across platforms
  if (!os) throw std::runtime_error("cannot write report: " + path);
  os << report_csv_string(report);
}

MetricReport parse_report_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("report: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) throw std::runtime_error("report: unexpected header");

  MetricReport report;
  const auto parse_double = [](const std::string& s) { return s.empty() ? kNan : std::stod(s); };
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ls(line);
    while (std::getline(ls, field, ',')) fields.push_back(field);
    fields.resize(10);  // trailing empties are dropped by getline

    if (fields[0] == "ALL") {
      MethodAggregate agg;
      agg.method = method_from_name(fields[1]);
      agg.accuracy = parse_double(fields[3]);
      agg.distance = parse_double(fields[4]);
      agg.loglik = parse_double(fields[5]);
      agg.mean_weights = parse_weights(fields[6]);
      agg.scenes = fields[7].empty() ? 0 : std::stoi(fields[7]);
      agg.failures = fields[8].empty() ? 0 : std::stoi(fields[8]);
      report.aggregates.push_back(std::move(agg));
    } else {
      SceneRow row;
      row.scene_id = std::stoi(fields[0]);
      row.method = method_from_name(fields[1]);
      row.chosen = fields[2].empty() ? 0 : std::stoi(fields[2]);
      row.accuracy = parse_double(fields[3]);
      row.distance = parse_double(fields[4]);
      row.loglik = parse_double(fields[5]);
      row.weights = parse_weights(fields[6]);
      row.status = fields[9];
      if (row.weights.size() > report.num_channels) {
        report.num_channels = static_cast<int>(row.weights.size());
      }
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

MetricReport read_report_csv(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open report: " + path);
  return parse_report_csv(is);
}

void render_report_text(const MetricReport& report, std::ostream& os) {
  // Distance/likelihood are desk-scale proxies for back-end quality, and the
  // headers say so.
  os << std::left << std::setw(16) << "method" << std::right << std::setw(10) << "accuracy"
     << std::setw(19) << "dist_clean(proxy)" << std::setw(15) << "loglik(proxy)" << std::setw(9)
     << "scenes" << std::setw(10) << "failures" << "  mean_weights\n";
  for (const MethodAggregate& agg : report.aggregates) {
    const auto cell = [](double v) { return std::isnan(v) ? std::string("-") : format_g6(v); };
    os << std::left << std::setw(16) << method_name(agg.method) << std::right << std::setw(10)
       << cell(agg.accuracy) << std::setw(19) << cell(agg.distance) << std::setw(15)
       << cell(agg.loglik) << std::setw(9) << agg.scenes << std::setw(10) << agg.failures << "  "
       << (agg.mean_weights.size() > 0 ? format_weights(agg.mean_weights) : std::string("-"))
       << "\n";
  }
}

}  // namespace chanfuse
