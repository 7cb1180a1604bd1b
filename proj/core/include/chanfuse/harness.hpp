// core/include/chanfuse/harness.hpp

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

#ifndef CHANFUSE_HARNESS_HPP_
#define CHANFUSE_HARNESS_HPP_

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "chanfuse/chanweight.hpp"
#include "chanfuse/optim.hpp"
#include "chanfuse/scenegen.hpp"

namespace chanfuse {

/// Everything the batch evaluator can run over a scene suite. ch_best is the
/// per-scene distance-minimizing channel (the upper bound for selection);
/// oracle reports the ground-truth best-SNR channel.
enum class Method {
  kChannelBest,
  kSelectMl,
  kSelectAe,
  kWeightRaw,
  kWeightSoftmax,
  kWeightJacobian,
  kOracle,
};

const char* method_name(Method m);
Method method_from_name(const std::string& name);

struct ExperimentConfig {
  std::string gmm_path;
  std::string ae_path;        // needed only when select_ae is requested
  std::string manifest_path;
  std::string output_path;    // CSV report
  std::vector<Method> methods;
  int threads = 1;
  JacobianConfig weighting;
  LbfgsConfig lbfgs;

  void validate() const;
};

/// One method evaluated on one scene. Metrics that do not apply hold NaN.
struct SceneRow {
  int scene_id = 0;
  Method method = Method::kChannelBest;
  int chosen = 0;             // selection methods; 0 for weighting
  double accuracy = 0.0;      // 1/0 vs the ground-truth channel; NaN for weighting
  double distance = 0.0;      // normalized distance to the clean reference (proxy metric)
  double loglik = 0.0;        // mean log-likelihood of the output features (proxy metric)
  Eigen::VectorXd weights;    // weighting methods; empty otherwise
  std::string status = "ok";  // "ok" or an error note
};

struct MethodAggregate {
  Method method = Method::kChannelBest;
  double accuracy = 0.0;      // mean over scenes (NaN when not applicable)
  double distance = 0.0;
  double loglik = 0.0;
  Eigen::VectorXd mean_weights;
  int scenes = 0;
  int failures = 0;
};

struct MetricReport {
  std::vector<SceneRow> rows;             // sorted by (scene_id, method order)
  std::vector<MethodAggregate> aggregates;
  int num_channels = 0;
};

/// Reads `key = value` lines (# comments allowed). Unknown keys are an error.
ExperimentConfig read_experiment_config(const std::string& path);

/// Runs every requested method on every scene of the manifest. Per-scene
/// failures are recorded in the row status, never fatal. Deterministic for a
/// fixed config regardless of thread count.
MetricReport run_experiment(const ExperimentConfig& cfg);

/// Frobenius distance normalized by sqrt(T * D). Arguments must share shape.
double feature_distance(const FeatureMatrix& a, const FeatureMatrix& b);

/// Scale-free variant used for the report metric: both sides are
/// standardized (mean 0, unit variance per column) before measuring, so each
/// method is compared by feature shape rather than by overall gain.
double normalized_feature_distance(const FeatureMatrix& a, const FeatureMatrix& b);

/// Aligned text table (aggregates) on `os`. Metric columns are labeled as
/// proxies for back-end quality.
void render_report_text(const MetricReport& report, std::ostream& os);

/// CSV with a header row; every numeric field uses 6 significant digits.
/// write(read(csv)) is byte-identical.
void write_report_csv(const MetricReport& report, const std::string& path);
std::string report_csv_string(const MetricReport& report);
MetricReport read_report_csv(const std::string& path);
MetricReport parse_report_csv(std::istream& is);

}  // namespace chanfuse

#endif  // CHANFUSE_HARNESS_HPP_
