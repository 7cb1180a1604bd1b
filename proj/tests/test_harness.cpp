// tests/test_harness.cpp

#include <cmath>
#include <sstream>

#include <doctest.h>

#include "chanfuse/autoencoder.hpp"
#include "chanfuse/gmm.hpp"
#include "chanfuse/harness.hpp"
#include "chanfuse/scenegen.hpp"
#include "test_util.hpp"

using namespace chanfuse;

namespace {

// Shared fixture: a small trained model pair plus a manifest, reused by the
// experiment tests to keep the suite fast.
struct Fixture {
  testutil::TempDir tmp{"harness"};
  std::string gmm_path = tmp.file("model.cgm");
  std::string ae_path = tmp.file("model.cae");

  Fixture() {
    const GmmModel ref = default_reference_model();
    const FeatureMatrix clean = sample_features(ref, 1500, 42);
    EmConfig em;
    em.seed = 1;
    em.max_iters = 8;
    save_gmm(gmm_path, gmm_train({normalize(clean, NormState::kCmnCvn)}, 16, em));

    AeTrainConfig ae;
    ae.hidden = 24;
    ae.epochs = 10;
    ae.seed = 2;
    save_autoencoder(ae_path, ae_train({normalize(clean, NormState::kCmn)}, ae));
  }

  ExperimentConfig config(const std::string& manifest_body,
                          const std::vector<Method>& methods) const {
    testutil::write_file(tmp.file("scenes.txt"), manifest_body);
    ExperimentConfig cfg;
    cfg.gmm_path = gmm_path;
    cfg.ae_path = ae_path;
    cfg.manifest_path = tmp.file("scenes.txt");
    cfg.methods = methods;
    return cfg;
  }
};

Fixture& fixture() {
  static Fixture f;
  return f;
}

const std::vector<Method> kEveryMethod = {
    Method::kChannelBest,   Method::kSelectMl,        Method::kSelectAe, Method::kWeightRaw,
    Method::kWeightSoftmax, Method::kWeightJacobian,  Method::kOracle,
};

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("feature distance is the normalized Frobenius norm") {
  const FeatureMatrix a = testutil::random_features(12, 5, 1);
  CHECK(feature_distance(a, a) == 0.0);

  FeatureMatrix b = a;
  b.frames.array() += 1.0;
  CHECK(feature_distance(a, b) == doctest::Approx(1.0).epsilon(1e-12));

  const FeatureMatrix c = testutil::random_features(12, 5, 2);
  double sq = 0.0;
  for (Eigen::Index t = 0; t < 12; ++t) {
    for (Eigen::Index d = 0; d < 5; ++d) {
      const double diff = a.frames(t, d) - c.frames(t, d);
      sq += diff * diff;
    }
  }
  CHECK(feature_distance(a, c) == doctest::Approx(std::sqrt(sq / 60.0)).epsilon(1e-12));

  CHECK_THROWS_AS(static_cast<void>(feature_distance(a, testutil::random_features(11, 5, 3))),
                  std::invalid_argument);
}

TEST_CASE("the normalized distance ignores gain and offset") {
  const FeatureMatrix a = testutil::random_features(30, 4, 4);
  FeatureMatrix b = a;
  b.frames = 3.0 * a.frames;
  b.frames.array() += 0.75;
  CHECK(normalized_feature_distance(a, b) < 1e-9);
}

TEST_CASE("a noiseless scene gives zero distances and perfect accuracy") {
  auto& fx = fixture();
  const ExperimentConfig cfg = fx.config("5 4 1.0 0.0 0 0.6 feature\n", kEveryMethod);
  const MetricReport report = run_experiment(cfg);
  REQUIRE(report.rows.size() == kEveryMethod.size());
  for (const SceneRow& row : report.rows) {
    INFO(method_name(row.method));
    CHECK(row.status == "ok");
    CHECK(row.distance <= 1e-6);
    if (!std::isnan(row.accuracy)) CHECK(row.accuracy == 1.0);
  }
}

TEST_CASE("reports are deterministic and thread-count independent") {
  auto& fx = fixture();
  const std::string manifest =
      "7 3 1.0 0.1,0.4,0.25 0 0.5 feature\n"
      "8 3 1.0 0.3,0.1,0.35 0 0.5 feature\n"
      "9 3 1.0 0.2,0.5,0.1 0 0.5 feature\n";
  ExperimentConfig cfg = fx.config(manifest, kEveryMethod);
  const std::string once = report_csv_string(run_experiment(cfg));
  const std::string twice = report_csv_string(run_experiment(cfg));
  CHECK(once == twice);

  cfg.threads = 3;
  CHECK(report_csv_string(run_experiment(cfg)) == once);
}

TEST_CASE("csv reports reparse to the same bytes") {
  auto& fx = fixture();
  const ExperimentConfig cfg =
      fx.config("11 3 1.0 0.15,0.4,0.3 0 0.5 feature\n", kEveryMethod);
  const MetricReport report = run_experiment(cfg);
  const std::string csv = report_csv_string(report);

  std::istringstream is(csv);
  const MetricReport parsed = parse_report_csv(is);
  CHECK(report_csv_string(parsed) == csv);
  REQUIRE(parsed.rows.size() == report.rows.size());
  REQUIRE(parsed.aggregates.size() == report.aggregates.size());
  CHECK(parsed.aggregates[1].scenes == 1);
}

TEST_CASE("the per-scene best channel dominates every selection method") {
  auto& fx = fixture();
  const std::string manifest =
      "21 4 1.0 0.1,0.3,0.5,0.2 0 0.5 feature\n"
      "22 4 1.0 0.4,0.1,0.2,0.3 3 0.5 feature\n"
      "23 4 1.0 0.25,0.2,0.1,0.3 0 0.5 feature\n";
  const MetricReport report = run_experiment(fx.config(
      manifest, {Method::kChannelBest, Method::kSelectMl, Method::kSelectAe, Method::kOracle}));

  for (int scene = 0; scene < 3; ++scene) {
    double best = 0.0;
    for (const SceneRow& row : report.rows) {
      if (row.scene_id == scene && row.method == Method::kChannelBest) best = row.distance;
    }
    for (const SceneRow& row : report.rows) {
      if (row.scene_id != scene) continue;
      INFO(method_name(row.method));
      CHECK(row.distance >= best - 1e-12);
    }
  }
}

TEST_CASE("experiment configs parse and reject unknown keys") {
  testutil::TempDir tmp("cfg");
  testutil::write_file(tmp.file("exp.cfg"),
                       "# experiment\n"
                       "gmm = model.cgm\n"
                       "manifest = scenes.txt\n"
                       "methods = select_ml, weight_jacobian\n"
                       "threads = 2\n"
                       "beta = 0.5\n"
                       "out = report.csv\n");
  const ExperimentConfig cfg = read_experiment_config(tmp.file("exp.cfg"));
  CHECK(cfg.gmm_path == "model.cgm");
  CHECK(cfg.manifest_path == "scenes.txt");
  CHECK(cfg.output_path == "report.csv");
  CHECK(cfg.threads == 2);
  CHECK(cfg.weighting.beta == doctest::Approx(0.5));
  REQUIRE(cfg.methods.size() == 2);
  CHECK(cfg.methods[0] == Method::kSelectMl);
  CHECK(cfg.methods[1] == Method::kWeightJacobian);

  testutil::write_file(tmp.file("bad.cfg"), "mystery = 1\n");
  CHECK_THROWS_AS(static_cast<void>(read_experiment_config(tmp.file("bad.cfg"))),
                  std::runtime_error);

  ExperimentConfig invalid;
  CHECK_THROWS_AS(invalid.validate(), std::runtime_error);
}

TEST_CASE("per-scene failures are recorded without aborting the run") {
  auto& fx = fixture();
  testutil::TempDir tmp("failure");

  // An autoencoder whose feature dimension cannot match the scenes.
  AeTrainConfig ae;
  ae.hidden = 6;
  ae.epochs = 1;
  ae.seed = 3;
  const FeatureMatrix small = normalize(testutil::random_features(40, 8, 5), NormState::kCmn);
  const std::string bad_ae = tmp.file("bad.cae");
  save_autoencoder(bad_ae, ae_train({small}, ae));

  ExperimentConfig cfg = fx.config("31 3 1.0 0.2,0.4,0.3 0 0.5 feature\n",
                                   {Method::kSelectMl, Method::kSelectAe});
  cfg.ae_path = bad_ae;
  const MetricReport report = run_experiment(cfg);
  REQUIRE(report.rows.size() == 2);
  CHECK(report.rows[0].status == "ok");
  CHECK(report.rows[1].status != "ok");
  CHECK(report.aggregates[1].failures == 1);
}

TEST_CASE("text rendering labels the proxy metrics") {
  auto& fx = fixture();
  const MetricReport report = run_experiment(
      fx.config("41 3 1.0 0.15,0.3,0.45 0 0.5 feature\n", {Method::kSelectMl, Method::kWeightRaw}));
  std::ostringstream os;
  render_report_text(report, os);
  const std::string text = os.str();
  CHECK(text.find("dist_clean(proxy)") != std::string::npos);
  CHECK(text.find("loglik(proxy)") != std::string::npos);
  CHECK(text.find("select_ml") != std::string::npos);
  CHECK(text.find("weight_raw") != std::string::npos);
}

TEST_CASE("the golden report stays stable") {
  auto& fx = fixture();
  ExperimentConfig cfg = fx.config(
      "51 3 1.0 0.1,0.3,0.2 0 0.4 feature\n"
      "52 3 1.0 0.25,0.12,0.3 0 0.4 feature\n",
      {Method::kChannelBest, Method::kSelectMl, Method::kWeightJacobian, Method::kOracle});
  const std::string csv = report_csv_string(run_experiment(cfg));
  const std::string golden_path = std::string(CHANFUSE_TEST_DATA_DIR) + "/golden_report.csv";
  const std::string golden = testutil::read_file_bytes(golden_path);
  if (golden.empty()) {
    // Bootstrap mode: write the file so it can be frozen into the repo.
    testutil::write_file(golden_path, csv);
    FAIL("golden_report.csv was missing; it has been regenerated, rerun the suite");
  }
  CHECK(csv == golden);
}

}  // TEST_SUITE
