#include <doctest.h>

#include <set>

#include "aukit/charts.hpp"
#include "aukit/config.hpp"
#include "aukit/errors.hpp"
#include "aukit/pipeline.hpp"
#include "aukit/reports.hpp"
#include "aukit/synth.hpp"
#include "golden_fixtures.hpp"
#include "support.hpp"

using namespace aukit;
using testing::error_of;

namespace {

std::string golden(const char* name) { return read_file(std::filesystem::path(AUKIT_GOLDEN_DIR) / name); }

}  // namespace

TEST_CASE("config defaults") {
  const PipelineConfig c;
  CHECK(c.phase == "EI");
  CHECK(c.pca_threshold == 0.95);
  CHECK(c.test_frac == 0.2);
  CHECK(c.k == 2);
  CHECK(c.split == SplitMode::stratified);
  CHECK(c.num_kernels == 10000);
  CHECK(c.emotions == std::vector<std::string>{"Happiness", "Sadness"});
}

TEST_CASE("config JSON") {
  PipelineConfig c;
  c.phase = "baseline";
  c.k = 3;
  c.linkage = Linkage::average;
  c.num_kernels = 123;
  c.logistic.l2 = 0.5;
  c.seed = 99;
  const auto back = PipelineConfig::from_json(c.to_json());
  CHECK(back.to_json() == c.to_json());
  CHECK(back.linkage == Linkage::average);

  const auto partial = PipelineConfig::from_json({{"clustering", {{"k", 4}}}});
  CHECK(partial.k == 4);
  CHECK(partial.phase == "EI");

  CHECK(error_of([] { PipelineConfig::from_json({{"pca_threshold", 1.5}}); }) == ErrorCode::InvalidArgument);
  CHECK(error_of([] { PipelineConfig::from_json({{"classifier", {{"test_frac", 0.0}}}}); }) ==
        ErrorCode::InvalidArgument);
  CHECK(error_of([] { PipelineConfig::from_json({{"fps", "fast"}}); }) == ErrorCode::MalformedFile);
}

TEST_CASE("stage seeds differ") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 4; ++s)
    for (std::uint64_t stage = 0; stage < 4; ++stage) seen.insert(derive_seed(s, stage));
  CHECK(seen.size() == 16);
}

TEST_CASE("feature table CSV round trip") {
  FeatureTable t;
  t.ids = {"A", "B"};
  t.labels = {Label::Depressed, Label::Healthy};
  t.values.resize(2, 3);
  t.values << 0.1, 1.0 / 3.0, -2e-9, 4, 5, 6;
  const auto csv = to_csv(t);
  CHECK(csv.rfind("participant_id,label,v0,v1,v2\n", 0) == 0);
  const auto back = parse_feature_table(csv);
  CHECK(back.ids == t.ids);
  CHECK(back.labels == t.labels);
  CHECK(back.values == t.values);
  CHECK(to_csv(t, "pc", 1).rfind("participant_id,label,pc1,pc2,pc3\n", 0) == 0);

  CHECK(error_of([] { parse_feature_table("participant_id,label,v0\nA,Healthy\n"); }) == ErrorCode::MalformedFile);
  CHECK(error_of([] { parse_feature_table("participant_id,label,v0\nA,Healthy,x\n"); }) == ErrorCode::MalformedNumber);
  CHECK(error_of([] { parse_feature_table("id,v0\n"); }) == ErrorCode::MissingColumn);
  CHECK(error_of([] { parse_feature_table("participant_id,label,v0\n"); }) == ErrorCode::EmptyData);
}

TEST_CASE("report tables match the golden layouts") {
  CHECK(to_wide_csv(testing::table3_fixture()) == golden("table3.csv"));
  CHECK(render_silhouette_table(testing::table5_fixture()) == golden("table5.csv"));
  CHECK(render_accuracy_table(testing::table6_fixture()) == golden("table6.csv"));
}

TEST_CASE("stage files parse back") {
  const auto t = testing::table3_fixture();
  const auto back = parse_mean_intensity_csv(to_csv(t));
  REQUIRE(back.rows.size() == 3);
  CHECK(back.rows[2].difference == t.rows[2].difference);
  CHECK(to_wide_csv(back) == to_wide_csv(t));

  const auto sil = parse_silhouette_csv(silhouette_csv(testing::table5_fixture()));
  CHECK(sil.size() == 6);
  CHECK(sil[2].score == 0.709);
  const auto acc = parse_accuracy_csv(accuracy_csv(testing::table6_fixture()));
  CHECK(acc[1].method == "ROCKET + Logistic Regression");

  CHECK(error_of([] { parse_accuracy_csv("method\nx\n"); }) == ErrorCode::MissingColumn);
  CHECK(error_of([] { parse_accuracy_csv(""); }) == ErrorCode::EmptyInput);
  CHECK(error_of([] { parse_silhouette_csv("algorithm,signal,silhouette\nGMM,Sadness,high\n"); }) ==
        ErrorCode::MalformedNumber);
}

TEST_CASE("fixed formatting") {
  CHECK(format_fixed(-0.0001, 3) == "0.000");
  CHECK(format_fixed(0.7, 2) == "0.70");
  CHECK(format_fixed(-0.1485, 3) == "-0.148");
  CHECK(format_fixed(std::nan(""), 3) == "NA");
  const std::vector<SilhouetteEntry> partial = {{"K-means", "Happiness", 0.5}};
  CHECK(render_silhouette_table(partial) ==
        "Clustering Algorithm,Score (Happiness)\nK-means,0.500\nAgglomerative,NA\nGMM,NA\n");
}

TEST_CASE("classification stage on a small cohort") {
  CohortSpec spec = CohortSpec::defaults();
  spec.n_depressed = 25;
  spec.n_healthy = 25;
  spec.n_subclinical = 3;
  spec.t_min = 150;
  spec.t_max = 200;
  spec.seed = 8;
  Cohort cohort = trim_cohort(generate_cohort(spec).cohort, "EI");

  PipelineConfig config;
  config.num_kernels = 300;
  config.classify_length = 60;
  config.seed = 3;
  const auto data = classification_data(cohort, config.emotions, config.classify_length, builtin_emotions());
  CHECK(data.ids.size() == 50);  // SubClinical left out when unmerged
  CHECK(data.series[0].size() == 120);

  const auto runs = run_classification(data, config, {ModelKind::logistic, ModelKind::ridge_cv});
  REQUIRE(runs.size() == 2);
  CHECK(runs[0].test_ids.size() == 10);
  CHECK(runs[0].test_ids == runs[1].test_ids);
  const auto again = run_classification(data, config, {ModelKind::logistic, ModelKind::ridge_cv});
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(to_json(runs[i], config).dump() == to_json(again[i], config).dump());
    CHECK(probabilities_csv(runs[i]) == probabilities_csv(again[i]));
  }
  const auto j = to_json(runs[0], config);
  for (const char* key : {"method", "accuracy", "per_class_probabilities", "confusion"}) CHECK(j.contains(key));
  CHECK(j["method"] == "ROCKET + Logistic Regression");
  CHECK(j["per_class_probabilities"]["Depressed"].size() + j["per_class_probabilities"]["Healthy"].size() == 10);
}

TEST_CASE("clustering stage") {
  std::mt19937_64 rng(4);
  const Eigen::MatrixXd x = testing::random_matrix(20, 3, rng);
  PipelineConfig config;
  for (const char* algo : {"kmeans", "agglo", "gmm"}) {
    const auto r = run_clustering(x, algo, config);
    CHECK(r.labels.size() == 20);
    CHECK(run_clustering(x, algo, config).labels == r.labels);
  }
  CHECK(algorithm_name("agglo") == "Agglomerative");
  CHECK(error_of([&] { run_clustering(x, "dbscan", config); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("charts are well-formed and deterministic") {
  GroupCurve curve;
  curve.signal_name = "AU1 & <x>";
  curve.t = {0.0, 0.5, 1.0};
  curve.mean_a = {0.1, 0.2, 0.3};
  curve.sd_a = {0.01, 0.02, 0.01};
  curve.mean_b = {0.3, 0.2, 0.1};
  curve.sd_b = {0.0, 0.0, 0.0};
  curve.n_a = curve.n_b = 2;
  const auto svg = curve_chart_svg(curve);
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(svg.find("AU1 &amp; &lt;x&gt;") != std::string::npos);
  CHECK(svg.find("nan") == std::string::npos);
  CHECK(curve_chart_svg(curve) == svg);

  std::mt19937_64 rng(1);
  const auto model = fit_pca(testing::random_matrix(10, 4, rng));
  CHECK(variance_chart_svg(model, 0.95).find("<polyline") != std::string::npos);
  const std::vector<int> labels = {0, 1, 0, 1, 0, 1, 0, 1, 0, 1};
  CHECK(cluster_scatter_svg(testing::random_matrix(10, 2, rng), labels, "t").find("<circle") != std::string::npos);
  EvalReport report;
  report.per_true_class_probabilities = {{1, 0.9}, {0, 0.2}};
  CHECK(probability_chart_svg(report, "p").find("<circle") != std::string::npos);
}
