// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit when
// any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "aukit/cli.hpp"
#include "aukit/clustering.hpp"
#include "aukit/decomposition.hpp"
#include "aukit/emotion_map.hpp"
#include "aukit/group_stats.hpp"
#include "aukit/pipeline.hpp"
#include "aukit/reports.hpp"
#include "aukit/synth.hpp"
#include "golden_fixtures.hpp"
#include "oracles/oracles.hpp"

namespace fs = std::filesystem;
using namespace aukit;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
};

std::string fmt(const char* pattern, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, pattern, a);
  return buf;
}

Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

oracle::Matrix rows_of(const Eigen::MatrixXd& m) {
  oracle::Matrix out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[static_cast<std::size_t>(i)].push_back(m(i, j));
  return out;
}

int run_quiet(const std::vector<std::string>& args, std::string* err = nullptr) {
  std::ostringstream out, e;
  const int status = run_cli(args, out, e);
  if (err) *err = e.str();
  return status;
}

// Scratch directory for the suite, removed at exit.
struct Scratch {
  fs::path root;
  Scratch() {
    root = fs::temp_directory_path() / ("aukit_acceptance_" + std::to_string(std::random_device{}()));
    fs::remove_all(root);
    fs::create_directories(root);
  }
  ~Scratch() {
    std::error_code ec;
    fs::remove_all(root, ec);
  }
};

Outcome silhouette_oracle() {
  Outcome o;
  std::mt19937_64 rng(101);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng() % 7);
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng() % 3);
    const Eigen::MatrixXd x = gaussian(n, d, rng);
    std::vector<int> labels(static_cast<std::size_t>(n));
    do {
      for (auto& l : labels) l = static_cast<int>(rng() % static_cast<std::uint64_t>(std::min<Eigen::Index>(n, 4)));
    } while (std::set<int>(labels.begin(), labels.end()).size() < 2);
    worst = std::max(worst, std::abs(silhouette(x, labels).overall - oracle::silhouette(rows_of(x), labels)));
  }
  Eigen::MatrixXd example(4, 1);
  example << 0, 1, 10, 11;
  const double worked = silhouette(example, std::vector<int>{0, 0, 1, 1}).overall;
  o.ok = worst <= 1e-9 && std::abs(worked - 0.899749) <= 1e-6;
  o.detail = "max |lib - oracle| " + fmt("%.2e", worst) + " over 200 datasets; worked example " + fmt("%.6f", worked);
  return o;
}

Outcome pca_correctness() {
  Outcome o;
  std::mt19937_64 rng(202);
  double ortho = 0.0, recon = 0.0, ratio = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng() % 199);
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng() % 50);
    const Eigen::MatrixXd x = gaussian(n, d, rng) * (1.0 + static_cast<double>(rng() % 5));
    const auto m = fit_pca(x);
    const auto k = m.component_count();
    ortho = std::max(ortho, (m.components * m.components.transpose() - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff());
    recon = std::max(recon, (pca_inverse_transform(m, pca_transform(m, x, k)) - x).cwiseAbs().maxCoeff());
    ratio = std::max(ratio, std::abs(m.explained_variance_ratio.sum() - 1.0));
  }
  const Eigen::MatrixXd small = gaussian(5, 3, rng);
  const auto m = fit_pca(small);
  const auto eig = oracle::jacobi_eigen(oracle::covariance(rows_of(small)));
  double oracle_err = 0.0;
  for (Eigen::Index c = 0; c < 3; ++c) {
    oracle_err = std::max(oracle_err, std::abs(m.explained_variance(c) - eig.values[static_cast<std::size_t>(c)]));
    double dot = 0.0;
    for (Eigen::Index j = 0; j < 3; ++j) dot += m.components(c, j) * eig.vectors[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)];
    const double sign = dot < 0 ? -1.0 : 1.0;
    for (Eigen::Index j = 0; j < 3; ++j)
      oracle_err = std::max(oracle_err, std::abs(m.components(c, j) - sign * eig.vectors[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)]));
  }
  o.ok = ortho <= 1e-8 && recon < 1e-8 && ratio <= 1e-9 && oracle_err <= 1e-8;
  o.detail = "orthonormality " + fmt("%.1e", ortho) + ", reconstruction " + fmt("%.1e", recon) + ", ratio sum " +
             fmt("%.1e", ratio) + ", 5x3 oracle " + fmt("%.1e", oracle_err);
  return o;
}

Outcome clustering_soundness() {
  Outcome o;
  std::mt19937_64 rng(303);
  int kmeans_bad = 0, gmm_bad = 0, agglo_bad = 0, blobs_bad = 0;
  double worst_drop = 0.0;
  for (int run = 0; run < 50; ++run) {
    const Eigen::MatrixXd x = gaussian(30 + run, 2 + run % 3, rng);
    const int k = 2 + run % 4;
    const auto r = kmeans_fit(x, k, static_cast<std::uint64_t>(run));
    for (std::size_t i = 1; i < r.inertia_history.size(); ++i)
      if (r.inertia_history[i] > r.inertia_history[i - 1]) {
        ++kmeans_bad;
        break;
      }
    Eigen::MatrixXd y = gaussian(60, 2, rng);
    y.topRows(30).array() += 2.0 + 0.05 * run;
    const auto g = gmm_fit(y, 2 + run % 3, static_cast<std::uint64_t>(run));
    bool bad = false;
    for (std::size_t i = 1; i < g.log_likelihood_history.size(); ++i) {
      const double drop = g.log_likelihood_history[i - 1] - g.log_likelihood_history[i];
      worst_drop = std::max(worst_drop, drop);
      bad |= drop > 1e-8;
    }
    gmm_bad += bad;
  }
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index n = 2 + trial % 6;
    const Eigen::MatrixXd x = gaussian(n, 1 + trial % 3, rng);
    for (int k = 1; k <= n; ++k)
      if (oracle::canonical_partition(agglomerative_fit(x, k, Linkage::average).labels) !=
          oracle::average_linkage(rows_of(x), k)) {
        ++agglo_bad;
        break;
      }
  }
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 blob_rng(seed);
    Eigen::MatrixXd x = gaussian(60, 2, blob_rng);
    std::vector<int> truth(60, 0);
    for (Eigen::Index i = 30; i < 60; ++i) {
      x(i, 0) += 10.0;
      truth[static_cast<std::size_t>(i)] = 1;
    }
    blobs_bad += adjusted_rand_index(kmeans_fit(x, 2, seed).labels, truth) != 1.0;
  }
  o.ok = kmeans_bad == 0 && gmm_bad == 0 && agglo_bad == 0 && blobs_bad == 0;
  o.detail = "k-means increases " + std::to_string(kmeans_bad) + "/50, GMM decreases " + std::to_string(gmm_bad) +
             "/50 (largest drop " + fmt("%.1e", worst_drop) + "), average-linkage mismatches " +
             std::to_string(agglo_bad) + "/50, blob ARI < 1 in " + std::to_string(blobs_bad) + "/20";
  return o;
}

Outcome statistical_tests() {
  Outcome o;
  std::mt19937_64 rng(404);
  std::normal_distribution<double> n(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> a(10), b(10);
    const double shift = 0.1 * trial;
    for (auto& v : a) v = n(rng) + shift;
    for (auto& v : b) v = n(rng);
    const double p = two_sample_test(a, b, TestMethod::welch_t).p_value;
    worst = std::max(worst, std::abs(p - oracle::welch_permutation_p(a, b, 100000, 5000 + trial)));
  }
  const auto mwu = two_sample_test(std::vector<double>{1, 2, 3}, std::vector<double>{4, 5, 6}, TestMethod::mann_whitney_u);
  o.ok = worst <= 0.02 && mwu.p_value == 0.1;
  o.detail = "max |Welch p - permutation p| " + fmt("%.4f", worst) + " over 20 samples; MWU {1,2,3} vs {4,5,6} p = " +
             fmt("%.17g", mwu.p_value);
  return o;
}

Outcome effect_recovery() {
  Outcome o;
  int good = 0;
  double worst_p = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    CohortSpec spec = CohortSpec::defaults();
    spec.seed = seed;
    const Cohort cohort = trim_cohort(generate_cohort(spec).cohort, "EI");
    const auto table = mean_intensity_table(cohort, {"AU1", "AU6", "AU15"}, false);
    const bool signs = table.rows[0].difference > 0 && table.rows[1].difference < 0 && table.rows[2].difference > 0;
    bool significant = true;
    for (const auto& r : table.rows) {
      significant &= r.welch.p_value < 0.01;
      worst_p = std::max(worst_p, r.welch.p_value);
    }
    good += signs && significant;
  }
  o.ok = good >= 19;
  o.detail = std::to_string(good) + "/20 seeds with (+, -, +) and Welch p < 0.01; largest p " + fmt("%.2e", worst_p);
  return o;
}

// Criterion 6 runs the separable case through the command line so that
// criterion 7 can repeat it and compare the files.
struct ClassifyRun {
  fs::path dir;
  double logistic = NAN, ridge = NAN;
  std::string error;
};

ClassifyRun classify_via_cli(const fs::path& root, const std::string& tag) {
  ClassifyRun r;
  const fs::path cohort = root / "cohort";
  if (!fs::exists(cohort / "manifest.json") &&
      run_quiet({"synth", "--out", cohort.string(), "--seed", "2024"}, &r.error) != 0)
    return r;
  r.dir = root / tag;
  if (run_quiet({"classify", "--manifest", (cohort / "manifest.json").string(), "--classifier", "all", "--seed", "7",
                 "--num-kernels", "10000", "--out", r.dir.string()},
                &r.error) != 0)
    return r;
  r.logistic = nlohmann::json::parse(read_file(r.dir / "classification_logistic.json"))["accuracy"].get<double>();
  r.ridge = nlohmann::json::parse(read_file(r.dir / "classification_ridge.json"))["accuracy"].get<double>();
  return r;
}

Outcome classification(const fs::path& root, ClassifyRun& first) {
  Outcome o;
  first = classify_via_cli(root, "classify_a");
  if (!first.error.empty()) return {false, "classify failed: " + first.error};

  PipelineConfig config;  // 10 000 kernels, stratified 0.2 split
  std::vector<double> null_acc;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    CohortSpec spec = CohortSpec::defaults();
    spec.au_offsets.clear();
    spec.seed = 9000 + seed;
    const Cohort cohort = trim_cohort(generate_cohort(spec).cohort, config.phase);
    config.seed = seed;
    const auto data = classification_data(cohort, config.emotions, config.classify_length, builtin_emotions());
    null_acc.push_back(run_classification(data, config, {ModelKind::logistic})[0].report.accuracy);
  }
  const auto [lo, hi] = std::minmax_element(null_acc.begin(), null_acc.end());
  const int inside = static_cast<int>(std::count_if(null_acc.begin(), null_acc.end(),
                                                    [](double a) { return a >= 0.30 && a <= 0.70; }));
  o.ok = first.logistic >= 0.90 && inside == 20 && std::abs(first.ridge - first.logistic) <= 0.05;
  o.detail = "logistic " + fmt("%.3f", first.logistic) + ", ridge " + fmt("%.3f", first.ridge) +
             "; null accuracies in [0.30, 0.70] for " + std::to_string(inside) + "/20 seeds (range " +
             fmt("%.3f", *lo) + " to " + fmt("%.3f", *hi) + ")";
  return o;
}

Outcome determinism(const fs::path& root, const ClassifyRun& first) {
  if (first.dir.empty() || !first.error.empty()) return {false, "criterion 6 run did not complete"};
  const auto second = classify_via_cli(root, "classify_b");
  if (!second.error.empty()) return {false, "repeat run failed: " + second.error};
  int files = 0, differing = 0;
  for (const auto& entry : fs::recursive_directory_iterator(first.dir)) {
    if (!entry.is_regular_file()) continue;
    ++files;
    const auto rel = fs::relative(entry.path(), first.dir);
    if (!fs::exists(second.dir / rel) || read_file(entry.path()) != read_file(second.dir / rel)) ++differing;
  }
  return {files > 0 && differing == 0,
          std::to_string(files) + " report files compared, " + std::to_string(differing) + " differ"};
}

std::vector<std::string> first_column(const std::string& csv) {
  std::vector<std::string> out;
  std::istringstream in(csv);
  for (std::string line; std::getline(in, line);) out.push_back(line.substr(0, line.find(',')));
  return out;
}

std::string header(const std::string& csv) { return csv.substr(0, csv.find('\n')); }

Outcome format_fixtures(const fs::path& root) {
  const fs::path golden_dir = AUKIT_GOLDEN_DIR;
  const auto g3 = read_file(golden_dir / "table3.csv");
  const auto g5 = read_file(golden_dir / "table5.csv");
  const auto g6 = read_file(golden_dir / "table6.csv");
  bool fixtures = to_wide_csv(testing::table3_fixture()) == g3 &&
                  render_silhouette_table(testing::table5_fixture()) == g5 &&
                  render_accuracy_table(testing::table6_fixture()) == g6;

  // Layout of tables produced by a real (small) run of every stage.
  const fs::path dir = root / "format";
  write_file(dir / "spec.json", R"({"n_depressed": 20, "n_healthy": 20, "T_range": [150, 210], "seed": 3})");
  std::string err;
  const auto m = (dir / "cohort" / "manifest.json").string();
  bool ran = run_quiet({"synth", "--out", (dir / "cohort").string(), "--spec", (dir / "spec.json").string()}, &err) == 0 &&
             run_quiet({"stats", "--manifest", m, "--out", (dir / "stats").string()}, &err) == 0 &&
             run_quiet({"emotions", "--manifest", m, "--length", "100", "--out", (dir / "emo").string()}, &err) == 0;
  for (const char* e : {"Happiness", "Sadness"}) {
    ran = ran &&
          run_quiet({"pca", "--features", (dir / "emo" / (std::string("features_") + e + ".csv")).string(), "--out",
                     (dir / "pca").string()},
                    &err) == 0 &&
          run_quiet({"cluster", "--scores", (dir / "pca" / (std::string("scores_") + e + ".csv")).string(), "--algo",
                     "all", "--out", (dir / "clu").string()},
                    &err) == 0;
  }
  ran = ran &&
        run_quiet({"classify", "--manifest", m, "--classifier", "all", "--num-kernels", "200", "--length", "60",
                   "--out", (dir / "cls").string()},
                  &err) == 0 &&
        run_quiet({"report", "--in", (dir / "stats").string(), "--in", (dir / "clu").string(), "--in",
                   (dir / "cls").string(), "--out", (dir / "report").string()},
                  &err) == 0;
  if (!ran) return {false, "pipeline run failed: " + err};
  bool layout = true;
  for (const auto& [name, gold] : {std::pair{"table3.csv", g3}, std::pair{"table5.csv", g5}, std::pair{"table6.csv", g6}}) {
    const auto produced = read_file(dir / "report" / name);
    layout &= header(produced) == header(gold) && first_column(produced) == first_column(gold);
  }
  return {fixtures && layout, std::string("fixture renders ") + (fixtures ? "match" : "differ from") +
                                  " golden files; pipeline report layouts " + (layout ? "match" : "differ")};
}

Outcome emotion_mapping() {
  const auto& reg = builtin_emotions();
  const std::vector<std::string> openface = {"AU01", "AU02", "AU04", "AU05", "AU06", "AU07", "AU09", "AU10", "AU12",
                                             "AU14", "AU15", "AU17", "AU20", "AU23", "AU25", "AU26", "AU45"};
  AUFrameSeries s;
  s.au_ids = openface;
  s.values = Eigen::MatrixXd::Constant(5, static_cast<Eigen::Index>(openface.size()), 0.2);
  bool computable = reg.size() == 6;
  for (const auto& def : reg) {
    const auto e = emotion_series(s, def);
    computable &= e.values.size() == 5 && std::isfinite(e.values[0]) && e.coverage > 0.0;
  }

  std::mt19937_64 rng(909);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int additivity = 0, monotone = 0;
  std::vector<std::string> all_aus = openface;
  all_aus.insert(all_aus.end(), {"AU16", "AU28"});
  for (int trial = 0; trial < 1000; ++trial) {
    std::map<std::string, double> a, b, sum;
    for (const auto& au : all_aus) {
      a[au] = u(rng);
      b[au] = u(rng);
      sum[au] = a[au] + b[au];
    }
    for (const auto& def : reg) {
      const double fa = emotion_frame_intensity(a, def);
      if (std::abs(emotion_frame_intensity(sum, def) - fa - emotion_frame_intensity(b, def)) > 1e-12) ++additivity;
      auto up = a;
      up[def.components[rng() % def.components.size()]] += u(rng);
      if (emotion_frame_intensity(up, def) < fa) ++monotone;
    }
  }
  AUFrameSeries frames;
  frames.au_ids = openface;
  frames.values.resize(1000, static_cast<Eigen::Index>(openface.size()));
  for (Eigen::Index i = 0; i < frames.values.size(); ++i) frames.values.data()[i] = u(rng);
  int permutation = 0;
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<std::size_t> perm(openface.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    AUFrameSeries shuffled = frames;
    for (std::size_t c = 0; c < perm.size(); ++c) {
      shuffled.au_ids[c] = frames.au_ids[perm[c]];
      shuffled.values.col(static_cast<Eigen::Index>(c)) = frames.values.col(static_cast<Eigen::Index>(perm[c]));
    }
    for (const auto& def : reg) permutation += emotion_series(shuffled, def).values != emotion_series(frames, def).values;
  }
  return {computable && additivity == 0 && monotone == 0 && permutation == 0,
          std::string("definitions ") + (computable ? "computable" : "NOT computable") + "; additivity violations " +
              std::to_string(additivity) + ", monotonicity violations " + std::to_string(monotone) +
              ", permutation violations " + std::to_string(permutation) + " on 1000 random frames"};
}

}  // namespace

int main() {
  Scratch scratch;
  ClassifyRun classify_run;
  struct Criterion {
    int id;
    const char* name;
    double limit_s;
    std::function<Outcome()> check;
  };
  const std::vector<Criterion> criteria = {
      {1, "silhouette oracle equivalence", 5, silhouette_oracle},
      {2, "PCA correctness", 10, pca_correctness},
      {3, "clustering soundness", 30, clustering_soundness},
      {4, "statistical tests", 60, statistical_tests},
      {5, "pipeline effect recovery", 60, effect_recovery},
      {6, "classification power and null", 300, [&] { return classification(scratch.root, classify_run); }},
      {7, "determinism", 300, [&] { return determinism(scratch.root, classify_run); }},
      {8, "format fixtures", 5, [&] { return format_fixtures(scratch.root); }},
      {9, "emotion mapping", 5, emotion_mapping},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.limit_s;
    const bool pass = o.ok && in_time;
    failures += !pass;
    std::printf("%s %d %s: %s; %.2f s (limit %.0f s%s)\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                secs, c.limit_s, in_time ? "" : ", exceeded");
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
