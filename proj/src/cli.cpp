#include "aukit/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "aukit/charts.hpp"
#include "aukit/config.hpp"
#include "aukit/decomposition.hpp"
#include "aukit/errors.hpp"
#include "aukit/group_stats.hpp"
#include "aukit/parallel.hpp"
#include "aukit/pipeline.hpp"
#include "aukit/reports.hpp"
#include "aukit/synth.hpp"

namespace fs = std::filesystem;

namespace aukit {

namespace {

struct Flags {
  std::optional<std::string> config_path;
  std::optional<unsigned> threads;

  // shared
  std::optional<std::string> manifest, out, phase, signal;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> length;
  std::vector<std::string> emotions, signals;
  bool no_merge = false;

  // synth
  std::optional<std::string> spec;
  std::optional<int> n_depressed, n_healthy, n_subclinical;

  bool standardize = false;

  // pca
  std::optional<std::string> features;
  std::optional<double> threshold;

  // cluster
  std::optional<std::string> scores, algo, linkage;
  std::optional<int> k;

  // classify
  std::optional<int> num_kernels;
  std::optional<std::string> classifier, split, scale;
  std::optional<double> test_frac;

  // report
  std::vector<std::string> inputs;
  bool partial = false;
};

std::string json_text(const nlohmann::json& j) { return j.dump(2) + "\n"; }

// Applies every flag that was given on top of the loaded configuration.
PipelineConfig resolve_config(const Flags& f) {
  PipelineConfig c = f.config_path ? PipelineConfig::load(*f.config_path) : PipelineConfig{};
  if (f.phase) c.phase = *f.phase;
  if (f.no_merge) c.merge_subclinical = false;
  if (f.seed) c.seed = *f.seed;
  if (!f.emotions.empty()) c.emotions = f.emotions;
  if (!f.signals.empty()) c.signals = f.signals;
  if (f.standardize) c.standardize = true;
  if (f.threshold) c.pca_threshold = *f.threshold;
  if (f.algo) c.algorithm = *f.algo;
  if (f.linkage) c.linkage = parse_linkage(*f.linkage);
  if (f.k) c.k = *f.k;
  if (f.num_kernels) c.num_kernels = *f.num_kernels;
  if (f.classifier) c.classifier = *f.classifier;
  if (f.split) c.split = parse_split_mode(*f.split);
  if (f.scale) c.scale = parse_scale_mode(*f.scale);
  if (f.test_frac) c.test_frac = *f.test_frac;

  if (f.threads) {
    c.threads = *f.threads;
  } else if (const char* env = std::getenv("AUKIT_THREADS"); env && *env) {
    try {
      c.threads = static_cast<unsigned>(std::stoul(env));
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, std::string("AUKIT_THREADS='") + env + "' is not a count");
    }
  }
  c.threads = resolve_threads(c.threads);
  c.validate();
  return c;
}

// "<prefix>_<signal>.csv" -> "<signal>"
std::string signal_from_path(const fs::path& path, std::string_view prefix) {
  std::string stem = path.stem().string();
  if (stem.rfind(prefix, 0) == 0 && stem.size() > prefix.size()) return stem.substr(prefix.size());
  return stem;
}

int cmd_synth(const Flags& f, const PipelineConfig& c, std::ostream& out) {
  CohortSpec spec = f.spec ? CohortSpec::from_json(nlohmann::json::parse(read_file(*f.spec)))
                           : CohortSpec::defaults();
  if (f.seed) spec.seed = *f.seed;
  if (f.n_depressed) spec.n_depressed = *f.n_depressed;
  if (f.n_healthy) spec.n_healthy = *f.n_healthy;
  if (f.n_subclinical) spec.n_subclinical = *f.n_subclinical;
  const auto cohort = generate_cohort(spec, c.threads);
  write_cohort(cohort, *f.out);
  out << "wrote " << cohort.cohort.participants.size() << " participants to " << *f.out << "\n";
  return exit_ok;
}

int cmd_ingest_check(const Flags& f, const PipelineConfig& c, std::ostream& out) {
  LoadOptions options;
  options.schema = c.schema;
  options.fps = c.fps;
  options.threads = c.threads;
  const Cohort cohort = load_cohort(read_manifest(*f.manifest), c.merge_subclinical, options);
  const Cohort trimmed = trim_cohort(cohort, c.phase);
  nlohmann::json participants = nlohmann::json::array();
  for (std::size_t i = 0; i < cohort.participants.size(); ++i) {
    const auto& p = cohort.participants[i];
    participants.push_back({{"participant_id", p.series.participant_id},
                            {"label", std::string(to_string(p.label))},
                            {"frames", p.series.frame_count()},
                            {"phase_frames", trimmed.participants[i].series.frame_count()},
                            {"au_count", p.series.au_ids.size()}});
  }
  nlohmann::json counts = nlohmann::json::object();
  for (const auto& [label, n] : cohort.counts()) counts[std::string(to_string(label))] = n;
  const nlohmann::json summary = {{"participants", participants.size()},
                                  {"counts", counts},
                                  {"merged", cohort.merged},
                                  {"phase", c.phase},
                                  {"details", participants}};
  if (f.out) write_file(*f.out, json_text(summary));
  out << "ok: " << participants.size() << " participants";
  for (const auto& [label, n] : cohort.counts()) out << ", " << to_string(label) << " " << n;
  out << (cohort.merged ? " (SubClinical merged)" : "") << "\n";
  return exit_ok;
}

int cmd_emotions(const Flags& f, PipelineConfig c, std::ostream& out) {
  if (f.length) c.resample_length = *f.length;
  const auto registry = load_registry(c);
  const Cohort cohort = load_pipeline_cohort(*f.manifest, c);
  const fs::path dir = *f.out;
  std::vector<const EmotionDefinition*> defs;
  for (const auto& name : c.emotions) defs.push_back(&find_emotion(registry, name));

  std::string coverage = "participant_id,emotion,coverage\n";
  for (const auto& p : cohort.participants) {
    std::vector<EmotionSeries> series;
    for (const auto* d : defs) series.push_back(emotion_series(p.series, *d));
    std::string csv = "frame";
    for (const auto* d : defs) csv += "," + d->name;
    csv += '\n';
    for (std::size_t t = 0; t < p.series.frame_count(); ++t) {
      csv += std::to_string(t);
      for (const auto& s : series) {
        char buf[64];
        const auto res = std::to_chars(buf, buf + sizeof buf, s.values[t]);
        csv += ',';
        csv.append(buf, res.ptr);
      }
      csv += '\n';
    }
    write_file(dir / "series" / (p.series.participant_id + ".csv"), csv);
    for (const auto& s : series) coverage += s.participant_id + "," + s.emotion + "," + std::to_string(s.coverage) + "\n";
  }
  write_file(dir / "coverage.csv", coverage);
  for (const auto* d : defs)
    write_file(dir / ("features_" + d->name + ".csv"), to_csv(signal_features(cohort, d->name, c.resample_length, registry)));
  out << "wrote " << defs.size() << " emotion feature tables for " << cohort.participants.size()
      << " participants to " << dir.string() << "\n";
  return exit_ok;
}

nlohmann::json test_json(const TestResult& r) {
  nlohmann::json j = {{"method", std::string(to_string(r.method))},
                      {"statistic", r.statistic},
                      {"p_value", r.p_value},
                      {"degenerate", r.degenerate}};
  if (r.method == TestMethod::welch_t) j["df"] = r.df;
  else j["exact"] = r.exact;
  return j;
}

int cmd_stats(const Flags& f, PipelineConfig c, std::ostream& out) {
  if (f.length) c.resample_length = *f.length;
  const auto registry = load_registry(c);
  const Cohort cohort = load_pipeline_cohort(*f.manifest, c);
  const fs::path dir = *f.out;

  const auto raw = mean_intensity_table(cohort, c.signals, false, registry);
  const auto z = mean_intensity_table(cohort, c.signals, true, registry);
  const auto& primary = c.standardize ? z : raw;
  write_file(dir / "mean_intensity.csv", to_csv(primary));
  write_file(dir / "mean_intensity_raw.csv", to_csv(raw));
  write_file(dir / "mean_intensity_standardized.csv", to_csv(z));
  write_file(dir / "table3.csv", to_wide_csv(primary));
  const auto emotion_table = mean_intensity_table(cohort, c.emotions, c.standardize, registry);
  write_file(dir / "emotion_intensity.csv", to_csv(emotion_table));

  std::vector<std::string> curves = c.signals;
  curves.insert(curves.end(), c.emotions.begin(), c.emotions.end());
  for (const auto& s : curves) {
    const auto curve = group_mean_curve(cohort, s, c.resample_length, c.standardize, registry);
    write_file(dir / "curves" / (s + ".csv"), to_csv(curve));
    write_file(dir / "charts" / ("curve_" + s + ".svg"), curve_chart_svg(curve));
  }

  nlohmann::json rows = nlohmann::json::array();
  for (const auto* table : {&primary, &emotion_table})
    for (const auto& r : table->rows)
      rows.push_back({{"signal", r.signal},
                      {"depressed_mean", r.depressed_mean},
                      {"healthy_mean", r.healthy_mean},
                      {"difference", r.difference},
                      {"welch", test_json(r.welch)},
                      {"mann_whitney", test_json(r.mann_whitney)}});
  write_file(dir / "stats.json", json_text({{"standardized", c.standardize}, {"phase", c.phase}, {"rows", rows}}));

  for (const auto& r : primary.rows)
    out << r.signal << ": depressed " << r.depressed_mean << ", healthy " << r.healthy_mean << ", p(welch) "
        << r.welch.p_value << "\n";
  return exit_ok;
}

int cmd_pca(const Flags& f, const PipelineConfig& c, std::ostream& out) {
  const fs::path features_path = *f.features;
  const std::string signal = f.signal ? *f.signal : signal_from_path(features_path, "features_");
  const FeatureTable table = parse_feature_table(read_file(features_path), signal);
  const PCAModel model = fit_pca(table.values);
  if (model.degenerate) throw Error(ErrorCode::EmptyData, "features in '" + features_path.string() + "' have no variance");
  const auto k = components_for_variance(model, c.pca_threshold);

  FeatureTable scores = table;
  scores.values = pca_transform(model, table.values, k);
  const fs::path dir = *f.out;
  write_file(dir / ("variance_" + signal + ".csv"), variance_csv(model));
  write_file(dir / ("scores_" + signal + ".csv"), to_csv(scores, "pc", 1));
  write_file(dir / "charts" / ("variance_" + signal + ".svg"), variance_chart_svg(model, c.pca_threshold));
  double cumulative = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) cumulative += model.explained_variance_ratio(i);
  write_file(dir / ("pca_" + signal + ".json"),
             json_text({{"signal", signal},
                        {"n_samples", table.values.rows()},
                        {"n_features", table.values.cols()},
                        {"threshold", c.pca_threshold},
                        {"components", k},
                        {"cumulative_ratio", cumulative}}));
  out << signal << ": " << k << " components reach " << cumulative << " of the variance\n";
  return exit_ok;
}

int cmd_cluster(const Flags& f, const PipelineConfig& c, std::ostream& out) {
  const fs::path scores_path = *f.scores;
  const std::string signal = f.signal ? *f.signal : signal_from_path(scores_path, "scores_");
  const FeatureTable scores = parse_feature_table(read_file(scores_path), signal);
  std::vector<std::string> algorithms =
      c.algorithm == "all" ? std::vector<std::string>{"kmeans", "agglo", "gmm"} : std::vector<std::string>{c.algorithm};
  const fs::path dir = *f.out;
  for (const auto& algo : algorithms) {
    const ClusterResult result = run_clustering(scores.values, algo, c);
    const std::string tag = algo + "_" + signal;
    write_file(dir / ("labels_" + tag + ".csv"), labels_csv(scores.ids, result.labels));
    write_file(dir / ("silhouette_" + tag + ".csv"),
               silhouette_csv({{algorithm_name(algo), signal, result.silhouette}}));
    nlohmann::json sizes = result.cluster_sizes;
    nlohmann::json j = {{"algorithm", algorithm_name(algo)},
                        {"signal", signal},
                        {"k", result.k},
                        {"cluster_sizes", sizes},
                        {"has_empty_cluster", result.has_empty_cluster},
                        {"silhouette", std::isnan(result.silhouette) ? nlohmann::json(nullptr)
                                                                     : nlohmann::json(result.silhouette)},
                        {"seed", c.seed}};
    if (algo == "kmeans") {
      j["inertia"] = result.inertia;
      j["iterations"] = result.iterations;
      j["converged"] = result.converged;
    } else if (algo == "agglo") {
      j["linkage"] = std::string(to_string(c.linkage));
    } else {
      j["log_likelihood"] = result.log_likelihood_history.empty() ? 0.0 : result.log_likelihood_history.back();
      j["iterations"] = result.log_likelihood_history.size();
    }
    write_file(dir / ("cluster_" + tag + ".json"), json_text(j));
    write_file(dir / "charts" / ("clusters_" + tag + ".svg"),
               cluster_scatter_svg(scores.values, result.labels, algorithm_name(algo) + " on " + signal));
    out << algorithm_name(algo) << " (" << signal << "): silhouette " << result.silhouette << "\n";
  }
  return exit_ok;
}

int cmd_classify(const Flags& f, PipelineConfig c, std::ostream& out) {
  if (f.length) c.classify_length = *f.length;
  c.validate();
  const auto registry = load_registry(c);
  const Cohort cohort = load_pipeline_cohort(*f.manifest, c);
  const auto data = classification_data(cohort, c.emotions, c.classify_length, registry);
  std::vector<ModelKind> kinds;
  if (c.classifier != "ridge") kinds.push_back(ModelKind::logistic);
  if (c.classifier != "logistic") kinds.push_back(ModelKind::ridge_cv);
  const auto runs = run_classification(data, c, kinds);

  const fs::path dir = *f.out;
  std::vector<AccuracyEntry> accuracies;
  for (const auto& run : runs) {
    const std::string tag(run.kind == ModelKind::ridge_cv ? "ridge" : "logistic");
    write_file(dir / ("classification_" + tag + ".json"), json_text(to_json(run, c)));
    write_file(dir / ("probabilities_" + tag + ".csv"), probabilities_csv(run));
    write_file(dir / "charts" / ("probabilities_" + tag + ".svg"),
               probability_chart_svg(run.report, method_name(run.kind)));
    accuracies.push_back({method_name(run.kind), run.report.accuracy});
    out << method_name(run.kind) << ": accuracy " << run.report.accuracy << " on " << run.test_ids.size()
        << " test participants\n";
  }
  write_file(dir / "accuracy.csv", accuracy_csv(accuracies));
  return exit_ok;
}

int cmd_report(const Flags& f, std::ostream& out) {
  std::optional<fs::path> means, accuracy;
  std::vector<fs::path> silhouettes;
  for (const auto& in : f.inputs) {
    const fs::path dir = in;
    if (!fs::is_directory(dir)) throw Error(ErrorCode::FileError, "input directory '" + in + "' does not exist");
    if (fs::exists(dir / "mean_intensity.csv")) means = dir / "mean_intensity.csv";
    if (fs::exists(dir / "accuracy.csv")) accuracy = dir / "accuracy.csv";
    std::vector<fs::path> found;
    for (const auto& entry : fs::directory_iterator(dir)) {
      const auto name = entry.path().filename().string();
      if (name.rfind("silhouette_", 0) == 0 && entry.path().extension() == ".csv") found.push_back(entry.path());
    }
    std::sort(found.begin(), found.end());
    silhouettes.insert(silhouettes.end(), found.begin(), found.end());
  }

  std::vector<std::string> missing;
  if (!means) missing.push_back("mean_intensity.csv (from stats)");
  if (silhouettes.empty()) missing.push_back("silhouette_*.csv (from cluster)");
  if (!accuracy) missing.push_back("accuracy.csv (from classify)");
  if (!f.partial && !missing.empty()) {
    std::string msg = "missing stage outputs:";
    for (const auto& m : missing) msg += " " + m + ";";
    msg.pop_back();
    throw Error(ErrorCode::FileError, msg);
  }
  if (missing.size() == 3) throw Error(ErrorCode::FileError, "no stage outputs found in the input directories");

  const fs::path dir = *f.out;
  nlohmann::json summary = nlohmann::json::object();
  if (means) {
    const auto table = parse_mean_intensity_csv(read_file(*means));
    write_file(dir / "table3.csv", to_wide_csv(table));
    summary["mean_intensity"] = means->generic_string();
  }
  if (!silhouettes.empty()) {
    std::vector<SilhouetteEntry> entries;
    nlohmann::json sources = nlohmann::json::array();
    for (const auto& p : silhouettes) {
      const auto rows = parse_silhouette_csv(read_file(p));
      entries.insert(entries.end(), rows.begin(), rows.end());
      sources.push_back(p.generic_string());
    }
    write_file(dir / "table5.csv", render_silhouette_table(entries));
    summary["silhouette"] = sources;
  }
  if (accuracy) {
    write_file(dir / "table6.csv", render_accuracy_table(parse_accuracy_csv(read_file(*accuracy))));
    summary["accuracy"] = accuracy->generic_string();
  }
  summary["missing"] = missing;
  write_file(dir / "report.json", json_text(summary));
  out << "report written to " << dir.string() << "\n";
  return exit_ok;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Action-unit intensity analysis toolkit", "aukit"};
  app.require_subcommand(1, 1);
  Flags f;
  app.add_option("--config", f.config_path, "JSON pipeline configuration");
  app.add_option("--threads", f.threads, "worker threads (0: all logical processors)");

  auto* synth = app.add_subcommand("synth", "generate a synthetic cohort");
  synth->add_option("--out", f.out, "output directory")->required();
  synth->add_option("--seed", f.seed, "random seed");
  synth->add_option("--spec", f.spec, "JSON cohort specification");
  synth->add_option("--n-depressed", f.n_depressed);
  synth->add_option("--n-healthy", f.n_healthy);
  synth->add_option("--n-subclinical", f.n_subclinical);

  auto* check = app.add_subcommand("ingest-check", "validate a manifest and its files");
  check->add_option("--manifest", f.manifest)->required();
  check->add_option("--phase", f.phase);
  check->add_flag("--no-merge", f.no_merge, "keep SubClinical participants separate");
  check->add_option("--out", f.out, "JSON summary file");

  auto* emotions = app.add_subcommand("emotions", "per-frame emotion series and resampled features");
  emotions->add_option("--manifest", f.manifest)->required();
  emotions->add_option("--phase", f.phase);
  emotions->add_option("--emotions", f.emotions)->delimiter(',');
  emotions->add_option("--length", f.length, "resampled points per participant");
  emotions->add_flag("--no-merge", f.no_merge);
  emotions->add_option("--out", f.out)->required();

  auto* stats = app.add_subcommand("stats", "group curves, mean-intensity table and tests");
  stats->add_option("--manifest", f.manifest)->required();
  stats->add_option("--phase", f.phase);
  stats->add_option("--signals", f.signals)->delimiter(',');
  stats->add_option("--emotions", f.emotions)->delimiter(',');
  stats->add_flag("--standardize", f.standardize);
  stats->add_option("--length", f.length, "resampled points per curve");
  stats->add_flag("--no-merge", f.no_merge);
  stats->add_option("--out", f.out)->required();

  auto* pca = app.add_subcommand("pca", "principal components of a feature table");
  pca->add_option("--features", f.features)->required();
  pca->add_option("--threshold", f.threshold);
  pca->add_option("--signal", f.signal, "name used in output files");
  pca->add_option("--out", f.out)->required();

  auto* cluster = app.add_subcommand("cluster", "cluster PCA scores");
  cluster->add_option("--scores", f.scores)->required();
  cluster->add_option("--algo", f.algo)->check(CLI::IsMember({"kmeans", "agglo", "gmm", "all"}));
  cluster->add_option("--k", f.k);
  cluster->add_option("--seed", f.seed);
  cluster->add_option("--linkage", f.linkage)->check(CLI::IsMember({"ward", "average", "complete"}));
  cluster->add_option("--signal", f.signal);
  cluster->add_option("--out", f.out)->required();

  auto* classify = app.add_subcommand("classify", "random-kernel features and linear classifiers");
  classify->add_option("--manifest", f.manifest)->required();
  classify->add_option("--phase", f.phase);
  classify->add_option("--emotions", f.emotions)->delimiter(',');
  classify->add_option("--num-kernels", f.num_kernels);
  classify->add_option("--classifier", f.classifier)->check(CLI::IsMember({"logistic", "ridge", "all"}));
  classify->add_option("--test-frac", f.test_frac);
  classify->add_option("--split", f.split)->check(CLI::IsMember({"stratified", "random"}));
  classify->add_option("--scale", f.scale)->check(CLI::IsMember({"none", "minmax", "zscore"}));
  classify->add_option("--length", f.length, "resampled points per channel");
  classify->add_option("--seed", f.seed);
  classify->add_flag("--no-merge", f.no_merge);
  classify->add_option("--out", f.out)->required();

  auto* report = app.add_subcommand("report", "assemble summary tables from stage outputs");
  report->add_option("--in", f.inputs, "stage output directories")->required();
  report->add_flag("--partial", f.partial, "allow missing stage outputs");
  report->add_option("--out", f.out)->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return exit_usage_error;
  }

  try {
    const PipelineConfig config = resolve_config(f);
    if (synth->parsed()) return cmd_synth(f, config, out);
    if (check->parsed()) return cmd_ingest_check(f, config, out);
    if (emotions->parsed()) return cmd_emotions(f, config, out);
    if (stats->parsed()) return cmd_stats(f, config, out);
    if (pca->parsed()) return cmd_pca(f, config, out);
    if (cluster->parsed()) return cmd_cluster(f, config, out);
    if (classify->parsed()) return cmd_classify(f, config, out);
    if (report->parsed()) return cmd_report(f, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_data_error;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_data_error;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return exit_data_error;
  }
  err << app.help();
  return exit_usage_error;
}

}  // namespace aukit
