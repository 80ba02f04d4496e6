#include "aukit/pipeline.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "aukit/errors.hpp"
#include "aukit/group_stats.hpp"

namespace aukit {

namespace {

std::string shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::vector<std::string_view> split_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

}  // namespace

std::vector<EmotionDefinition> load_registry(const PipelineConfig& config) {
  if (config.emotion_definitions.empty()) return builtin_emotions();
  return parse_emotion_definitions(read_file(config.emotion_definitions));
}

Cohort load_pipeline_cohort(const std::filesystem::path& manifest, const PipelineConfig& config) {
  LoadOptions options;
  options.schema = config.schema;
  options.fps = config.fps;
  options.threads = config.threads;
  return trim_cohort(load_cohort(read_manifest(manifest), config.merge_subclinical, options), config.phase);
}

std::string to_csv(const FeatureTable& table, std::string_view column_prefix, int first_index) {
  std::string out = "participant_id,label";
  for (Eigen::Index c = 0; c < table.values.cols(); ++c) {
    out += ',';
    out += column_prefix;
    out += std::to_string(c + first_index);
  }
  out += '\n';
  for (std::size_t i = 0; i < table.ids.size(); ++i) {
    out += table.ids[i];
    out += ',';
    out += to_string(table.labels[i]);
    for (Eigen::Index c = 0; c < table.values.cols(); ++c) {
      out += ',';
      out += shortest(table.values(static_cast<Eigen::Index>(i), c));
    }
    out += '\n';
  }
  return out;
}

FeatureTable parse_feature_table(std::string_view csv, std::string signal) {
  FeatureTable table;
  table.signal = std::move(signal);
  std::vector<std::vector<double>> rows;
  std::size_t width = 0;
  std::size_t line_no = 0;
  bool header = true;
  while (!csv.empty()) {
    auto nl = csv.find('\n');
    std::string_view line = csv.substr(0, nl);
    csv = nl == std::string_view::npos ? std::string_view{} : csv.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const auto fields = split_line(line);
    if (header) {
      if (fields.size() < 3 || fields[0] != "participant_id" || fields[1] != "label")
        throw Error(ErrorCode::MissingColumn, "feature table needs participant_id,label and at least one value column");
      width = fields.size() - 2;
      header = false;
      continue;
    }
    if (fields.size() != width + 2)
      throw Error(ErrorCode::MalformedFile, "feature table line " + std::to_string(line_no) + " has " +
                                                std::to_string(fields.size()) + " fields, expected " +
                                                std::to_string(width + 2));
    table.ids.emplace_back(fields[0]);
    table.labels.push_back(parse_label(fields[1]));
    std::vector<double> row(width);
    for (std::size_t c = 0; c < width; ++c) {
      const auto f = fields[c + 2];
      const auto res = std::from_chars(f.data(), f.data() + f.size(), row[c]);
      if (res.ec != std::errc{} || res.ptr != f.data() + f.size() || !std::isfinite(row[c]))
        throw Error(ErrorCode::MalformedNumber, "feature table line " + std::to_string(line_no) + " column " +
                                                    std::to_string(c + 3) + ": '" + std::string(f) + "'");
    }
    rows.push_back(std::move(row));
  }
  if (header) throw Error(ErrorCode::EmptyInput, "feature table is empty");
  if (rows.empty()) throw Error(ErrorCode::EmptyData, "feature table has no rows");
  table.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < width; ++c)
      table.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  return table;
}

FeatureTable signal_features(const Cohort& cohort, std::string_view signal, std::size_t length,
                             const std::vector<EmotionDefinition>& registry) {
  FeatureTable table;
  table.signal = std::string(signal);
  table.values.resize(static_cast<Eigen::Index>(cohort.participants.size()), static_cast<Eigen::Index>(length));
  for (std::size_t i = 0; i < cohort.participants.size(); ++i) {
    const auto& p = cohort.participants[i];
    const auto curve = resample_series(extract_signal(p.series, signal, registry), length);
    table.ids.push_back(p.series.participant_id);
    table.labels.push_back(p.label);
    for (std::size_t t = 0; t < length; ++t)
      table.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) = curve[t];
  }
  return table;
}

ClassificationData classification_data(const Cohort& cohort, const std::vector<std::string>& signals,
                                       std::size_t length, const std::vector<EmotionDefinition>& registry) {
  if (signals.empty()) throw Error(ErrorCode::InvalidArgument, "no classification channels given");
  ClassificationData data;
  data.channel_length = length;
  data.channels = signals.size();
  for (const auto& p : cohort.participants) {
    if (p.label == Label::SubClinical) continue;
    std::vector<double> joined;
    joined.reserve(length * signals.size());
    for (const auto& s : signals) {
      const auto curve = resample_series(extract_signal(p.series, s, registry), length);
      joined.insert(joined.end(), curve.begin(), curve.end());
    }
    data.ids.push_back(p.series.participant_id);
    data.labels.push_back(p.label == Label::Depressed ? 1 : 0);
    data.series.push_back(std::move(joined));
  }
  if (data.ids.empty()) throw Error(ErrorCode::EmptyData, "no Depressed or Healthy participants to classify");
  return data;
}

std::vector<ClassificationRun> run_classification(const ClassificationData& data, const PipelineConfig& config,
                                                  const std::vector<ModelKind>& kinds) {
  const Split split = stratified_split(data.labels, config.test_frac, derive_seed(config.seed, 1), config.split);
  const RocketTransform transform =
      rocket_init(config.num_kernels, static_cast<int>(data.channel_length), derive_seed(config.seed, 2),
                  static_cast<int>(data.channels));
  const Eigen::MatrixXd features = rocket_apply(transform, data.series, config.threads);

  Eigen::MatrixXd train_x(static_cast<Eigen::Index>(split.train.size()), features.cols());
  Eigen::MatrixXd test_x(static_cast<Eigen::Index>(split.test.size()), features.cols());
  std::vector<int> train_y, test_y;
  std::vector<std::string> test_ids;
  for (std::size_t r = 0; r < split.train.size(); ++r) {
    train_x.row(static_cast<Eigen::Index>(r)) = features.row(static_cast<Eigen::Index>(split.train[r]));
    train_y.push_back(data.labels[split.train[r]]);
  }
  for (std::size_t r = 0; r < split.test.size(); ++r) {
    test_x.row(static_cast<Eigen::Index>(r)) = features.row(static_cast<Eigen::Index>(split.test[r]));
    test_y.push_back(data.labels[split.test[r]]);
    test_ids.push_back(data.ids[split.test[r]]);
  }

  TrainOptions train_options;
  train_options.scale = config.scale;
  std::vector<ClassificationRun> runs;
  for (const auto kind : kinds) {
    ClassificationRun run;
    run.kind = kind;
    run.split = split;
    run.test_ids = test_ids;
    run.model = kind == ModelKind::ridge_cv ? ridge_cv_train(train_x, train_y, config.alphas, train_options)
                                            : logistic_train(train_x, train_y, config.logistic, train_options);
    run.report = evaluate_features(run.model, test_x, test_y);
    runs.push_back(std::move(run));
  }
  return runs;
}

std::string method_name(ModelKind kind) {
  return kind == ModelKind::ridge_cv ? "ROCKET + RidgeClassifierCV" : "ROCKET + Logistic Regression";
}

nlohmann::json to_json(const ClassificationRun& run, const PipelineConfig& config) {
  const auto& r = run.report;
  nlohmann::json depressed = nlohmann::json::array(), healthy = nlohmann::json::array();
  for (const auto& [label, p] : r.per_true_class_probabilities) (label == 1 ? depressed : healthy).push_back(p);
  nlohmann::json j = {
      {"method", method_name(run.kind)},
      {"model", std::string(to_string(run.kind))},
      {"accuracy", r.accuracy},
      {"confusion",
       {{"labels", {"Healthy", "Depressed"}},
        {"matrix", {{r.confusion[0][0], r.confusion[0][1]}, {r.confusion[1][0], r.confusion[1][1]}}}}},
      {"probabilities_calibrated", r.calibrated},
      {"per_class_probabilities", {{"Depressed", depressed}, {"Healthy", healthy}}},
      {"test_participants", run.test_ids},
      {"n_train", run.split.train.size()},
      {"n_test", run.split.test.size()},
      {"num_kernels", config.num_kernels},
      {"channel_length", config.classify_length},
      {"channels", config.emotions},
      {"seed", config.seed}};
  if (run.kind == ModelKind::ridge_cv) {
    j["alpha"] = run.model.chosen_alpha;
    j["alphas"] = config.alphas;
    j["alpha_loo_mse"] = run.model.alpha_scores;
  } else {
    j["epochs_run"] = run.model.loss_history.size();
    j["final_loss"] = run.model.loss_history.empty() ? 0.0 : run.model.loss_history.back();
  }
  return j;
}

std::string probabilities_csv(const ClassificationRun& run) {
  std::string out = "participant_id,true_label,p_positive\n";
  for (std::size_t i = 0; i < run.test_ids.size(); ++i) {
    const auto& [label, p] = run.report.per_true_class_probabilities[i];
    out += run.test_ids[i];
    out += label == 1 ? ",Depressed," : ",Healthy,";
    out += shortest(p);
    out += '\n';
  }
  return out;
}

std::string algorithm_name(std::string_view algorithm) {
  if (algorithm == "kmeans") return "K-means";
  if (algorithm == "agglo") return "Agglomerative";
  if (algorithm == "gmm") return "GMM";
  throw Error(ErrorCode::InvalidArgument, "unknown clustering algorithm '" + std::string(algorithm) + "'");
}

ClusterResult run_clustering(const Eigen::MatrixXd& data, std::string_view algorithm, const PipelineConfig& config) {
  const std::uint64_t seed = derive_seed(config.seed, 3);
  if (algorithm == "kmeans") return kmeans_fit(data, config.k, seed, config.kmeans);
  if (algorithm == "agglo") return agglomerative_fit(data, config.k, config.linkage);
  if (algorithm == "gmm") return gmm_fit(data, config.k, seed, config.gmm);
  throw Error(ErrorCode::InvalidArgument, "unknown clustering algorithm '" + std::string(algorithm) + "'");
}

}  // namespace aukit
