#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "aukit/clustering.hpp"
#include "aukit/config.hpp"
#include "aukit/emotion_map.hpp"
#include "aukit/ingest.hpp"
#include "aukit/ts_classify.hpp"

namespace aukit {

std::vector<EmotionDefinition> load_registry(const PipelineConfig& config);

/// Loads the manifest, merges SubClinical when configured and trims every
/// participant to the configured phase.
Cohort load_pipeline_cohort(const std::filesystem::path& manifest, const PipelineConfig& config);

/// One row per participant.
struct FeatureTable {
  std::string signal;
  std::vector<std::string> ids;
  std::vector<Label> labels;
  Eigen::MatrixXd values;
};

/// participant_id,label,<prefix><first_index>,<prefix><first_index + 1>,...
std::string to_csv(const FeatureTable& table, std::string_view column_prefix = "v", int first_index = 0);
FeatureTable parse_feature_table(std::string_view csv, std::string signal = {});

/// Each participant's signal resampled to `length` points.
FeatureTable signal_features(const Cohort& cohort, std::string_view signal, std::size_t length,
                             const std::vector<EmotionDefinition>& registry);

/// Depressed (1) and Healthy (0) participants with their channels resampled
/// and concatenated. Unmerged SubClinical participants are left out.
struct ClassificationData {
  std::vector<std::string> ids;
  std::vector<int> labels;
  std::vector<std::vector<double>> series;
  std::size_t channel_length = 0;
  std::size_t channels = 0;
};

ClassificationData classification_data(const Cohort& cohort, const std::vector<std::string>& signals,
                                       std::size_t length, const std::vector<EmotionDefinition>& registry);

struct ClassificationRun {
  ModelKind kind = ModelKind::logistic;
  LinearModel model;
  EvalReport report;
  std::vector<std::string> test_ids;
  Split split;
};

/// Splits, transforms every series once and trains each requested model on
/// the same features.
std::vector<ClassificationRun> run_classification(const ClassificationData& data, const PipelineConfig& config,
                                                  const std::vector<ModelKind>& kinds);

std::string method_name(ModelKind kind);
nlohmann::json to_json(const ClassificationRun& run, const PipelineConfig& config);
/// participant_id,true_label,p_positive
std::string probabilities_csv(const ClassificationRun& run);

/// "kmeans" -> "K-means", "agglo" -> "Agglomerative", "gmm" -> "GMM".
std::string algorithm_name(std::string_view algorithm);
ClusterResult run_clustering(const Eigen::MatrixXd& data, std::string_view algorithm, const PipelineConfig& config);

}  // namespace aukit
