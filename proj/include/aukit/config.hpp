#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "aukit/clustering.hpp"
#include "aukit/ingest.hpp"
#include "aukit/ts_classify.hpp"

namespace aukit {

/// Every tunable of the command-line pipeline. Loaded from one JSON
/// document; command-line flags override individual keys.
struct PipelineConfig {
  CsvSchema schema;
  double fps = 30.0;
  std::string phase = "EI";
  bool merge_subclinical = true;
  std::filesystem::path emotion_definitions;  // empty: built-in registry

  // statistics and PCA features
  std::size_t resample_length = 900;
  bool standardize = false;
  std::vector<std::string> signals = {"AU1", "AU6", "AU15"};
  std::vector<std::string> emotions = {"Happiness", "Sadness"};

  double pca_threshold = 0.95;

  // clustering
  int k = 2;
  std::string algorithm = "kmeans";  // kmeans | agglo | gmm | all
  Linkage linkage = Linkage::ward;
  KMeansOptions kmeans;
  GmmOptions gmm;

  // classification
  int num_kernels = 10000;
  std::size_t classify_length = 300;  // resampled points per channel
  std::vector<double> alphas = default_ridge_alphas();
  LogisticOptions logistic;
  ScaleMode scale = ScaleMode::zscore;
  double test_frac = 0.2;
  SplitMode split = SplitMode::stratified;
  std::string classifier = "logistic";  // logistic | ridge | all

  std::uint64_t seed = 0;
  unsigned threads = 0;  // 0: one per logical processor

  static PipelineConfig from_json(const nlohmann::json& j);
  static PipelineConfig load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
  void validate() const;
};

/// Independent stream for one pipeline stage.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stage);

}  // namespace aukit
