#include "aukit/config.hpp"

#include "aukit/errors.hpp"

namespace aukit {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stage) {
  std::uint64_t x = seed + 0x9E3779B97F4A7C15ULL * (stage + 1);
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

PipelineConfig PipelineConfig::from_json(const nlohmann::json& j) {
  PipelineConfig c;
  try {
    if (j.contains("schema")) c.schema = CsvSchema::from_json(j.at("schema"));
    if (j.contains("fps")) c.fps = j.at("fps").get<double>();
    if (j.contains("phase")) c.phase = j.at("phase").get<std::string>();
    if (j.contains("merge_subclinical")) c.merge_subclinical = j.at("merge_subclinical").get<bool>();
    if (j.contains("emotion_definitions"))
      c.emotion_definitions = j.at("emotion_definitions").get<std::string>();
    if (j.contains("resample_length")) c.resample_length = j.at("resample_length").get<std::size_t>();
    if (j.contains("standardize")) c.standardize = j.at("standardize").get<bool>();
    if (j.contains("signals")) c.signals = j.at("signals").get<std::vector<std::string>>();
    if (j.contains("emotions")) c.emotions = j.at("emotions").get<std::vector<std::string>>();
    if (j.contains("pca_threshold")) c.pca_threshold = j.at("pca_threshold").get<double>();
    if (j.contains("clustering")) {
      const auto& cl = j.at("clustering");
      if (cl.contains("k")) c.k = cl.at("k").get<int>();
      if (cl.contains("algorithm")) c.algorithm = cl.at("algorithm").get<std::string>();
      if (cl.contains("linkage")) c.linkage = parse_linkage(cl.at("linkage").get<std::string>());
      if (cl.contains("kmeans_max_iter")) c.kmeans.max_iter = cl.at("kmeans_max_iter").get<int>();
      if (cl.contains("kmeans_tol")) c.kmeans.tol = cl.at("kmeans_tol").get<double>();
      if (cl.contains("gmm_max_iter")) c.gmm.max_iter = cl.at("gmm_max_iter").get<int>();
      if (cl.contains("gmm_tol")) c.gmm.tol = cl.at("gmm_tol").get<double>();
      if (cl.contains("gmm_regularization")) c.gmm.regularization = cl.at("gmm_regularization").get<double>();
    }
    if (j.contains("classifier")) {
      const auto& cf = j.at("classifier");
      if (cf.contains("kind")) c.classifier = cf.at("kind").get<std::string>();
      if (cf.contains("num_kernels")) c.num_kernels = cf.at("num_kernels").get<int>();
      if (cf.contains("resample_length")) c.classify_length = cf.at("resample_length").get<std::size_t>();
      if (cf.contains("alphas")) c.alphas = cf.at("alphas").get<std::vector<double>>();
      if (cf.contains("l2")) c.logistic.l2 = cf.at("l2").get<double>();
      if (cf.contains("learning_rate")) c.logistic.learning_rate = cf.at("learning_rate").get<double>();
      if (cf.contains("epochs")) c.logistic.epochs = cf.at("epochs").get<int>();
      if (cf.contains("tol")) c.logistic.tol = cf.at("tol").get<double>();
      if (cf.contains("scale")) c.scale = parse_scale_mode(cf.at("scale").get<std::string>());
      if (cf.contains("test_frac")) c.test_frac = cf.at("test_frac").get<double>();
      if (cf.contains("split")) c.split = parse_split_mode(cf.at("split").get<std::string>());
    }
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("threads")) c.threads = j.at("threads").get<unsigned>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedFile, std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedFile, "config '" + path.string() + "': " + e.what());
  }
  return from_json(j);
}

nlohmann::json PipelineConfig::to_json() const {
  return {{"schema", schema.to_json()},
          {"fps", fps},
          {"phase", phase},
          {"merge_subclinical", merge_subclinical},
          {"emotion_definitions", emotion_definitions.generic_string()},
          {"resample_length", resample_length},
          {"standardize", standardize},
          {"signals", signals},
          {"emotions", emotions},
          {"pca_threshold", pca_threshold},
          {"clustering",
           {{"k", k},
            {"algorithm", algorithm},
            {"linkage", std::string(to_string(linkage))},
            {"kmeans_max_iter", kmeans.max_iter},
            {"kmeans_tol", kmeans.tol},
            {"gmm_max_iter", gmm.max_iter},
            {"gmm_tol", gmm.tol},
            {"gmm_regularization", gmm.regularization}}},
          {"classifier",
           {{"kind", classifier},
            {"num_kernels", num_kernels},
            {"resample_length", classify_length},
            {"alphas", alphas},
            {"l2", logistic.l2},
            {"learning_rate", logistic.learning_rate},
            {"epochs", logistic.epochs},
            {"tol", logistic.tol},
            {"scale", std::string(to_string(scale))},
            {"test_frac", test_frac},
            {"split", std::string(to_string(split))}}},
          {"seed", seed},
          {"threads", threads}};
}

void PipelineConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidArgument, "config: " + msg); };
  if (!(fps > 0.0)) fail("fps must be positive");
  if (phase.empty()) fail("phase name is empty");
  if (resample_length < 1) fail("resample_length must be positive");
  if (!(pca_threshold > 0.0 && pca_threshold <= 1.0)) fail("pca_threshold must lie in (0, 1]");
  if (k < 1) fail("k must be positive");
  if (algorithm != "kmeans" && algorithm != "agglo" && algorithm != "gmm" && algorithm != "all")
    fail("algorithm must be kmeans, agglo, gmm or all");
  if (classifier != "logistic" && classifier != "ridge" && classifier != "all")
    fail("classifier must be logistic, ridge or all");
  if (num_kernels < 1) fail("num_kernels must be positive");
  if (classify_length < 7) fail("classifier resample_length must be at least 7");
  if (!(test_frac > 0.0 && test_frac < 1.0)) fail("test_frac must lie in (0, 1)");
  if (emotions.empty()) fail("emotion list is empty");
}

}  // namespace aukit
