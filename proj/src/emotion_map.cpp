#include "aukit/emotion_map.hpp"

#include <set>

#include "aukit/errors.hpp"

namespace aukit {

EmotionDefinition make_emotion(std::string name, const std::vector<std::string>& components) {
  if (name.empty()) throw Error(ErrorCode::InvalidArgument, "emotion name is empty");
  if (components.empty()) throw Error(ErrorCode::InvalidArgument, "emotion '" + name + "' has no components");
  EmotionDefinition def{std::move(name), {}};
  std::set<std::string> seen;
  for (const auto& c : components) {
    std::string au = canonical_au_id(c);
    if (!seen.insert(au).second)
      throw Error(ErrorCode::InvalidArgument, "emotion '" + def.name + "' lists " + au + " twice");
    def.components.push_back(std::move(au));
  }
  return def;
}

const std::vector<EmotionDefinition>& builtin_emotions() {
  // "AU5B" in the FACS notation is AU5 at intensity grade B.
  static const std::vector<EmotionDefinition> registry = {
      make_emotion("Happiness", {"AU6", "AU12"}),
      make_emotion("Sadness", {"AU1", "AU4", "AU15"}),
      make_emotion("Surprise", {"AU1", "AU2", "AU5B", "AU26"}),
      make_emotion("Fear", {"AU1", "AU2", "AU4", "AU5", "AU20", "AU26", "AU28"}),
      make_emotion("Disgust", {"AU9", "AU15", "AU16"}),
      make_emotion("Anger", {"AU4", "AU5", "AU7", "AU23"}),
  };
  return registry;
}

std::vector<EmotionDefinition> parse_emotion_definitions(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedFile, std::string("emotion definitions: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::MalformedFile, "emotion definitions must be a JSON object");
  std::vector<EmotionDefinition> out;
  for (const auto& [name, aus] : j.items()) {
    if (!aus.is_array()) throw Error(ErrorCode::MalformedFile, "emotion '" + name + "' must map to an array");
    out.push_back(make_emotion(name, aus.get<std::vector<std::string>>()));
  }
  return out;
}

const EmotionDefinition* lookup_emotion(const std::vector<EmotionDefinition>& registry, std::string_view name) {
  for (const auto& def : registry)
    if (def.name == name) return &def;
  return nullptr;
}

const EmotionDefinition& find_emotion(const std::vector<EmotionDefinition>& registry, std::string_view name) {
  if (const auto* def = lookup_emotion(registry, name)) return *def;
  throw Error(ErrorCode::InvalidArgument, "unknown emotion '" + std::string(name) + "'");
}

double emotion_frame_intensity(const std::map<std::string, double>& frame, const EmotionDefinition& definition,
                               const EmotionOptions& options) {
  double sum = 0.0;
  for (const auto& au : definition.components) {
    const auto it = frame.find(au);
    if (it != frame.end()) sum += it->second;
  }
  return options.normalize ? sum / static_cast<double>(definition.components.size()) : sum;
}

EmotionSeries emotion_series(const AUFrameSeries& series, const EmotionDefinition& definition,
                             const EmotionOptions& options) {
  std::vector<Eigen::Index> present;
  for (const auto& au : definition.components)
    if (auto col = series.column(au)) present.push_back(*col);

  EmotionSeries out;
  out.participant_id = series.participant_id;
  out.emotion = definition.name;
  out.fps = series.fps;
  out.coverage = static_cast<double>(present.size()) / static_cast<double>(definition.components.size());
  out.values.assign(series.frame_count(), 0.0);
  const auto count = static_cast<double>(definition.components.size());
  for (std::size_t r = 0; r < out.values.size(); ++r) {
    double sum = 0.0;
    // Components are summed in definition order, matching the frame path.
    for (Eigen::Index c : present) sum += series.values(static_cast<Eigen::Index>(r), c);
    out.values[r] = options.normalize ? sum / count : sum;
  }
  return out;
}

}  // namespace aukit
