#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "aukit/ingest.hpp"

namespace aukit {

/// A named emotion defined as the sum of its component AU intensities.
struct EmotionDefinition {
  std::string name;
  std::vector<std::string> components;  // canonical AU ids, unique
};

/// Builds a definition, canonicalizing AU ids. Throws on an empty or
/// repeated component list.
EmotionDefinition make_emotion(std::string name, const std::vector<std::string>& components);

/// Happiness, Sadness, Surprise, Fear, Disgust and Anger over FACS AUs.
const std::vector<EmotionDefinition>& builtin_emotions();

/// Reads a JSON object mapping emotion name to a list of AU ids.
std::vector<EmotionDefinition> parse_emotion_definitions(std::string_view json_text);

/// Looks up by name; throws InvalidArgument when absent.
const EmotionDefinition& find_emotion(const std::vector<EmotionDefinition>& registry, std::string_view name);
const EmotionDefinition* lookup_emotion(const std::vector<EmotionDefinition>& registry, std::string_view name);

struct EmotionSeries {
  std::string participant_id;
  std::string emotion;
  std::vector<double> values;
  double fps = 30.0;
  double coverage = 1.0;  // fraction of component AUs present in the source
};

// Divides the raw sum by the component count when set.
struct EmotionOptions {
  bool normalize = false;
};

/// Sum of the component intensities of one frame. Missing AUs count as 0.
double emotion_frame_intensity(const std::map<std::string, double>& frame, const EmotionDefinition& definition,
                               const EmotionOptions& options = {});

EmotionSeries emotion_series(const AUFrameSeries& series, const EmotionDefinition& definition,
                             const EmotionOptions& options = {});

}  // namespace aukit
