#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "aukit/group_stats.hpp"

namespace aukit {

struct SilhouetteEntry {
  std::string algorithm;  // display name, e.g. "K-means"
  std::string signal;
  double score = 0.0;
};

struct AccuracyEntry {
  std::string method;
  double accuracy = 0.0;
};

/// algorithm,signal,silhouette
std::string silhouette_csv(const std::vector<SilhouetteEntry>& entries);
std::vector<SilhouetteEntry> parse_silhouette_csv(std::string_view csv);

/// method,accuracy
std::string accuracy_csv(const std::vector<AccuracyEntry>& entries);
std::vector<AccuracyEntry> parse_accuracy_csv(std::string_view csv);

/// Reads the long form written by to_csv(MeanIntensityTable). Only the
/// means survive; test statistics are left at their defaults.
MeanIntensityTable parse_mean_intensity_csv(std::string_view csv);

/// Fixed-point text that never prints a negative zero.
std::string format_fixed(double value, int decimals);

/// "Clustering Algorithm,Score (<signal>),..." with rows K-means,
/// Agglomerative, GMM. Signals are sorted; absent cells print NA.
std::string render_silhouette_table(const std::vector<SilhouetteEntry>& entries, int decimals = 3);

/// "Method,Accuracy Score", logistic row first.
std::string render_accuracy_table(const std::vector<AccuracyEntry>& entries, int decimals = 2);

}  // namespace aukit
