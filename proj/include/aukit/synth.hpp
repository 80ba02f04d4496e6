#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "aukit/ingest.hpp"

namespace aukit {

/// Parameters of a synthetic cohort. Each AU value is
///   base_level + group_sign * offset / 2 + participant effect + AR(1) noise,
/// clipped to the valid range and rounded to 1e-6. Depressed participants
/// take +offset/2, healthy -offset/2, sub-clinical +offset/4.
struct CohortSpec {
  int n_depressed = 100;
  int n_healthy = 100;
  int n_subclinical = 0;
  int t_min = 600;  // frames
  int t_max = 1200;
  double fps = 30.0;
  std::vector<std::string> au_ids;          // defaults to the common 17 intensity AUs
  std::map<std::string, double> au_offsets;  // depressed minus healthy
  double base_level = 0.4;
  double noise_sd = 0.08;  // marginal sd of the AR(1) noise
  double ar_coeff = 0.9;
  double participant_sd = 0.05;
  ValueRange range;
  double phase_margin_s = 2.0;  // baseline and recovery phases around "EI"
  std::uint64_t seed = 0;

  static CohortSpec defaults();
  static CohortSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  void validate() const;
};

std::vector<std::string> default_au_ids();

struct SyntheticCohort {
  Cohort cohort;  // unmerged, every participant carries timing
  nlohmann::json ground_truth;
};

SyntheticCohort generate_cohort(const CohortSpec& spec, unsigned threads = 1);

/// Writes manifest.json, au/<id>.csv, timing/<id>.json and ground_truth.json.
void write_cohort(const SyntheticCohort& synthetic, const std::filesystem::path& dir);

}  // namespace aukit
