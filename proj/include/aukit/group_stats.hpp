#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "aukit/emotion_map.hpp"
#include "aukit/ingest.hpp"

namespace aukit {

/// Linear interpolation onto target_length points over normalized time.
/// Endpoints are preserved; a length-1 input yields a constant series.
std::vector<double> resample_series(std::span<const double> values, std::size_t target_length);

double participant_mean(std::span<const double> values);

/// Per-frame values of a signal, which is either an emotion name from the
/// registry or an AU id. Emotions follow the zero-fill rule for missing
/// AUs; a missing AU signal throws MissingColumn.
std::vector<double> extract_signal(const AUFrameSeries& series, std::string_view signal,
                                   const std::vector<EmotionDefinition>& emotions = builtin_emotions());

/// Group a is Depressed, group b is Healthy. Unmerged SubClinical
/// participants belong to neither.
struct GroupCurve {
  std::string signal_name;
  std::vector<double> t;  // normalized time in [0, 1]
  std::vector<double> mean_a, sd_a;
  std::vector<double> mean_b, sd_b;
  double overall_mean_a = 0.0;
  double overall_mean_b = 0.0;
  std::size_t n_a = 0, n_b = 0;
  bool standardized = false;
};

GroupCurve group_mean_curve(const Cohort& cohort, std::string_view signal, std::size_t target_length = 900,
                            bool standardize = false,
                            const std::vector<EmotionDefinition>& emotions = builtin_emotions());

enum class TestMethod { welch_t, mann_whitney_u };

std::string_view to_string(TestMethod method);

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  TestMethod method = TestMethod::welch_t;
  std::size_t n_a = 0, n_b = 0;
  double df = 0.0;       // Welch-Satterthwaite degrees of freedom (welch_t only)
  bool exact = false;    // exact null distribution used (mann_whitney_u only)
  bool degenerate = false;  // zero spread; p fixed by convention
};

/// Two-sided test. Mann-Whitney reports U for sample a.
TestResult two_sample_test(std::span<const double> a, std::span<const double> b, TestMethod method);

struct MeanIntensityRow {
  std::string signal;
  double depressed_mean = 0.0;
  double healthy_mean = 0.0;
  double difference = 0.0;
  TestResult welch;
  TestResult mann_whitney;
};

struct MeanIntensityTable {
  std::vector<MeanIntensityRow> rows;
  bool standardized = false;
};

/// Group means of participant means. When standardize is set, each signal
/// is z-scored with the mean and sd pooled over every frame of every
/// participant in either group.
MeanIntensityTable mean_intensity_table(const Cohort& cohort, const std::vector<std::string>& signals,
                                        bool standardize,
                                        const std::vector<EmotionDefinition>& emotions = builtin_emotions());

/// signal,depressed,healthy,difference,p_welch,p_mwu
std::string to_csv(const MeanIntensityTable& table);

/// Wide layout: one column per signal, rows Depressed / Healthy / Difference.
std::string to_wide_csv(const MeanIntensityTable& table, int decimals = 3);

/// t,mean_a,sd_a,mean_b,sd_b
std::string to_csv(const GroupCurve& curve);

}  // namespace aukit
