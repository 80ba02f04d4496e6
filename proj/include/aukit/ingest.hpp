#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace aukit {

struct ValueRange {
  double lo = 0.0;
  double hi = 1.0;

  bool contains(double v) const { return v >= lo && v <= hi; }
};

/// Normalizes an action-unit identifier to the two-digit form "AU01".
/// Accepts "AU1", "au01", and a trailing FACS intensity grade ("AU5B").
std::string canonical_au_id(std::string_view id);

/// Default CSV column name for an AU ("AU01" -> "au01_int").
std::string default_au_column(std::string_view au_id);

/// One participant's per-frame AU intensities. Rows are frames, columns
/// follow au_ids.
struct AUFrameSeries {
  std::string participant_id;
  double fps = 30.0;
  std::vector<std::string> au_ids;
  Eigen::MatrixXd values;

  std::size_t frame_count() const { return static_cast<std::size_t>(values.rows()); }
  std::optional<Eigen::Index> column(std::string_view au_id) const;
  // Throws on shape, uniqueness, or range violations.
  void validate(const ValueRange& range) const;
};

/// Column mapping for AU CSV files. When au_columns is empty every header
/// of the form "auNN_int" is picked up, in header order.
struct CsvSchema {
  std::string frame_column = "frame";
  std::vector<std::pair<std::string, std::string>> au_columns;  // column -> AU id
  ValueRange range;

  static CsvSchema from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

AUFrameSeries parse_au_csv(std::string_view bytes, const CsvSchema& schema,
                           std::string participant_id = {}, double fps = 30.0);

/// Inverse of parse_au_csv for the default schema. Numbers are written in
/// shortest round-trip form, so reparsing is exact.
std::string write_au_csv(const AUFrameSeries& series);

struct Phase {
  std::string name;
  double start_s = 0.0;
  double end_s = 0.0;
};

struct PhaseTiming {
  std::string participant_id;
  std::vector<Phase> phases;  // sorted by start_s, non-overlapping

  const Phase* find(std::string_view name) const;
};

PhaseTiming parse_phase_timing(std::string_view bytes);
std::string write_phase_timing(const PhaseTiming& timing);

/// Half-open frame window [first, last) of frames i with start <= i/fps < end.
std::pair<std::size_t, std::size_t> phase_frame_window(std::size_t frames, double fps,
                                                       double start_s, double end_s);

AUFrameSeries trim_to_phase(const AUFrameSeries& series, const PhaseTiming& timing,
                            std::string_view phase_name);

enum class Label { Depressed, Healthy, SubClinical };

std::string_view to_string(Label label);
Label parse_label(std::string_view text);

struct Participant {
  AUFrameSeries series;
  Label label = Label::Healthy;
  std::optional<PhaseTiming> timing;
};

struct Cohort {
  std::vector<Participant> participants;
  bool merged = false;

  std::map<Label, std::size_t> counts() const;
  void validate() const;
};

struct ManifestEntry {
  std::string participant_id;
  std::filesystem::path au_csv_path;
  std::filesystem::path timing_path;  // may be empty
  Label label = Label::Healthy;
};

/// Relative paths are resolved against base_dir.
std::vector<ManifestEntry> parse_manifest(std::string_view json_text,
                                          const std::filesystem::path& base_dir = {});
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);
/// Paths are written relative to base_dir when they live below it.
std::string write_manifest(const std::vector<ManifestEntry>& entries,
                           const std::filesystem::path& base_dir = {});

struct LoadOptions {
  CsvSchema schema;
  double fps = 30.0;
  unsigned threads = 1;
};

Cohort load_cohort(const std::vector<ManifestEntry>& manifest, bool merge_subclinical,
                   const LoadOptions& options = {});

/// Relabels SubClinical participants as Depressed.
Cohort merge_subclinical(Cohort cohort);

/// Trims every participant to the named phase; participants need timing.
Cohort trim_cohort(const Cohort& cohort, std::string_view phase_name);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace aukit
