#include "aukit/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "aukit/errors.hpp"
#include "aukit/parallel.hpp"

namespace aukit {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = line.find(',', pos);
    if (comma == std::string_view::npos) {
      fields.push_back(trim(line.substr(pos)));
      break;
    }
    fields.push_back(trim(line.substr(pos, comma - pos)));
    pos = comma + 1;
  }
  return fields;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = nl + 1;
  }
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  return lines;
}

bool parse_double(std::string_view text, double& out) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return false;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size() && std::isfinite(out);
}

void append_number(std::string& out, double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

std::string lower(std::string_view s) {
  std::string r(s);
  for (auto& c : r) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return r;
}

// Matches "auNN_int" (case-insensitive) and returns the canonical AU id.
std::optional<std::string> detect_au_column(std::string_view header) {
  const std::string h = lower(header);
  if (h.size() < 7 || h.rfind("au", 0) != 0 || h.substr(h.size() - 4) != "_int") return std::nullopt;
  const std::string digits = h.substr(2, h.size() - 6);
  if (digits.empty() || !std::all_of(digits.begin(), digits.end(), ::isdigit)) return std::nullopt;
  return canonical_au_id("AU" + digits);
}

}  // namespace

std::string canonical_au_id(std::string_view id) {
  std::string_view s = trim(id);
  if (s.size() < 3 || std::tolower(static_cast<unsigned char>(s[0])) != 'a' ||
      std::tolower(static_cast<unsigned char>(s[1])) != 'u')
    throw Error(ErrorCode::InvalidArgument, "not an action unit id: '" + std::string(id) + "'");
  s.remove_prefix(2);
  std::size_t n = 0;
  while (n < s.size() && std::isdigit(static_cast<unsigned char>(s[n]))) ++n;
  const std::string_view rest = s.substr(n);
  const bool grade = rest.size() == 1 && std::toupper(static_cast<unsigned char>(rest[0])) >= 'A' &&
                     std::toupper(static_cast<unsigned char>(rest[0])) <= 'E';
  if (n == 0 || (!rest.empty() && !grade))
    throw Error(ErrorCode::InvalidArgument, "not an action unit id: '" + std::string(id) + "'");
  int number = 0;
  std::from_chars(s.data(), s.data() + n, number);
  char buf[16];
  std::snprintf(buf, sizeof buf, "AU%02d", number);
  return buf;
}

std::string default_au_column(std::string_view au_id) {
  const std::string canon = canonical_au_id(au_id);
  return "au" + canon.substr(2) + "_int";
}

std::optional<Eigen::Index> AUFrameSeries::column(std::string_view au_id) const {
  for (std::size_t i = 0; i < au_ids.size(); ++i)
    if (au_ids[i] == au_id) return static_cast<Eigen::Index>(i);
  return std::nullopt;
}

void AUFrameSeries::validate(const ValueRange& range) const {
  if (au_ids.empty()) throw Error(ErrorCode::MissingColumn, participant_id + ": no AU columns");
  if (values.rows() == 0) throw Error(ErrorCode::EmptySeries, participant_id + ": no frames");
  if (static_cast<std::size_t>(values.cols()) != au_ids.size())
    throw Error(ErrorCode::DimensionMismatch, participant_id + ": column count differs from AU list");
  if (!(fps > 0.0)) throw Error(ErrorCode::InvalidArgument, participant_id + ": fps must be positive");
  std::set<std::string> seen(au_ids.begin(), au_ids.end());
  if (seen.size() != au_ids.size())
    throw Error(ErrorCode::InvalidArgument, participant_id + ": duplicate AU ids");
  for (Eigen::Index c = 0; c < values.cols(); ++c)
    for (Eigen::Index r = 0; r < values.rows(); ++r)
      if (!range.contains(values(r, c)))
        throw Error(ErrorCode::OutOfRange, participant_id + ": frame " + std::to_string(r) + ", " +
                                               au_ids[c] + " out of range");
}

CsvSchema CsvSchema::from_json(const nlohmann::json& j) {
  CsvSchema schema;
  if (j.contains("frame_column")) schema.frame_column = j.at("frame_column").get<std::string>();
  if (j.contains("au_columns")) {
    const auto& cols = j.at("au_columns");
    // An array of [column, au] pairs keeps its order; an object is key-sorted.
    if (cols.is_array()) {
      for (const auto& pair : cols)
        schema.au_columns.emplace_back(pair.at(0).get<std::string>(),
                                       canonical_au_id(pair.at(1).get<std::string>()));
    } else {
      for (const auto& [column, au] : cols.items())
        schema.au_columns.emplace_back(column, canonical_au_id(au.get<std::string>()));
    }
  }
  if (j.contains("range")) {
    const auto& r = j.at("range");
    schema.range = {r.at(0).get<double>(), r.at(1).get<double>()};
    if (!(schema.range.lo < schema.range.hi))
      throw Error(ErrorCode::InvalidArgument, "schema range must satisfy lo < hi");
  }
  return schema;
}

nlohmann::json CsvSchema::to_json() const {
  nlohmann::json j;
  j["frame_column"] = frame_column;
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& [column, au] : au_columns) cols.push_back({column, au});
  j["au_columns"] = cols;
  j["range"] = {range.lo, range.hi};
  return j;
}

AUFrameSeries parse_au_csv(std::string_view bytes, const CsvSchema& schema, std::string participant_id,
                           double fps) {
  const std::string where = participant_id.empty() ? std::string("AU CSV") : participant_id;
  if (bytes.substr(0, 3) == "\xEF\xBB\xBF") bytes.remove_prefix(3);
  const auto lines = split_lines(bytes);
  if (lines.empty()) throw Error(ErrorCode::MalformedFile, where + ": missing header row");

  const auto header = split_fields(lines[0]);
  auto find_column = [&](std::string_view name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    return std::nullopt;
  };

  const auto frame_col = find_column(schema.frame_column);
  if (!frame_col)
    throw Error(ErrorCode::MissingColumn, where + ": frame column '" + schema.frame_column + "' not found");

  std::vector<std::size_t> source;
  AUFrameSeries series;
  series.participant_id = std::move(participant_id);
  series.fps = fps;
  if (schema.au_columns.empty()) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (auto au = detect_au_column(header[i])) {
        source.push_back(i);
        series.au_ids.push_back(*au);
      }
    }
    if (source.empty()) throw Error(ErrorCode::MissingColumn, where + ": no auNN_int columns in header");
  } else {
    for (const auto& [column, au] : schema.au_columns) {
      const auto idx = find_column(column);
      if (!idx) throw Error(ErrorCode::MissingColumn, where + ": column '" + column + "' not found");
      source.push_back(*idx);
      series.au_ids.push_back(canonical_au_id(au));
    }
  }

  const std::size_t rows = lines.size() - 1;
  if (rows == 0) throw Error(ErrorCode::EmptySeries, where + ": header without data rows");
  series.values.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(source.size()));
  for (std::size_t r = 0; r < rows; ++r) {
    const auto fields = split_fields(lines[r + 1]);
    if (fields.size() != header.size())
      throw Error(ErrorCode::MalformedFile, where + ": row " + std::to_string(r + 1) + " has " +
                                                std::to_string(fields.size()) + " fields, header has " +
                                                std::to_string(header.size()));
    double frame = 0.0;
    if (!parse_double(fields[*frame_col], frame))
      throw Error(ErrorCode::MalformedNumber, where + ": row " + std::to_string(r + 1) + ", column '" +
                                                  schema.frame_column + "'");
    for (std::size_t c = 0; c < source.size(); ++c) {
      double v = 0.0;
      const std::string column(header[source[c]]);
      if (!parse_double(fields[source[c]], v))
        throw Error(ErrorCode::MalformedNumber,
                    where + ": row " + std::to_string(r + 1) + ", column '" + column + "'");
      if (!schema.range.contains(v))
        throw Error(ErrorCode::OutOfRange, where + ": row " + std::to_string(r + 1) + ", column '" + column +
                                               "' value " + std::string(fields[source[c]]) + " outside [" +
                                               std::to_string(schema.range.lo) + ", " +
                                               std::to_string(schema.range.hi) + "]");
      series.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
    }
  }
  std::set<std::string> seen(series.au_ids.begin(), series.au_ids.end());
  if (seen.size() != series.au_ids.size())
    throw Error(ErrorCode::MalformedFile, where + ": two columns map to the same AU");
  return series;
}

std::string write_au_csv(const AUFrameSeries& series) {
  std::string out = "frame";
  for (const auto& au : series.au_ids) out += "," + default_au_column(au);
  out += '\n';
  out.reserve(out.size() + static_cast<std::size_t>(series.values.size()) * 10);
  for (Eigen::Index r = 0; r < series.values.rows(); ++r) {
    out += std::to_string(r);
    for (Eigen::Index c = 0; c < series.values.cols(); ++c) {
      out += ',';
      append_number(out, series.values(r, c));
    }
    out += '\n';
  }
  return out;
}

const Phase* PhaseTiming::find(std::string_view name) const {
  for (const auto& p : phases)
    if (p.name == name) return &p;
  return nullptr;
}

PhaseTiming parse_phase_timing(std::string_view bytes) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(bytes);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedFile, std::string("timing file is not valid JSON: ") + e.what());
  }
  if (!j.is_array() || j.empty()) throw Error(ErrorCode::MalformedFile, "timing file must be a non-empty JSON array");

  PhaseTiming timing;
  std::set<std::string> names;
  for (const auto& rec : j) {
    Phase phase;
    std::string pid;
    try {
      pid = rec.at("participant_id").get<std::string>();
      phase.name = rec.at("phase_name").get<std::string>();
      phase.start_s = rec.at("start_s").get<double>();
      phase.end_s = rec.at("end_s").get<double>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::MalformedFile, std::string("timing record: ") + e.what());
    }
    if (timing.phases.empty()) {
      timing.participant_id = pid;
    } else if (pid != timing.participant_id) {
      throw Error(ErrorCode::MalformedFile, "timing file mixes participants '" + timing.participant_id +
                                                "' and '" + pid + "'");
    }
    if (!std::isfinite(phase.start_s) || !std::isfinite(phase.end_s) || phase.start_s < 0.0)
      throw Error(ErrorCode::MalformedFile, "phase '" + phase.name + "' has invalid bounds");
    if (!(phase.end_s > phase.start_s))
      throw Error(ErrorCode::NegativeDuration, "phase '" + phase.name + "' ends at or before its start");
    if (!names.insert(phase.name).second)
      throw Error(ErrorCode::MalformedFile, "phase '" + phase.name + "' listed twice");
    timing.phases.push_back(std::move(phase));
  }
  std::stable_sort(timing.phases.begin(), timing.phases.end(),
                   [](const Phase& a, const Phase& b) { return a.start_s < b.start_s; });
  for (std::size_t i = 1; i < timing.phases.size(); ++i)
    if (timing.phases[i].start_s < timing.phases[i - 1].end_s)
      throw Error(ErrorCode::OverlappingPhases,
                  "phases '" + timing.phases[i - 1].name + "' and '" + timing.phases[i].name + "' overlap");
  return timing;
}

std::string write_phase_timing(const PhaseTiming& timing) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& p : timing.phases)
    j.push_back({{"participant_id", timing.participant_id},
                 {"phase_name", p.name},
                 {"start_s", p.start_s},
                 {"end_s", p.end_s}});
  return j.dump(2) + "\n";
}

std::pair<std::size_t, std::size_t> phase_frame_window(std::size_t frames, double fps, double start_s,
                                                       double end_s) {
  // Smallest index i in [lo, frames] with i / fps >= bound. The closed-form
  // guess is corrected against the exact predicate, since i / fps is
  // monotone in i.
  auto lower_bound = [&](double bound, std::size_t lo) {
    const double guess = std::ceil(bound * fps);
    std::size_t i = guess <= static_cast<double>(lo)       ? lo
                    : guess >= static_cast<double>(frames) ? frames
                                                           : static_cast<std::size_t>(guess);
    while (i > lo && static_cast<double>(i - 1) / fps >= bound) --i;
    while (i < frames && static_cast<double>(i) / fps < bound) ++i;
    return i;
  };
  const std::size_t first = lower_bound(start_s, 0);
  const std::size_t last = lower_bound(end_s, first);
  return {first, last};
}

AUFrameSeries trim_to_phase(const AUFrameSeries& series, const PhaseTiming& timing, std::string_view phase_name) {
  const Phase* phase = timing.find(phase_name);
  if (!phase)
    throw Error(ErrorCode::UnknownPhase,
                series.participant_id + ": no phase named '" + std::string(phase_name) + "'");
  const auto [first, last] = phase_frame_window(series.frame_count(), series.fps, phase->start_s, phase->end_s);
  if (first >= last)
    throw Error(ErrorCode::PhaseOutOfBounds, series.participant_id + ": phase '" + phase->name +
                                                 "' contains no recorded frame");
  AUFrameSeries out;
  out.participant_id = series.participant_id;
  out.fps = series.fps;
  out.au_ids = series.au_ids;
  out.values = series.values.middleRows(static_cast<Eigen::Index>(first), static_cast<Eigen::Index>(last - first));
  return out;
}

std::string_view to_string(Label label) {
  switch (label) {
    case Label::Depressed: return "Depressed";
    case Label::Healthy: return "Healthy";
    case Label::SubClinical: return "SubClinical";
  }
  return "Unknown";
}

Label parse_label(std::string_view text) {
  std::string t = lower(trim(text));
  t.erase(std::remove_if(t.begin(), t.end(), [](char c) { return c == '-' || c == '_' || c == ' '; }), t.end());
  if (t == "depressed") return Label::Depressed;
  if (t == "healthy") return Label::Healthy;
  if (t == "subclinical") return Label::SubClinical;
  throw Error(ErrorCode::MalformedFile, "unknown label '" + std::string(text) + "'");
}

std::map<Label, std::size_t> Cohort::counts() const {
  std::map<Label, std::size_t> c{{Label::Depressed, 0}, {Label::Healthy, 0}, {Label::SubClinical, 0}};
  for (const auto& p : participants) ++c[p.label];
  return c;
}

void Cohort::validate() const {
  std::set<std::string> ids;
  for (const auto& p : participants) {
    if (!ids.insert(p.series.participant_id).second)
      throw Error(ErrorCode::DuplicateParticipant, "participant '" + p.series.participant_id + "' appears twice");
    if (merged && p.label == Label::SubClinical)
      throw Error(ErrorCode::InvalidArgument, "merged cohort still holds SubClinical participant '" +
                                                  p.series.participant_id + "'");
  }
}

std::vector<ManifestEntry> parse_manifest(std::string_view json_text, const std::filesystem::path& base_dir) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedFile, std::string("manifest is not valid JSON: ") + e.what());
  }
  if (!j.is_array()) throw Error(ErrorCode::MalformedFile, "manifest must be a JSON array");
  std::vector<ManifestEntry> entries;
  for (const auto& rec : j) {
    ManifestEntry e;
    try {
      e.participant_id = rec.at("participant_id").get<std::string>();
      e.au_csv_path = rec.at("au_csv_path").get<std::string>();
      if (rec.contains("timing_path") && !rec.at("timing_path").is_null())
        e.timing_path = rec.at("timing_path").get<std::string>();
      e.label = parse_label(rec.at("label").get<std::string>());
    } catch (const nlohmann::json::exception& ex) {
      throw Error(ErrorCode::MalformedFile, std::string("manifest record: ") + ex.what());
    }
    if (e.au_csv_path.is_relative() && !base_dir.empty()) e.au_csv_path = base_dir / e.au_csv_path;
    if (!e.timing_path.empty() && e.timing_path.is_relative() && !base_dir.empty())
      e.timing_path = base_dir / e.timing_path;
    entries.push_back(std::move(e));
  }
  return entries;
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  return parse_manifest(read_file(path), path.parent_path());
}

std::string write_manifest(const std::vector<ManifestEntry>& entries, const std::filesystem::path& base_dir) {
  auto rel = [&](const std::filesystem::path& p) {
    if (base_dir.empty() || p.empty()) return p.generic_string();
    return p.lexically_relative(base_dir).generic_string();
  };
  nlohmann::json j = nlohmann::json::array();
  for (const auto& e : entries)
    j.push_back({{"participant_id", e.participant_id},
                 {"au_csv_path", rel(e.au_csv_path)},
                 {"timing_path", rel(e.timing_path)},
                 {"label", std::string(to_string(e.label))}});
  return j.dump(2) + "\n";
}

Cohort load_cohort(const std::vector<ManifestEntry>& manifest, bool merge, const LoadOptions& options) {
  std::set<std::string> ids;
  for (const auto& e : manifest)
    if (!ids.insert(e.participant_id).second)
      throw Error(ErrorCode::DuplicateParticipant, "participant '" + e.participant_id + "' listed twice");

  Cohort cohort;
  cohort.participants.resize(manifest.size());
  parallel_for(manifest.size(), options.threads, [&](std::size_t i) {
    const auto& e = manifest[i];
    Participant p;
    p.label = e.label;
    try {
      p.series = parse_au_csv(read_file(e.au_csv_path), options.schema, e.participant_id, options.fps);
      if (!e.timing_path.empty()) {
        p.timing = parse_phase_timing(read_file(e.timing_path));
        if (p.timing->participant_id != e.participant_id)
          throw Error(ErrorCode::MalformedFile, "timing file belongs to '" + p.timing->participant_id + "'");
      }
    } catch (const Error& err) {
      throw Error(err.code(), "participant '" + e.participant_id + "': " + err.what());
    }
    cohort.participants[i] = std::move(p);
  });
  return merge ? merge_subclinical(std::move(cohort)) : cohort;
}

Cohort merge_subclinical(Cohort cohort) {
  for (auto& p : cohort.participants)
    if (p.label == Label::SubClinical) p.label = Label::Depressed;
  cohort.merged = true;
  return cohort;
}

Cohort trim_cohort(const Cohort& cohort, std::string_view phase_name) {
  Cohort out;
  out.merged = cohort.merged;
  out.participants.reserve(cohort.participants.size());
  for (const auto& p : cohort.participants) {
    if (!p.timing)
      throw Error(ErrorCode::UnknownPhase, p.series.participant_id + ": no timing information to trim with");
    out.participants.push_back({trim_to_phase(p.series, *p.timing, phase_name), p.label, p.timing});
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileError, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::FileError, "cannot write '" + path.string() + "'");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(ErrorCode::FileError, "write failed for '" + path.string() + "'");
}

}  // namespace aukit
