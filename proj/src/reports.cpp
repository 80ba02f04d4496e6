#include "aukit/reports.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "aukit/errors.hpp"

namespace aukit {

namespace {

std::string shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// Rows of a small comma-separated file, header checked and dropped.
std::vector<std::vector<std::string>> read_rows(std::string_view csv, const std::vector<std::string>& header,
                                                std::string_view what) {
  std::vector<std::vector<std::string>> rows;
  bool first = true;
  std::size_t line_no = 0;
  while (!csv.empty()) {
    const auto nl = csv.find('\n');
    std::string_view line = csv.substr(0, nl);
    csv = nl == std::string_view::npos ? std::string_view{} : csv.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (auto comma = line.find(','); comma != std::string_view::npos; comma = line.find(',', start)) {
      fields.emplace_back(line.substr(start, comma - start));
      start = comma + 1;
    }
    fields.emplace_back(line.substr(start));
    if (first) {
      for (const auto& col : header)
        if (std::find(fields.begin(), fields.end(), col) == fields.end())
          throw Error(ErrorCode::MissingColumn, std::string(what) + ": missing column '" + col + "'");
      if (fields.size() < header.size() ||
          !std::equal(header.begin(), header.end(), fields.begin()))
        throw Error(ErrorCode::MalformedFile, std::string(what) + ": unexpected column order");
      first = false;
      continue;
    }
    if (fields.size() != header.size())
      throw Error(ErrorCode::MalformedFile, std::string(what) + " line " + std::to_string(line_no) + ": expected " +
                                                std::to_string(header.size()) + " fields");
    rows.push_back(std::move(fields));
  }
  if (first) throw Error(ErrorCode::EmptyInput, std::string(what) + " is empty");
  return rows;
}

double number(const std::string& text, std::string_view what) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
    throw Error(ErrorCode::MalformedNumber, std::string(what) + ": '" + text + "' is not a number");
  return v;
}

}  // namespace

std::string silhouette_csv(const std::vector<SilhouetteEntry>& entries) {
  std::string out = "algorithm,signal,silhouette\n";
  for (const auto& e : entries) out += e.algorithm + ',' + e.signal + ',' + shortest(e.score) + '\n';
  return out;
}

std::vector<SilhouetteEntry> parse_silhouette_csv(std::string_view csv) {
  std::vector<SilhouetteEntry> out;
  for (auto& row : read_rows(csv, {"algorithm", "signal", "silhouette"}, "silhouette scores"))
    out.push_back({row[0], row[1], number(row[2], "silhouette scores")});
  return out;
}

std::string accuracy_csv(const std::vector<AccuracyEntry>& entries) {
  std::string out = "method,accuracy\n";
  for (const auto& e : entries) out += e.method + ',' + shortest(e.accuracy) + '\n';
  return out;
}

std::vector<AccuracyEntry> parse_accuracy_csv(std::string_view csv) {
  std::vector<AccuracyEntry> out;
  for (auto& row : read_rows(csv, {"method", "accuracy"}, "accuracy scores"))
    out.push_back({row[0], number(row[1], "accuracy scores")});
  return out;
}

MeanIntensityTable parse_mean_intensity_csv(std::string_view csv) {
  MeanIntensityTable table;
  for (auto& row : read_rows(csv, {"signal", "depressed", "healthy", "difference", "p_welch", "p_mwu"},
                             "mean intensity table")) {
    MeanIntensityRow r;
    r.signal = row[0];
    r.depressed_mean = number(row[1], "mean intensity table");
    r.healthy_mean = number(row[2], "mean intensity table");
    r.difference = number(row[3], "mean intensity table");
    r.welch.p_value = number(row[4], "mean intensity table");
    r.mann_whitney.method = TestMethod::mann_whitney_u;
    r.mann_whitney.p_value = number(row[5], "mean intensity table");
    table.rows.push_back(std::move(r));
  }
  return table;
}

std::string format_fixed(double value, int decimals) {
  if (std::isnan(value)) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
  std::string s = buf;
  if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

std::string render_silhouette_table(const std::vector<SilhouetteEntry>& entries, int decimals) {
  std::set<std::string> signals;
  std::map<std::pair<std::string, std::string>, double> cell;
  for (const auto& e : entries) {
    signals.insert(e.signal);
    cell[{e.algorithm, e.signal}] = e.score;
  }
  std::string out = "Clustering Algorithm";
  for (const auto& s : signals) out += ",Score (" + s + ")";
  out += '\n';
  for (const char* algo : {"K-means", "Agglomerative", "GMM"}) {
    out += algo;
    for (const auto& s : signals) {
      const auto it = cell.find({algo, s});
      out += ',';
      out += it == cell.end() ? std::string("NA") : format_fixed(it->second, decimals);
    }
    out += '\n';
  }
  return out;
}

std::string render_accuracy_table(const std::vector<AccuracyEntry>& entries, int decimals) {
  std::string out = "Method,Accuracy Score\n";
  std::vector<AccuracyEntry> sorted = entries;
  std::stable_sort(sorted.begin(), sorted.end(), [](const AccuracyEntry& a, const AccuracyEntry& b) {
    const auto rank = [](const std::string& m) { return m.find("Logistic") != std::string::npos ? 0 : 1; };
    return rank(a.method) < rank(b.method);
  });
  for (const auto& e : sorted) out += e.method + ',' + format_fixed(e.accuracy, decimals) + '\n';
  return out;
}

}  // namespace aukit
