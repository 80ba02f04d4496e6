#include "aukit/group_stats.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

#include "aukit/errors.hpp"

namespace aukit {

namespace {

std::string number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s(buf);
  // Avoid printing "-0.000".
  if (s.find_first_not_of("-0.") == std::string::npos && s.front() == '-') s.erase(0, 1);
  return s;
}

double mean_of(std::span<const double> v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

// Sample variance (n - 1); zero for a single observation.
double variance_of(std::span<const double> v, double mean) {
  if (v.size() < 2) return 0.0;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(v.size() - 1);
}

// Depressed and Healthy members, each ordered by participant id so that
// aggregation is independent of manifest order.
struct Groups {
  std::vector<const Participant*> a;
  std::vector<const Participant*> b;
};

Groups split_groups(const Cohort& cohort) {
  Groups g;
  for (const auto& p : cohort.participants) {
    if (p.label == Label::Depressed) g.a.push_back(&p);
    else if (p.label == Label::Healthy) g.b.push_back(&p);
  }
  auto by_id = [](const Participant* x, const Participant* y) {
    return x->series.participant_id < y->series.participant_id;
  };
  std::sort(g.a.begin(), g.a.end(), by_id);
  std::sort(g.b.begin(), g.b.end(), by_id);
  if (g.a.empty()) throw Error(ErrorCode::EmptyGroup, "no Depressed participants");
  if (g.b.empty()) throw Error(ErrorCode::EmptyGroup, "no Healthy participants");
  return g;
}

struct Pooled {
  double mean = 0.0;
  double sd = 1.0;
};

Pooled pooled_stats(const std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto* group : {&a, &b})
    for (const auto& v : *group) {
      for (double x : v) sum += x;
      n += v.size();
    }
  Pooled p;
  p.mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (const auto* group : {&a, &b})
    for (const auto& v : *group)
      for (double x : v) ss += (x - p.mean) * (x - p.mean);
  p.sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
  return p;
}

// A zero pooled sd only centers the data.
void standardize_in_place(std::vector<std::vector<double>>& series, const Pooled& pooled) {
  for (auto& v : series)
    for (double& x : v) x = pooled.sd > 0.0 ? (x - pooled.mean) / pooled.sd : x - pooled.mean;
}

// Number of arrangements of n a-values and m b-values for every U in [0, n*m].
std::vector<double> mann_whitney_counts(std::size_t n, std::size_t m) {
  // table[i][j][u] built one row of i at a time: f(i, j, u) = f(i-1, j, u-j) + f(i, j-1, u).
  const std::size_t umax = n * m;
  std::vector<std::vector<double>> prev(m + 1, std::vector<double>(umax + 1, 0.0));
  for (std::size_t j = 0; j <= m; ++j) prev[j][0] = 1.0;  // i = 0
  for (std::size_t i = 1; i <= n; ++i) {
    std::vector<std::vector<double>> cur(m + 1, std::vector<double>(umax + 1, 0.0));
    cur[0][0] = 1.0;
    for (std::size_t j = 1; j <= m; ++j)
      for (std::size_t u = 0; u <= i * j; ++u) {
        double v = cur[j - 1][u];
        if (u >= j) v += prev[j][u - j];
        cur[j][u] = v;
      }
    prev = std::move(cur);
  }
  return prev[m];
}

TestResult welch(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2)
    throw Error(ErrorCode::InsufficientSamples, "Welch t-test needs at least two observations per sample");
  TestResult r;
  r.method = TestMethod::welch_t;
  r.n_a = a.size();
  r.n_b = b.size();
  const double ma = mean_of(a), mb = mean_of(b);
  const double qa = variance_of(a, ma) / static_cast<double>(a.size());
  const double qb = variance_of(b, mb) / static_cast<double>(b.size());
  const double se2 = qa + qb;
  if (se2 == 0.0) {
    r.degenerate = true;
    if (ma == mb) {
      r.statistic = 0.0;
      r.p_value = 1.0;
    } else {
      r.statistic = ma > mb ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
      r.p_value = 0.0;
    }
    return r;
  }
  r.statistic = (ma - mb) / std::sqrt(se2);
  r.df = se2 * se2 /
         (qa * qa / static_cast<double>(a.size() - 1) + qb * qb / static_cast<double>(b.size() - 1));
  const boost::math::students_t dist(r.df);
  r.p_value = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(r.statistic))));
  return r;
}

TestResult mann_whitney(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty())
    throw Error(ErrorCode::InsufficientSamples, "Mann-Whitney U needs at least one observation per sample");
  TestResult r;
  r.method = TestMethod::mann_whitney_u;
  r.n_a = a.size();
  r.n_b = b.size();
  const std::size_t n = a.size(), m = b.size(), total = n + m;

  // Midranks over the pooled sample.
  std::vector<std::pair<double, std::size_t>> pooled;
  pooled.reserve(total);
  for (std::size_t i = 0; i < n; ++i) pooled.emplace_back(a[i], i);
  for (std::size_t j = 0; j < m; ++j) pooled.emplace_back(b[j], n + j);
  std::sort(pooled.begin(), pooled.end());
  std::vector<double> rank(total);
  double tie_term = 0.0;
  bool ties = false;
  for (std::size_t i = 0; i < total;) {
    std::size_t j = i;
    while (j + 1 < total && pooled[j + 1].first == pooled[i].first) ++j;
    const double mid = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[pooled[k].second] = mid;
    const auto t = static_cast<double>(j - i + 1);
    if (j > i) ties = true;
    tie_term += t * t * t - t;
    i = j + 1;
  }
  double rank_sum_a = 0.0;
  for (std::size_t i = 0; i < n; ++i) rank_sum_a += rank[i];
  const double u = rank_sum_a - static_cast<double>(n) * static_cast<double>(n + 1) / 2.0;
  r.statistic = u;
  const double nm = static_cast<double>(n) * static_cast<double>(m);

  if (!ties && n * m <= 400) {
    r.exact = true;
    const auto counts = mann_whitney_counts(n, m);
    const double all = std::accumulate(counts.begin(), counts.end(), 0.0);
    const auto ui = static_cast<std::size_t>(std::llround(u));
    double lower = 0.0, upper = 0.0;
    for (std::size_t k = 0; k <= ui; ++k) lower += counts[k];
    for (std::size_t k = ui; k < counts.size(); ++k) upper += counts[k];
    r.p_value = std::min(1.0, 2.0 * std::min(lower, upper) / all);
    return r;
  }

  const auto N = static_cast<double>(total);
  const double var = nm / 12.0 * ((N + 1.0) - tie_term / (N * (N - 1.0)));
  if (!(var > 0.0)) {
    r.degenerate = true;
    r.p_value = 1.0;
    return r;
  }
  const double z = std::max(0.0, std::fabs(u - nm / 2.0) - 0.5) / std::sqrt(var);
  r.p_value = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
  return r;
}

}  // namespace

std::vector<double> resample_series(std::span<const double> values, std::size_t target_length) {
  if (values.empty()) throw Error(ErrorCode::EmptyInput, "cannot resample an empty series");
  if (target_length == 0) throw Error(ErrorCode::InvalidArgument, "target length must be positive");
  std::vector<double> out(target_length);
  const std::size_t n = values.size();
  if (n == 1 || target_length == 1) {
    std::fill(out.begin(), out.end(), values[0]);
    return out;
  }
  if (n == target_length) {
    std::copy(values.begin(), values.end(), out.begin());
    return out;
  }
  const double step = static_cast<double>(n - 1) / static_cast<double>(target_length - 1);
  for (std::size_t j = 0; j < target_length; ++j) {
    const double pos = static_cast<double>(j) * step;
    auto i = static_cast<std::size_t>(pos);
    if (i >= n - 1) {
      out[j] = values[n - 1];
      continue;
    }
    const double frac = pos - static_cast<double>(i);
    out[j] = values[i] + frac * (values[i + 1] - values[i]);
  }
  out.back() = values.back();
  return out;
}

double participant_mean(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::EmptyInput, "mean of an empty series");
  return mean_of(values);
}

std::vector<double> extract_signal(const AUFrameSeries& series, std::string_view signal,
                                   const std::vector<EmotionDefinition>& emotions) {
  if (const auto* def = lookup_emotion(emotions, signal)) return emotion_series(series, *def).values;
  const std::string au = canonical_au_id(signal);
  const auto col = series.column(au);
  if (!col) throw Error(ErrorCode::MissingColumn, series.participant_id + ": no column for " + au);
  std::vector<double> out(series.frame_count());
  for (std::size_t r = 0; r < out.size(); ++r) out[r] = series.values(static_cast<Eigen::Index>(r), *col);
  return out;
}

GroupCurve group_mean_curve(const Cohort& cohort, std::string_view signal, std::size_t target_length,
                            bool standardize, const std::vector<EmotionDefinition>& emotions) {
  const Groups groups = split_groups(cohort);
  auto resampled = [&](const std::vector<const Participant*>& members) {
    std::vector<std::vector<double>> out;
    out.reserve(members.size());
    for (const auto* p : members) out.push_back(resample_series(extract_signal(p->series, signal, emotions), target_length));
    return out;
  };
  auto a = resampled(groups.a);
  auto b = resampled(groups.b);
  if (standardize) {
    const Pooled pooled = pooled_stats(a, b);
    standardize_in_place(a, pooled);
    standardize_in_place(b, pooled);
  }

  GroupCurve curve;
  curve.signal_name = std::string(signal);
  curve.standardized = standardize;
  curve.n_a = a.size();
  curve.n_b = b.size();
  curve.t.resize(target_length);
  for (std::size_t j = 0; j < target_length; ++j)
    curve.t[j] = target_length == 1 ? 0.0 : static_cast<double>(j) / static_cast<double>(target_length - 1);

  auto summarize = [&](const std::vector<std::vector<double>>& group, std::vector<double>& mean,
                       std::vector<double>& sd) {
    mean.assign(target_length, 0.0);
    sd.assign(target_length, 0.0);
    std::vector<double> column(group.size());
    for (std::size_t j = 0; j < target_length; ++j) {
      for (std::size_t i = 0; i < group.size(); ++i) column[i] = group[i][j];
      mean[j] = mean_of(column);
      sd[j] = std::sqrt(variance_of(column, mean[j]));
    }
  };
  summarize(a, curve.mean_a, curve.sd_a);
  summarize(b, curve.mean_b, curve.sd_b);
  curve.overall_mean_a = mean_of(curve.mean_a);
  curve.overall_mean_b = mean_of(curve.mean_b);
  return curve;
}

std::string_view to_string(TestMethod method) {
  return method == TestMethod::welch_t ? "welch_t" : "mann_whitney_u";
}

TestResult two_sample_test(std::span<const double> a, std::span<const double> b, TestMethod method) {
  for (auto s : {a, b})
    for (double x : s)
      if (!std::isfinite(x)) throw Error(ErrorCode::InvalidArgument, "sample contains a non-finite value");
  return method == TestMethod::welch_t ? welch(a, b) : mann_whitney(a, b);
}

MeanIntensityTable mean_intensity_table(const Cohort& cohort, const std::vector<std::string>& signals,
                                        bool standardize, const std::vector<EmotionDefinition>& emotions) {
  const Groups groups = split_groups(cohort);
  MeanIntensityTable table;
  table.standardized = standardize;
  for (const auto& signal : signals) {
    auto frames = [&](const std::vector<const Participant*>& members) {
      std::vector<std::vector<double>> out;
      out.reserve(members.size());
      for (const auto* p : members) {
        out.push_back(extract_signal(p->series, signal, emotions));
        if (out.back().empty())
          throw Error(ErrorCode::EmptyInput, p->series.participant_id + ": empty " + signal + " series");
      }
      return out;
    };
    auto a = frames(groups.a);
    auto b = frames(groups.b);
    if (standardize) {
      const Pooled pooled = pooled_stats(a, b);
      standardize_in_place(a, pooled);
      standardize_in_place(b, pooled);
    }
    std::vector<double> means_a, means_b;
    for (const auto& v : a) means_a.push_back(participant_mean(v));
    for (const auto& v : b) means_b.push_back(participant_mean(v));

    MeanIntensityRow row;
    row.signal = signal;
    row.depressed_mean = mean_of(means_a);
    row.healthy_mean = mean_of(means_b);
    row.difference = row.depressed_mean - row.healthy_mean;
    row.mann_whitney = two_sample_test(means_a, means_b, TestMethod::mann_whitney_u);
    if (means_a.size() >= 2 && means_b.size() >= 2) {
      row.welch = two_sample_test(means_a, means_b, TestMethod::welch_t);
    } else {
      row.welch.p_value = std::numeric_limits<double>::quiet_NaN();
      row.welch.statistic = std::numeric_limits<double>::quiet_NaN();
      row.welch.n_a = means_a.size();
      row.welch.n_b = means_b.size();
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string to_csv(const MeanIntensityTable& table) {
  std::string out = "signal,depressed,healthy,difference,p_welch,p_mwu\n";
  for (const auto& r : table.rows)
    out += r.signal + "," + number(r.depressed_mean) + "," + number(r.healthy_mean) + "," + number(r.difference) +
           "," + number(r.welch.p_value) + "," + number(r.mann_whitney.p_value) + "\n";
  return out;
}

std::string to_wide_csv(const MeanIntensityTable& table, int decimals) {
  std::string out = "Action Units";
  for (const auto& r : table.rows) out += "," + r.signal;
  out += "\n";
  auto line = [&](const char* name, auto field) {
    out += name;
    for (const auto& r : table.rows) out += "," + fixed(field(r), decimals);
    out += "\n";
  };
  line("Depressed", [](const MeanIntensityRow& r) { return r.depressed_mean; });
  line("Healthy", [](const MeanIntensityRow& r) { return r.healthy_mean; });
  line("Difference", [](const MeanIntensityRow& r) { return r.difference; });
  return out;
}

std::string to_csv(const GroupCurve& curve) {
  std::string out = "t,mean_a,sd_a,mean_b,sd_b\n";
  for (std::size_t j = 0; j < curve.t.size(); ++j)
    out += number(curve.t[j]) + "," + number(curve.mean_a[j]) + "," + number(curve.sd_a[j]) + "," +
           number(curve.mean_b[j]) + "," + number(curve.sd_b[j]) + "\n";
  return out;
}

}  // namespace aukit
