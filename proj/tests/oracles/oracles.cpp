#include "oracles/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>

namespace oracle {

double distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

double silhouette(const Points& points, const std::vector<int>& labels) {
  const std::size_t n = points.size();
  std::map<int, int> size;
  for (int l : labels) ++size[l];
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (size[labels[i]] == 1) continue;  // singleton: s = 0
    std::map<int, double> sum;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) sum[labels[j]] += distance(points[i], points[j]);
    const double a = sum[labels[i]] / (size[labels[i]] - 1);
    double b = INFINITY;
    for (const auto& [label, count] : size)
      if (label != labels[i]) b = std::min(b, sum[label] / count);
    const double m = std::max(a, b);
    total += m > 0 ? (b - a) / m : 0.0;
  }
  return total / static_cast<double>(n);
}

EigenPair jacobi_eigen(Matrix a) {
  const std::size_t n = a.size();
  Matrix v(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) v[i][i] = 1.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k][p], vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a[x][x] > a[y][y]; });
  EigenPair out;
  for (std::size_t k : order) {
    out.values.push_back(a[k][k]);
    std::vector<double> col(n);
    for (std::size_t i = 0; i < n; ++i) col[i] = v[i][k];
    out.vectors.push_back(col);
  }
  return out;
}

Matrix covariance(const Matrix& rows) {
  const std::size_t n = rows.size(), d = rows[0].size();
  std::vector<double> mean(d, 0.0);
  for (const auto& r : rows)
    for (std::size_t j = 0; j < d; ++j) mean[j] += r[j] / static_cast<double>(n);
  Matrix c(d, std::vector<double>(d, 0.0));
  for (const auto& r : rows)
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) c[i][j] += (r[i] - mean[i]) * (r[j] - mean[j]) / static_cast<double>(n - 1);
  return c;
}

std::vector<int> average_linkage(const Points& points, int k) {
  std::vector<std::vector<std::size_t>> clusters;
  for (std::size_t i = 0; i < points.size(); ++i) clusters.push_back({i});
  while (static_cast<int>(clusters.size()) > k) {
    double best = INFINITY;
    std::size_t bi = 0, bj = 1;
    for (std::size_t i = 0; i < clusters.size(); ++i) {
      for (std::size_t j = i + 1; j < clusters.size(); ++j) {
        double sum = 0.0;
        for (std::size_t p : clusters[i])
          for (std::size_t q : clusters[j]) sum += distance(points[p], points[q]);
        const double avg = sum / static_cast<double>(clusters[i].size() * clusters[j].size());
        if (avg < best) {
          best = avg;
          bi = i;
          bj = j;
        }
      }
    }
    clusters[bi].insert(clusters[bi].end(), clusters[bj].begin(), clusters[bj].end());
    clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(bj));
  }
  std::vector<int> labels(points.size());
  for (const auto& c : clusters) {
    const auto first = *std::min_element(c.begin(), c.end());
    for (std::size_t p : c) labels[p] = static_cast<int>(first);
  }
  return labels;
}

std::vector<int> canonical_partition(const std::vector<int>& labels) {
  std::map<int, int> first;
  std::vector<int> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    first.emplace(labels[i], static_cast<int>(i));
    out[i] = first[labels[i]];
  }
  return out;
}

double welch_t(const std::vector<double>& a, const std::vector<double>& b) {
  auto moments = [](const std::vector<double>& x) {
    double m = 0.0;
    for (double v : x) m += v;
    m /= static_cast<double>(x.size());
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return std::pair{m, s / static_cast<double>(x.size() - 1)};
  };
  const auto [ma, va] = moments(a);
  const auto [mb, vb] = moments(b);
  return (ma - mb) / std::sqrt(va / static_cast<double>(a.size()) + vb / static_cast<double>(b.size()));
}

double welch_permutation_p(const std::vector<double>& a, const std::vector<double>& b, int permutations,
                           std::uint64_t seed) {
  const double observed = std::abs(welch_t(a, b));
  std::vector<double> pooled = a;
  pooled.insert(pooled.end(), b.begin(), b.end());
  std::mt19937_64 rng(seed);
  int extreme = 0;
  for (int r = 0; r < permutations; ++r) {
    std::shuffle(pooled.begin(), pooled.end(), rng);
    const std::vector<double> x(pooled.begin(), pooled.begin() + static_cast<std::ptrdiff_t>(a.size()));
    const std::vector<double> y(pooled.begin() + static_cast<std::ptrdiff_t>(a.size()), pooled.end());
    if (std::abs(welch_t(x, y)) >= observed - 1e-12) ++extreme;
  }
  return static_cast<double>(extreme) / permutations;
}

double mann_whitney_enumeration_p(const std::vector<double>& a, const std::vector<double>& b) {
  auto u_of = [](const std::vector<double>& x, const std::vector<double>& y) {
    double u = 0.0;
    for (double p : x)
      for (double q : y) u += p > q ? 1.0 : (p == q ? 0.5 : 0.0);
    return u;
  };
  const double observed = u_of(a, b);
  std::vector<double> pooled = a;
  pooled.insert(pooled.end(), b.begin(), b.end());
  const std::size_t n = pooled.size(), m = a.size();
  std::vector<bool> pick(n, false);
  std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(m), true);
  long total = 0, low = 0, high = 0;
  do {
    std::vector<double> x, y;
    for (std::size_t i = 0; i < n; ++i) (pick[i] ? x : y).push_back(pooled[i]);
    const double u = u_of(x, y);
    ++total;
    if (u <= observed) ++low;
    if (u >= observed) ++high;
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return std::min(1.0, 2.0 * static_cast<double>(std::min(low, high)) / static_cast<double>(total));
}

std::vector<double> solve(Matrix a, std::vector<double> b) {
  const std::size_t n = a.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t pivot = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[pivot][c])) pivot = r;
    if (std::abs(a[pivot][c]) < 1e-300) throw std::runtime_error("singular system");
    std::swap(a[c], a[pivot]);
    std::swap(b[c], b[pivot]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a[i][k] * x[k];
    x[i] = s / a[i][i];
  }
  return x;
}

RidgeFit ridge(const Matrix& x, const std::vector<int>& labels, double alpha) {
  const std::size_t n = x.size(), d = x[0].size();
  // Append a column of ones and leave its coefficient unpenalized.
  Matrix lhs(d + 1, std::vector<double>(d + 1, 0.0));
  std::vector<double> rhs(d + 1, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    std::vector<double> row = x[r];
    row.push_back(1.0);
    const double y = labels[r] == 1 ? 1.0 : -1.0;
    for (std::size_t i = 0; i <= d; ++i) {
      rhs[i] += row[i] * y;
      for (std::size_t j = 0; j <= d; ++j) lhs[i][j] += row[i] * row[j];
    }
  }
  for (std::size_t i = 0; i < d; ++i) lhs[i][i] += alpha;
  auto w = solve(lhs, rhs);
  RidgeFit fit;
  fit.intercept = w.back();
  w.pop_back();
  fit.weights = w;
  return fit;
}

double ridge_loo_mse(const Matrix& x, const std::vector<int>& labels, double alpha) {
  double total = 0.0;
  for (std::size_t leave = 0; leave < x.size(); ++leave) {
    Matrix xs;
    std::vector<int> ys;
    for (std::size_t r = 0; r < x.size(); ++r)
      if (r != leave) {
        xs.push_back(x[r]);
        ys.push_back(labels[r]);
      }
    const auto fit = ridge(xs, ys, alpha);
    double pred = fit.intercept;
    for (std::size_t j = 0; j < fit.weights.size(); ++j) pred += fit.weights[j] * x[leave][j];
    const double y = labels[leave] == 1 ? 1.0 : -1.0;
    total += (y - pred) * (y - pred);
  }
  return total / static_cast<double>(x.size());
}

}  // namespace oracle
