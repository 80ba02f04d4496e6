#include "aukit/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>

#include "aukit/errors.hpp"

namespace aukit {

namespace {

constexpr double kMinComponentMass = 10.0 * std::numeric_limits<double>::epsilon();

void check_inputs(const Eigen::MatrixXd& data, int k) {
  if (data.rows() == 0 || data.cols() == 0) throw Error(ErrorCode::EmptyData, "no samples to cluster");
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "k must be at least 1");
  if (k > data.rows())
    throw Error(ErrorCode::KTooLarge,
                "k = " + std::to_string(k) + " exceeds the sample count " + std::to_string(data.rows()));
  if (!data.allFinite()) throw Error(ErrorCode::InvalidArgument, "data contains non-finite values");
}

void finish_labels(ClusterResult& r, const Eigen::MatrixXd& data) {
  r.cluster_sizes.assign(static_cast<std::size_t>(r.k), 0);
  for (int l : r.labels) ++r.cluster_sizes[static_cast<std::size_t>(l)];
  r.has_empty_cluster = std::any_of(r.cluster_sizes.begin(), r.cluster_sizes.end(), [](auto s) { return s == 0; });
  const auto populated = std::count_if(r.cluster_sizes.begin(), r.cluster_sizes.end(), [](auto s) { return s > 0; });
  r.silhouette = populated >= 2 ? silhouette(data, r.labels).overall : std::numeric_limits<double>::quiet_NaN();
}

// Nearest centroid for each row (ties go to the lower index); returns inertia.
double assign(const Eigen::MatrixXd& data, const Eigen::MatrixXd& centroids, std::vector<int>& labels) {
  double inertia = 0.0;
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    int best_c = 0;
    for (Eigen::Index c = 0; c < centroids.rows(); ++c) {
      const double d = (data.row(i) - centroids.row(c)).squaredNorm();
      if (d < best) {
        best = d;
        best_c = static_cast<int>(c);
      }
    }
    labels[static_cast<std::size_t>(i)] = best_c;
    inertia += best;
  }
  return inertia;
}

Eigen::MatrixXd kmeans_plus_plus(const Eigen::MatrixXd& data, int k, std::mt19937_64& rng) {
  const Eigen::Index n = data.rows();
  Eigen::MatrixXd centroids(k, data.cols());
  std::vector<bool> chosen(static_cast<std::size_t>(n), false);
  std::uniform_int_distribution<Eigen::Index> first(0, n - 1);
  Eigen::Index pick = first(rng);
  centroids.row(0) = data.row(pick);
  chosen[static_cast<std::size_t>(pick)] = true;

  Eigen::VectorXd dist2(n);
  for (Eigen::Index i = 0; i < n; ++i) dist2(i) = (data.row(i) - centroids.row(0)).squaredNorm();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int c = 1; c < k; ++c) {
    const double total = dist2.sum();
    if (total > 0.0) {
      const double target = unit(rng) * total;
      double acc = 0.0;
      pick = -1;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (dist2(i) <= 0.0) continue;
        acc += dist2(i);
        pick = i;
        if (acc >= target) break;
      }
    } else {
      // Every remaining point coincides with a centroid: draw among the unchosen.
      std::vector<Eigen::Index> rest;
      for (Eigen::Index i = 0; i < n; ++i)
        if (!chosen[static_cast<std::size_t>(i)]) rest.push_back(i);
      std::uniform_int_distribution<std::size_t> any(0, rest.size() - 1);
      pick = rest[any(rng)];
    }
    centroids.row(c) = data.row(pick);
    chosen[static_cast<std::size_t>(pick)] = true;
    for (Eigen::Index i = 0; i < n; ++i)
      dist2(i) = std::min(dist2(i), (data.row(i) - centroids.row(c)).squaredNorm());
  }
  return centroids;
}

double log_sum_exp(const Eigen::VectorXd& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

struct GaussianState {
  std::vector<MixtureComponent> components;
};

// Log-density of every row under every component: samples x k.
Eigen::MatrixXd log_densities(const Eigen::MatrixXd& data, const GaussianState& state) {
  const Eigen::Index n = data.rows(), d = data.cols();
  const auto k = static_cast<Eigen::Index>(state.components.size());
  Eigen::MatrixXd out(n, k);
  const double log_2pi = std::log(2.0 * M_PI);
  for (Eigen::Index c = 0; c < k; ++c) {
    const auto& comp = state.components[static_cast<std::size_t>(c)];
    Eigen::LLT<Eigen::MatrixXd> llt(comp.covariance);
    if (llt.info() != Eigen::Success)
      throw Error(ErrorCode::SingularCovariance, "component " + std::to_string(c) + " covariance is not positive definite");
    const Eigen::MatrixXd L = llt.matrixL();
    const double log_det = 2.0 * L.diagonal().array().log().sum();
    if (!std::isfinite(log_det))
      throw Error(ErrorCode::SingularCovariance, "component " + std::to_string(c) + " covariance is singular");
    const Eigen::MatrixXd diff = (data.rowwise() - comp.mean.transpose()).transpose();
    const Eigen::MatrixXd z = L.triangularView<Eigen::Lower>().solve(diff);
    const Eigen::VectorXd maha = z.colwise().squaredNorm().transpose();
    const double log_w = comp.weight > 0.0 ? std::log(comp.weight) : -std::numeric_limits<double>::infinity();
    out.col(c) = (-0.5 * (static_cast<double>(d) * log_2pi + log_det) + log_w) - 0.5 * maha.array();
  }
  return out;
}

GaussianState m_step(const Eigen::MatrixXd& data, const Eigen::MatrixXd& resp, const GaussianState& previous,
                     double reg) {
  const Eigen::Index d = data.cols();
  GaussianState next;
  next.components.resize(static_cast<std::size_t>(resp.cols()));
  double mass_total = 0.0;
  for (Eigen::Index c = 0; c < resp.cols(); ++c) {
    auto& comp = next.components[static_cast<std::size_t>(c)];
    const double mass = resp.col(c).sum();
    if (mass < kMinComponentMass) {
      comp.weight = kMinComponentMass;
      comp.mean = previous.components[static_cast<std::size_t>(c)].mean;
      comp.covariance = reg * Eigen::MatrixXd::Identity(d, d);
    } else {
      comp.weight = mass;
      comp.mean = (data.transpose() * resp.col(c)) / mass;
      const Eigen::MatrixXd diff = data.rowwise() - comp.mean.transpose();
      comp.covariance = (diff.transpose() * resp.col(c).asDiagonal() * diff) / mass;
      comp.covariance.diagonal().array() += reg;
    }
    mass_total += comp.weight;
  }
  for (auto& comp : next.components) comp.weight /= mass_total;
  return next;
}

}  // namespace

ClusterResult kmeans_fit(const Eigen::MatrixXd& data, int k, std::uint64_t seed, const KMeansOptions& options) {
  check_inputs(data, k);
  if (options.max_iter < 1) throw Error(ErrorCode::InvalidArgument, "max_iter must be at least 1");
  if (!(options.tol >= 0.0)) throw Error(ErrorCode::InvalidArgument, "tol must be non-negative");

  std::mt19937_64 rng(seed);
  ClusterResult r;
  r.k = k;
  r.centroids = kmeans_plus_plus(data, k, rng);
  r.labels.assign(static_cast<std::size_t>(data.rows()), 0);

  for (int it = 0; it < options.max_iter; ++it) {
    r.inertia_history.push_back(assign(data, r.centroids, r.labels));
    r.iterations = it + 1;

    Eigen::MatrixXd next = Eigen::MatrixXd::Zero(k, data.cols());
    std::vector<Eigen::Index> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
      const int l = r.labels[static_cast<std::size_t>(i)];
      next.row(l) += data.row(i);
      ++counts[static_cast<std::size_t>(l)];
    }
    double shift = 0.0;
    for (int c = 0; c < k; ++c) {
      // An empty cluster keeps its centroid, which cannot raise the inertia.
      if (counts[static_cast<std::size_t>(c)] == 0) {
        next.row(c) = r.centroids.row(c);
      } else {
        next.row(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);
      }
      shift = std::max(shift, (next.row(c) - r.centroids.row(c)).norm());
    }
    r.centroids = std::move(next);
    if (shift <= options.tol) {
      r.converged = true;
      break;
    }
  }
  // Labels consistent with the final centroids.
  r.inertia = assign(data, r.centroids, r.labels);
  r.inertia_history.push_back(r.inertia);
  finish_labels(r, data);
  return r;
}

std::string_view to_string(Linkage linkage) {
  switch (linkage) {
    case Linkage::ward: return "ward";
    case Linkage::average: return "average";
    case Linkage::complete: return "complete";
  }
  return "ward";
}

Linkage parse_linkage(std::string_view text) {
  if (text == "ward") return Linkage::ward;
  if (text == "average") return Linkage::average;
  if (text == "complete") return Linkage::complete;
  throw Error(ErrorCode::InvalidArgument, "unknown linkage '" + std::string(text) + "'");
}

ClusterResult agglomerative_fit(const Eigen::MatrixXd& data, int k, Linkage linkage) {
  check_inputs(data, k);
  const Eigen::Index n = data.rows();
  Eigen::MatrixXd dist(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    dist(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < n; ++j) dist(i, j) = dist(j, i) = (data.row(i) - data.row(j)).norm();
  }

  // Slot i holds cluster id[i] of size[i]; merged slots are deactivated.
  std::vector<Eigen::Index> id(static_cast<std::size_t>(n)), size(static_cast<std::size_t>(n), 1);
  std::iota(id.begin(), id.end(), Eigen::Index{0});
  std::vector<bool> active(static_cast<std::size_t>(n), true);
  std::vector<Eigen::Index> parent(static_cast<std::size_t>(2 * n - 1));
  std::iota(parent.begin(), parent.end(), Eigen::Index{0});

  ClusterResult r;
  r.k = k;
  for (Eigen::Index step = 0; step + 1 < n; ++step) {
    double best = std::numeric_limits<double>::infinity();
    Eigen::Index bi = -1, bj = -1;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!active[static_cast<std::size_t>(i)]) continue;
      for (Eigen::Index j = i + 1; j < n; ++j) {
        if (!active[static_cast<std::size_t>(j)]) continue;
        if (dist(i, j) < best) {
          best = dist(i, j);
          bi = i;
          bj = j;
        }
      }
    }
    const auto si = static_cast<double>(size[static_cast<std::size_t>(bi)]);
    const auto sj = static_cast<double>(size[static_cast<std::size_t>(bj)]);
    for (Eigen::Index v = 0; v < n; ++v) {
      if (!active[static_cast<std::size_t>(v)] || v == bi || v == bj) continue;
      const double div = dist(bi, v), djv = dist(bj, v);
      double merged = 0.0;
      switch (linkage) {
        case Linkage::ward: {
          const auto sv = static_cast<double>(size[static_cast<std::size_t>(v)]);
          merged = std::sqrt(std::max(
              0.0, ((sv + si) * div * div + (sv + sj) * djv * djv - sv * best * best) / (si + sj + sv)));
          break;
        }
        case Linkage::average: merged = (si * div + sj * djv) / (si + sj); break;
        case Linkage::complete: merged = std::max(div, djv); break;
      }
      dist(bi, v) = dist(v, bi) = merged;
    }
    const Eigen::Index a = id[static_cast<std::size_t>(bi)], b = id[static_cast<std::size_t>(bj)];
    const Eigen::Index created = n + step;
    r.merge_history.push_back({std::min(a, b), std::max(a, b), best, size[static_cast<std::size_t>(bi)] +
                                                                         size[static_cast<std::size_t>(bj)]});
    if (step < n - k) {
      parent[static_cast<std::size_t>(a)] = created;
      parent[static_cast<std::size_t>(b)] = created;
    }
    id[static_cast<std::size_t>(bi)] = created;
    size[static_cast<std::size_t>(bi)] += size[static_cast<std::size_t>(bj)];
    active[static_cast<std::size_t>(bj)] = false;
  }

  // Root of each sample within the cut tree, labelled in order of first appearance.
  std::map<Eigen::Index, int> root_label;
  r.labels.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index root = i;
    while (parent[static_cast<std::size_t>(root)] != root) root = parent[static_cast<std::size_t>(root)];
    const auto [it, inserted] = root_label.try_emplace(root, static_cast<int>(root_label.size()));
    r.labels[static_cast<std::size_t>(i)] = it->second;
  }
  finish_labels(r, data);
  return r;
}

ClusterResult gmm_fit(const Eigen::MatrixXd& data, int k, std::uint64_t seed, const GmmOptions& options) {
  check_inputs(data, k);
  if (options.max_iter < 1) throw Error(ErrorCode::InvalidArgument, "max_iter must be at least 1");
  if (!(options.regularization >= 0.0)) throw Error(ErrorCode::InvalidArgument, "regularization must be non-negative");

  const Eigen::Index n = data.rows();
  const ClusterResult init = kmeans_fit(data, k, seed);
  Eigen::MatrixXd hard = Eigen::MatrixXd::Zero(n, k);
  for (Eigen::Index i = 0; i < n; ++i) hard(i, init.labels[static_cast<std::size_t>(i)]) = 1.0;
  GaussianState seed_state;
  for (int c = 0; c < k; ++c) seed_state.components.push_back({0.0, init.centroids.row(c).transpose(), {}});
  GaussianState state = m_step(data, hard, seed_state, options.regularization);

  ClusterResult r;
  r.k = k;
  Eigen::MatrixXd resp(n, k);
  double previous = 0.0;
  for (int it = 0; it < options.max_iter; ++it) {
    const Eigen::MatrixXd logp = log_densities(data, state);
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::VectorXd row = logp.row(i).transpose();
      const double lse = log_sum_exp(row);
      total += lse;
      resp.row(i) = (row.array() - lse).exp().transpose();
    }
    r.log_likelihood_history.push_back(total);
    r.iterations = it + 1;
    if (it > 0 && std::fabs(total - previous) / static_cast<double>(n) < options.tol) {
      r.converged = true;
      break;
    }
    previous = total;
    if (it + 1 < options.max_iter) state = m_step(data, resp, state, options.regularization);
  }

  r.mixture = state.components;
  r.responsibilities = resp;
  r.labels.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index best = 0;
    resp.row(i).maxCoeff(&best);
    r.labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  finish_labels(r, data);
  return r;
}

SilhouetteResult silhouette(const Eigen::MatrixXd& data, std::span<const int> labels) {
  const Eigen::Index n = data.rows();
  if (static_cast<Eigen::Index>(labels.size()) != n)
    throw Error(ErrorCode::DimensionMismatch, "one label per sample required");
  std::map<int, std::size_t> index;
  for (int l : labels) index.try_emplace(l, index.size());
  if (index.size() < 2) throw Error(ErrorCode::SingleCluster, "silhouette needs at least two clusters");

  const std::size_t m = index.size();
  std::vector<std::size_t> cluster(labels.size());
  std::vector<double> count(m, 0.0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    cluster[i] = index[labels[i]];
    count[cluster[i]] += 1.0;
  }

  SilhouetteResult out;
  out.per_sample.assign(static_cast<std::size_t>(n), 0.0);
  std::vector<double> sums(m);
  for (Eigen::Index i = 0; i < n; ++i) {
    std::fill(sums.begin(), sums.end(), 0.0);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      sums[cluster[static_cast<std::size_t>(j)]] += (data.row(i) - data.row(j)).norm();
    }
    const std::size_t own = cluster[static_cast<std::size_t>(i)];
    if (count[own] <= 1.0) continue;  // singleton: s(i) = 0
    const double a = sums[own] / (count[own] - 1.0);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < m; ++c)
      if (c != own) b = std::min(b, sums[c] / count[c]);
    const double denom = std::max(a, b);
    out.per_sample[static_cast<std::size_t>(i)] = denom > 0.0 ? (b - a) / denom : 0.0;
  }
  double total = 0.0;
  for (double s : out.per_sample) total += s;
  out.overall = total / static_cast<double>(n);
  return out;
}

double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::DimensionMismatch, "label vectors differ in length");
  const auto n = static_cast<double>(a.size());
  std::map<std::pair<int, int>, double> table;
  std::map<int, double> rows, cols;
  for (std::size_t i = 0; i < a.size(); ++i) {
    table[{a[i], b[i]}] += 1.0;
    rows[a[i]] += 1.0;
    cols[b[i]] += 1.0;
  }
  auto choose2 = [](double x) { return x * (x - 1.0) / 2.0; };
  double index = 0.0, sum_rows = 0.0, sum_cols = 0.0;
  for (const auto& [key, v] : table) index += choose2(v);
  for (const auto& [key, v] : rows) sum_rows += choose2(v);
  for (const auto& [key, v] : cols) sum_cols += choose2(v);
  const double expected = n > 1.0 ? sum_rows * sum_cols / choose2(n) : 0.0;
  const double max_index = 0.5 * (sum_rows + sum_cols);
  if (max_index == expected) return 1.0;  // both partitions trivial and identical in structure
  return (index - expected) / (max_index - expected);
}

std::string labels_csv(const std::vector<std::string>& ids, std::span<const int> labels) {
  if (ids.size() != labels.size()) throw Error(ErrorCode::DimensionMismatch, "one label per participant required");
  std::string out = "participant_id,cluster\n";
  for (std::size_t i = 0; i < ids.size(); ++i) out += ids[i] + "," + std::to_string(labels[i]) + "\n";
  return out;
}

}  // namespace aukit
