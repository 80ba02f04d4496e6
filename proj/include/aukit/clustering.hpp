#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace aukit {

struct MergeStep {
  Eigen::Index cluster_a = 0;  // ids < n are samples, n + s is the cluster made at step s
  Eigen::Index cluster_b = 0;
  double height = 0.0;
  Eigen::Index size = 0;
};

struct MixtureComponent {
  double weight = 0.0;
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

/// Output of every clustering routine. Fields that do not apply to the
/// algorithm that produced it stay empty.
struct ClusterResult {
  std::vector<int> labels;
  int k = 0;
  std::vector<Eigen::Index> cluster_sizes;
  bool has_empty_cluster = false;
  double silhouette = 0.0;  // NaN when fewer than two clusters are populated

  // k-means
  Eigen::MatrixXd centroids;
  double inertia = 0.0;
  std::vector<double> inertia_history;
  int iterations = 0;
  bool converged = false;

  // agglomerative: the full tree; labels come from its first n - k merges
  std::vector<MergeStep> merge_history;

  // Gaussian mixture
  std::vector<MixtureComponent> mixture;
  Eigen::MatrixXd responsibilities;  // samples x k
  std::vector<double> log_likelihood_history;  // total log-likelihood per EM step
};

struct KMeansOptions {
  int max_iter = 300;
  double tol = 1e-4;  // stop when every centroid moves less than this
};

/// Lloyd iterations from k-means++ seeding.
ClusterResult kmeans_fit(const Eigen::MatrixXd& data, int k, std::uint64_t seed, const KMeansOptions& options = {});

enum class Linkage { ward, average, complete };

std::string_view to_string(Linkage linkage);
Linkage parse_linkage(std::string_view text);

ClusterResult agglomerative_fit(const Eigen::MatrixXd& data, int k, Linkage linkage = Linkage::ward);

struct GmmOptions {
  int max_iter = 100;
  double tol = 1e-6;             // on the change in mean per-sample log-likelihood
  double regularization = 1e-6;  // added to every covariance diagonal
};

/// EM with full covariances, initialized from a k-means run with the same seed.
ClusterResult gmm_fit(const Eigen::MatrixXd& data, int k, std::uint64_t seed, const GmmOptions& options = {});

struct SilhouetteResult {
  double overall = 0.0;
  std::vector<double> per_sample;
};

/// Euclidean silhouette. Labels may be any integers; points in singleton
/// clusters score 0.
SilhouetteResult silhouette(const Eigen::MatrixXd& data, std::span<const int> labels);

double adjusted_rand_index(std::span<const int> a, std::span<const int> b);

/// participant_id,cluster
std::string labels_csv(const std::vector<std::string>& ids, std::span<const int> labels);

}  // namespace aukit
