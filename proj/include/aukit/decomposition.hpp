#pragma once

#include <span>
#include <string>

#include <Eigen/Dense>

namespace aukit {

/// Principal components of a sample x feature matrix. Components are the
/// rows of `components`, ordered by decreasing explained variance, with
/// the largest-magnitude entry of each one positive.
struct PCAModel {
  Eigen::VectorXd mean;
  Eigen::MatrixXd components;  // component_count x feature_count
  Eigen::VectorXd explained_variance;
  Eigen::VectorXd explained_variance_ratio;
  Eigen::Index n_samples = 0;
  bool degenerate = false;  // every sample identical; ratios are all zero

  Eigen::Index component_count() const { return components.rows(); }
  Eigen::Index feature_count() const { return components.cols(); }
};

/// Fits on the centered data through a thin SVD; sample covariance uses
/// the 1/(n-1) convention. Keeps min(samples, features) components.
PCAModel fit_pca(const Eigen::MatrixXd& data);

/// Projects centered rows onto the first k components.
Eigen::MatrixXd pca_transform(const PCAModel& model, const Eigen::MatrixXd& data, Eigen::Index k);

/// scores * components + mean for the first scores.cols() components.
Eigen::MatrixXd pca_inverse_transform(const PCAModel& model, const Eigen::MatrixXd& scores);

/// Smallest k whose cumulative ratio reaches threshold (in (0, 1]).
Eigen::Index components_for_variance(std::span<const double> ratios, double threshold);
Eigen::Index components_for_variance(const PCAModel& model, double threshold);

/// component_index,ratio,cumulative_ratio (1-based indices).
std::string variance_csv(const PCAModel& model);

}  // namespace aukit
