#include "aukit/decomposition.hpp"

#include <charconv>
#include <cmath>

#include "aukit/errors.hpp"

namespace aukit {

namespace {

// Cumulative sums may land a few ulps short of 1 for the full spectrum.
constexpr double kCumulativeSlack = 1e-12;

std::string number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

PCAModel fit_pca(const Eigen::MatrixXd& data) {
  if (data.rows() < 2) throw Error(ErrorCode::InsufficientSamples, "PCA needs at least two samples");
  if (data.cols() < 1) throw Error(ErrorCode::DimensionMismatch, "PCA needs at least one feature");
  if (!data.allFinite()) throw Error(ErrorCode::InvalidArgument, "PCA input contains non-finite values");

  PCAModel model;
  model.n_samples = data.rows();
  model.mean = data.colwise().mean().transpose();
  const Eigen::MatrixXd centered = data.rowwise() - model.mean.transpose();
  const Eigen::Index rank = std::min(data.rows(), data.cols());

  Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  model.components = svd.matrixV().leftCols(rank).transpose();
  model.explained_variance = sv.head(rank).array().square() / static_cast<double>(data.rows() - 1);

  for (Eigen::Index i = 0; i < rank; ++i) {
    Eigen::Index argmax = 0;
    model.components.row(i).cwiseAbs().maxCoeff(&argmax);
    if (model.components(i, argmax) < 0.0) model.components.row(i) *= -1.0;
  }

  const double total = model.explained_variance.sum();
  if (total > 0.0) {
    model.explained_variance_ratio = model.explained_variance / total;
  } else {
    model.degenerate = true;
    model.explained_variance.setZero();
    model.explained_variance_ratio = Eigen::VectorXd::Zero(rank);
    model.components = Eigen::MatrixXd::Identity(rank, data.cols());
  }
  return model;
}

Eigen::MatrixXd pca_transform(const PCAModel& model, const Eigen::MatrixXd& data, Eigen::Index k) {
  if (data.cols() != model.feature_count())
    throw Error(ErrorCode::DimensionMismatch, "expected " + std::to_string(model.feature_count()) +
                                                  " features, got " + std::to_string(data.cols()));
  if (k < 1 || k > model.component_count())
    throw Error(ErrorCode::KOutOfRange, "k = " + std::to_string(k) + " outside [1, " +
                                            std::to_string(model.component_count()) + "]");
  return (data.rowwise() - model.mean.transpose()) * model.components.topRows(k).transpose();
}

Eigen::MatrixXd pca_inverse_transform(const PCAModel& model, const Eigen::MatrixXd& scores) {
  const Eigen::Index k = scores.cols();
  if (k < 1 || k > model.component_count())
    throw Error(ErrorCode::KOutOfRange, "score width outside the fitted component count");
  return (scores * model.components.topRows(k)).rowwise() + model.mean.transpose();
}

Eigen::Index components_for_variance(std::span<const double> ratios, double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "variance threshold must lie in (0, 1]");
  if (ratios.empty()) throw Error(ErrorCode::EmptyInput, "no explained-variance ratios");
  double cumulative = 0.0;
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    cumulative += ratios[i];
    if (cumulative >= threshold - kCumulativeSlack) return static_cast<Eigen::Index>(i + 1);
  }
  return static_cast<Eigen::Index>(ratios.size());
}

Eigen::Index components_for_variance(const PCAModel& model, double threshold) {
  const auto& r = model.explained_variance_ratio;
  return components_for_variance(std::span<const double>(r.data(), static_cast<std::size_t>(r.size())), threshold);
}

std::string variance_csv(const PCAModel& model) {
  std::string out = "component_index,ratio,cumulative_ratio\n";
  double cumulative = 0.0;
  for (Eigen::Index i = 0; i < model.explained_variance_ratio.size(); ++i) {
    cumulative += model.explained_variance_ratio(i);
    out += std::to_string(i + 1) + "," + number(model.explained_variance_ratio(i)) + "," + number(cumulative) + "\n";
  }
  return out;
}

}  // namespace aukit
