#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace aukit {

// ---------------------------------------------------------------------------
// Scaling

enum class ScaleMode { none, minmax, zscore };

std::string_view to_string(ScaleMode mode);
ScaleMode parse_scale_mode(std::string_view text);

/// Per-feature affine map fitted on training rows: x' = (x - offset) / denom.
/// Constant training features (denom == 0) map to 0 everywhere.
struct Scaler {
  ScaleMode mode = ScaleMode::none;
  Eigen::RowVectorXd offset;
  Eigen::RowVectorXd denom;

  static Scaler fit(const Eigen::MatrixXd& train, ScaleMode mode);
  Eigen::MatrixXd apply(const Eigen::MatrixXd& data) const;
};

struct ScaledPair {
  Eigen::MatrixXd train;
  Eigen::MatrixXd test;
  Scaler scaler;
};

ScaledPair scale_features(const Eigen::MatrixXd& train, const Eigen::MatrixXd& test, ScaleMode mode);

// ---------------------------------------------------------------------------
// Splitting

enum class SplitMode { random, stratified };

std::string_view to_string(SplitMode mode);
SplitMode parse_split_mode(std::string_view text);

/// Disjoint, exhaustive index sets, each in ascending order.
struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Stratified mode takes round(test_frac * n_c) test samples from each
/// class c, so class proportions hold to within one sample.
Split stratified_split(std::span<const int> labels, double test_frac, std::uint64_t seed, SplitMode mode);

// ---------------------------------------------------------------------------
// Random convolutional kernels

struct RocketKernel {
  std::vector<double> weights;
  double bias = 0.0;
  int dilation = 1;
  bool padding = false;
  int channel = 0;  // which input_length-long segment of a concatenated series
};

/// A frozen bank of random kernels. Multichannel inputs are the channels
/// concatenated end to end; every kernel reads a single channel segment.
struct RocketTransform {
  std::vector<RocketKernel> kernels;
  int input_length = 0;  // per channel
  int num_channels = 1;
  std::uint64_t seed = 0;

  std::size_t num_kernels() const { return kernels.size(); }
  std::size_t feature_count() const { return 2 * kernels.size(); }
  std::size_t series_length() const { return static_cast<std::size_t>(input_length) * num_channels; }
};

/// Kernel lengths are drawn from {7, 9, 11} (those not exceeding
/// input_length), weights from N(0, 1) then mean-centred, bias from
/// U(-1, 1), dilation 2^x with x ~ U(0, log2((L - 1) / (len - 1))), and
/// padding with probability 1/2.
RocketTransform rocket_init(int num_kernels, int input_length, std::uint64_t seed, int num_channels = 1);

/// PPV (fraction of outputs above zero) and max of one dilated convolution.
std::pair<double, double> apply_kernel(const RocketKernel& kernel, std::span<const double> segment);

/// samples x (2 * num_kernels); columns alternate PPV and max per kernel.
Eigen::MatrixXd rocket_apply(const RocketTransform& transform, const std::vector<std::vector<double>>& series,
                             unsigned threads = 1);

// ---------------------------------------------------------------------------
// Linear classifiers. Labels are 1 (positive, Depressed) or 0.

enum class ModelKind { ridge_cv, logistic };

std::string_view to_string(ModelKind kind);

struct LinearModel {
  Eigen::VectorXd weights;
  double intercept = 0.0;
  ModelKind kind = ModelKind::logistic;
  Scaler scaler;
  double chosen_alpha = 0.0;          // ridge_cv only
  std::vector<double> alpha_scores;   // leave-one-out mean squared error per alpha
  std::vector<double> loss_history;   // logistic only, one entry per accepted step
  double final_learning_rate = 0.0;

  /// Raw (unscaled) features in, linear decision values out.
  Eigen::VectorXd decision_function(const Eigen::MatrixXd& features) const;
};

struct TrainOptions {
  ScaleMode scale = ScaleMode::zscore;
  bool fit_intercept = true;
};

std::vector<double> default_ridge_alphas();

/// Regularized least squares on +/-1 targets, alpha picked by the exact
/// leave-one-out residuals from the hat-matrix diagonal.
LinearModel ridge_cv_train(const Eigen::MatrixXd& features, std::span<const int> labels,
                           std::span<const double> alphas, const TrainOptions& options = {});

/// Mean negative log-likelihood plus (l2 / 2) * |w|^2; the intercept is
/// not penalized.
struct LogisticObjective {
  const Eigen::MatrixXd& x;
  Eigen::VectorXd y;  // 0 / 1
  double l2 = 0.0;

  LogisticObjective(const Eigen::MatrixXd& features, std::span<const int> labels, double l2_penalty);
  double loss(const Eigen::VectorXd& w, double b) const;
  void gradient(const Eigen::VectorXd& w, double b, Eigen::VectorXd& grad_w, double& grad_b) const;
};

struct LogisticOptions {
  double l2 = 1e-2;
  double learning_rate = 1.0;
  int epochs = 300;
  double tol = 1e-10;  // relative loss decrease below which training stops
};

/// Full-batch gradient descent; a step that raises the loss is retried at
/// half the learning rate, so the loss history never increases.
LinearModel logistic_train(const Eigen::MatrixXd& features, std::span<const int> labels,
                           const LogisticOptions& options = {}, const TrainOptions& train_options = {});

/// {p(class 0), p(class 1)} through the logistic link. Both lie strictly
/// inside (0, 1) and sum to exactly 1.
std::pair<double, double> class_probabilities(double decision);

struct EvalReport {
  double accuracy = 0.0;
  std::vector<std::pair<int, double>> per_true_class_probabilities;  // (true label, p positive)
  std::vector<int> predictions;
  std::array<std::array<int, 2>, 2> confusion{};  // [true][predicted]
  bool calibrated = true;  // false for ridge: probabilities are a squashed decision value
};

EvalReport evaluate_features(const LinearModel& model, const Eigen::MatrixXd& features, std::span<const int> labels);
EvalReport evaluate(const LinearModel& model, const RocketTransform& transform,
                    const std::vector<std::vector<double>>& series, std::span<const int> labels,
                    unsigned threads = 1);

}  // namespace aukit
