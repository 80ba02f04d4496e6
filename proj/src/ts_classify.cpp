#include "aukit/ts_classify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "aukit/errors.hpp"
#include "aukit/parallel.hpp"

namespace aukit {

namespace {

std::array<std::size_t, 2> class_counts(std::span<const int> labels) {
  std::array<std::size_t, 2> counts{0, 0};
  for (int l : labels) {
    if (l != 0 && l != 1) throw Error(ErrorCode::InvalidArgument, "labels must be 0 or 1");
    ++counts[static_cast<std::size_t>(l)];
  }
  return counts;
}

void check_training_set(const Eigen::MatrixXd& features, std::span<const int> labels) {
  if (static_cast<Eigen::Index>(labels.size()) != features.rows())
    throw Error(ErrorCode::DimensionMismatch, "one label per feature row required");
  if (!features.allFinite()) throw Error(ErrorCode::InvalidArgument, "features contain non-finite values");
  const auto counts = class_counts(labels);
  if (counts[0] == 0 || counts[1] == 0) throw Error(ErrorCode::SingleClass, "training labels contain one class");
  if (counts[0] < 2 || counts[1] < 2)
    throw Error(ErrorCode::InsufficientSamples, "each class needs at least two training samples");
}

double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

std::string_view to_string(ScaleMode mode) {
  switch (mode) {
    case ScaleMode::none: return "none";
    case ScaleMode::minmax: return "minmax";
    case ScaleMode::zscore: return "zscore";
  }
  return "none";
}

ScaleMode parse_scale_mode(std::string_view text) {
  if (text == "none") return ScaleMode::none;
  if (text == "minmax") return ScaleMode::minmax;
  if (text == "zscore") return ScaleMode::zscore;
  throw Error(ErrorCode::InvalidArgument, "unknown scale mode '" + std::string(text) + "'");
}

Scaler Scaler::fit(const Eigen::MatrixXd& train, ScaleMode mode) {
  if (train.rows() == 0) throw Error(ErrorCode::EmptyInput, "cannot fit a scaler on zero rows");
  Scaler s;
  s.mode = mode;
  const Eigen::Index d = train.cols();
  switch (mode) {
    case ScaleMode::none:
      s.offset = Eigen::RowVectorXd::Zero(d);
      s.denom = Eigen::RowVectorXd::Ones(d);
      break;
    case ScaleMode::minmax:
      s.offset = train.colwise().minCoeff();
      s.denom = train.colwise().maxCoeff() - s.offset;
      break;
    case ScaleMode::zscore: {
      s.offset = train.colwise().mean();
      const Eigen::MatrixXd centered = train.rowwise() - s.offset;
      s.denom = (centered.colwise().squaredNorm() / static_cast<double>(train.rows())).cwiseSqrt();
      // A rounded mean leaves a tiny spread on constant columns; force it to zero.
      const Eigen::RowVectorXd range = train.colwise().maxCoeff() - train.colwise().minCoeff();
      for (Eigen::Index c = 0; c < d; ++c)
        if (range(c) == 0.0) s.denom(c) = 0.0;
      break;
    }
  }
  return s;
}

Eigen::MatrixXd Scaler::apply(const Eigen::MatrixXd& data) const {
  if (data.cols() != offset.size())
    throw Error(ErrorCode::DimensionMismatch, "scaler fitted on " + std::to_string(offset.size()) +
                                                  " features, got " + std::to_string(data.cols()));
  Eigen::MatrixXd out(data.rows(), data.cols());
  for (Eigen::Index c = 0; c < data.cols(); ++c) {
    if (denom(c) > 0.0) {
      out.col(c) = (data.col(c).array() - offset(c)) / denom(c);
    } else {
      out.col(c).setZero();
    }
  }
  return out;
}

ScaledPair scale_features(const Eigen::MatrixXd& train, const Eigen::MatrixXd& test, ScaleMode mode) {
  if (test.cols() != train.cols())
    throw Error(ErrorCode::DimensionMismatch, "train has " + std::to_string(train.cols()) + " features, test has " +
                                                  std::to_string(test.cols()));
  ScaledPair out;
  out.scaler = Scaler::fit(train, mode);
  out.train = out.scaler.apply(train);
  out.test = out.scaler.apply(test);
  return out;
}

std::string_view to_string(SplitMode mode) { return mode == SplitMode::random ? "random" : "stratified"; }

SplitMode parse_split_mode(std::string_view text) {
  if (text == "random") return SplitMode::random;
  if (text == "stratified") return SplitMode::stratified;
  throw Error(ErrorCode::InvalidArgument, "unknown split mode '" + std::string(text) + "'");
}

Split stratified_split(std::span<const int> labels, double test_frac, std::uint64_t seed, SplitMode mode) {
  if (!(test_frac > 0.0 && test_frac < 1.0))
    throw Error(ErrorCode::BadFraction, "test fraction must lie strictly between 0 and 1");
  if (labels.size() < 2) throw Error(ErrorCode::BadFraction, "at least two samples are needed to split");
  std::mt19937_64 rng(seed);
  Split split;

  if (mode == SplitMode::random) {
    std::vector<std::size_t> order(labels.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    const auto n = static_cast<double>(labels.size());
    const auto n_test = std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(test_frac * n)), 1,
                                                labels.size() - 1);
    split.test.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
    split.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
  } else {
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
    for (auto& [label, members] : by_class) {
      std::shuffle(members.begin(), members.end(), rng);
      const auto n_test = static_cast<std::size_t>(std::llround(test_frac * static_cast<double>(members.size())));
      if (n_test >= members.size())
        throw Error(ErrorCode::ClassTooSmall, "class " + std::to_string(label) + " has " +
                                                  std::to_string(members.size()) +
                                                  " samples; none would remain for training");
      split.test.insert(split.test.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_test));
      split.train.insert(split.train.end(), members.begin() + static_cast<std::ptrdiff_t>(n_test), members.end());
    }
    if (split.test.empty()) throw Error(ErrorCode::BadFraction, "test fraction selects no samples");
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

RocketTransform rocket_init(int num_kernels, int input_length, std::uint64_t seed, int num_channels) {
  if (num_kernels < 1) throw Error(ErrorCode::InvalidArgument, "num_kernels must be at least 1");
  if (num_channels < 1) throw Error(ErrorCode::InvalidArgument, "num_channels must be at least 1");
  if (input_length < 7)
    throw Error(ErrorCode::InputTooShort, "input length " + std::to_string(input_length) + " is below 7");

  std::vector<int> lengths;
  for (int len : {7, 9, 11})
    if (len <= input_length) lengths.push_back(len);

  RocketTransform t;
  t.input_length = input_length;
  t.num_channels = num_channels;
  t.seed = seed;
  t.kernels.reserve(static_cast<std::size_t>(num_kernels));

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick_length(0, lengths.size() - 1);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> bias(-1.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> pick_channel(0, num_channels - 1);
  for (int k = 0; k < num_kernels; ++k) {
    RocketKernel kernel;
    const int len = lengths[pick_length(rng)];
    kernel.weights.resize(static_cast<std::size_t>(len));
    double mean = 0.0;
    for (double& w : kernel.weights) {
      w = normal(rng);
      mean += w;
    }
    mean /= len;
    for (double& w : kernel.weights) w -= mean;
    kernel.bias = bias(rng);
    const int max_dilation = (input_length - 1) / (len - 1);
    const double max_exponent = std::log2(static_cast<double>(input_length - 1) / static_cast<double>(len - 1));
    const double dilation = std::pow(2.0, unit(rng) * max_exponent);
    kernel.dilation = std::clamp(static_cast<int>(dilation), 1, max_dilation);
    kernel.padding = unit(rng) < 0.5;
    kernel.channel = pick_channel(rng);
    t.kernels.push_back(std::move(kernel));
  }
  return t;
}

namespace {

std::pair<double, double> convolve(const RocketKernel& kernel, std::span<const double> x, std::vector<double>& out) {
  const auto length = static_cast<std::ptrdiff_t>(x.size());
  const auto taps = static_cast<std::ptrdiff_t>(kernel.weights.size());
  const std::ptrdiff_t span = (taps - 1) * kernel.dilation;
  const std::ptrdiff_t pad = kernel.padding ? span / 2 : 0;
  const std::ptrdiff_t out_len = length + 2 * pad - span;
  if (out_len <= 0) throw Error(ErrorCode::InputTooShort, "series shorter than the dilated kernel");

  out.assign(static_cast<std::size_t>(out_len), kernel.bias);
  // Tap-major accumulation: out[t] += w_j * x[t + j * dilation - pad] over the in-range t.
  for (std::ptrdiff_t j = 0; j < taps; ++j) {
    const double w = kernel.weights[static_cast<std::size_t>(j)];
    const std::ptrdiff_t offset = j * kernel.dilation - pad;
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, -offset);
    const std::ptrdiff_t hi = std::min(out_len, length - offset);
    double* o = out.data();
    const double* in = x.data() + offset;
    for (std::ptrdiff_t t = lo; t < hi; ++t) o[t] += w * in[t];
  }
  std::ptrdiff_t positive = 0;
  double max = -std::numeric_limits<double>::infinity();
  for (double v : out) {
    positive += v > 0.0;
    max = std::max(max, v);
  }
  return {static_cast<double>(positive) / static_cast<double>(out_len), max};
}

}  // namespace

std::pair<double, double> apply_kernel(const RocketKernel& kernel, std::span<const double> segment) {
  std::vector<double> scratch;
  return convolve(kernel, segment, scratch);
}

Eigen::MatrixXd rocket_apply(const RocketTransform& transform, const std::vector<std::vector<double>>& series,
                             unsigned threads) {
  const std::size_t expected = transform.series_length();
  for (std::size_t i = 0; i < series.size(); ++i)
    if (series[i].size() != expected)
      throw Error(ErrorCode::LengthMismatch, "series " + std::to_string(i) + " has length " +
                                                 std::to_string(series[i].size()) + ", transform expects " +
                                                 std::to_string(expected));
  Eigen::MatrixXd features(static_cast<Eigen::Index>(series.size()),
                           static_cast<Eigen::Index>(transform.feature_count()));
  parallel_for(series.size(), threads, [&](std::size_t i) {
    std::vector<double> scratch;
    const std::span<const double> full(series[i]);
    for (std::size_t k = 0; k < transform.kernels.size(); ++k) {
      const auto& kernel = transform.kernels[k];
      const auto segment =
          full.subspan(static_cast<std::size_t>(kernel.channel) * static_cast<std::size_t>(transform.input_length),
                       static_cast<std::size_t>(transform.input_length));
      const auto [ppv, max] = convolve(kernel, segment, scratch);
      features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(2 * k)) = ppv;
      features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(2 * k + 1)) = max;
    }
  });
  return features;
}

std::string_view to_string(ModelKind kind) { return kind == ModelKind::ridge_cv ? "ridge_cv" : "logistic"; }

Eigen::VectorXd LinearModel::decision_function(const Eigen::MatrixXd& features) const {
  if (features.cols() != weights.size())
    throw Error(ErrorCode::DimensionMismatch, "model expects " + std::to_string(weights.size()) + " features, got " +
                                                  std::to_string(features.cols()));
  return (scaler.apply(features) * weights).array() + intercept;
}

std::vector<double> default_ridge_alphas() {
  std::vector<double> alphas(10);
  for (int i = 0; i < 10; ++i) alphas[static_cast<std::size_t>(i)] = std::pow(10.0, -3.0 + 6.0 * i / 9.0);
  return alphas;
}

LinearModel ridge_cv_train(const Eigen::MatrixXd& features, std::span<const int> labels,
                           std::span<const double> alphas, const TrainOptions& options) {
  check_training_set(features, labels);
  if (alphas.empty()) throw Error(ErrorCode::InvalidArgument, "alpha grid is empty");
  for (double a : alphas)
    if (!(a > 0.0) || !std::isfinite(a)) throw Error(ErrorCode::InvalidArgument, "alphas must be positive");

  LinearModel model;
  model.kind = ModelKind::ridge_cv;
  model.scaler = Scaler::fit(features, options.scale);
  Eigen::MatrixXd x = model.scaler.apply(features);
  const Eigen::Index n = x.rows();
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) y(i) = labels[static_cast<std::size_t>(i)] == 1 ? 1.0 : -1.0;

  Eigen::RowVectorXd x_mean = Eigen::RowVectorXd::Zero(x.cols());
  double y_mean = 0.0;
  if (options.fit_intercept) {
    x_mean = x.colwise().mean();
    y_mean = y.mean();
    x.rowwise() -= x_mean;
    y.array() -= y_mean;
  }

  // Dual form through the n x n Gram matrix: cheap when features outnumber samples.
  const Eigen::MatrixXd gram = x * x.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  const Eigen::VectorXd lambda = eig.eigenvalues().cwiseMax(0.0);
  const Eigen::MatrixXd& q = eig.eigenvectors();
  const Eigen::VectorXd qty = q.transpose() * y;
  const Eigen::MatrixXd q2 = q.array().square().matrix();
  const double base_leverage = options.fit_intercept ? 1.0 / static_cast<double>(n) : 0.0;

  double best_score = std::numeric_limits<double>::infinity();
  for (double alpha : alphas) {
    const Eigen::VectorXd shrink = lambda.array() / (lambda.array() + alpha);
    const Eigen::VectorXd fitted = q * (shrink.array() * qty.array()).matrix();
    const Eigen::VectorXd leverage = (q2 * shrink).array() + base_leverage;
    const Eigen::VectorXd loo = (y - fitted).array() / (1.0 - leverage.array());
    const double score = loo.squaredNorm() / static_cast<double>(n);
    model.alpha_scores.push_back(score);
    if (score < best_score) {
      best_score = score;
      model.chosen_alpha = alpha;
    }
  }

  const Eigen::VectorXd dual = q * (qty.array() / (lambda.array() + model.chosen_alpha)).matrix();
  model.weights = x.transpose() * dual;
  model.intercept = options.fit_intercept ? y_mean - x_mean.dot(model.weights) : 0.0;
  return model;
}

LogisticObjective::LogisticObjective(const Eigen::MatrixXd& features, std::span<const int> labels, double l2_penalty)
    : x(features), y(features.rows()), l2(l2_penalty) {
  if (static_cast<Eigen::Index>(labels.size()) != features.rows())
    throw Error(ErrorCode::DimensionMismatch, "one label per feature row required");
  for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = labels[static_cast<std::size_t>(i)] == 1 ? 1.0 : 0.0;
}

double LogisticObjective::loss(const Eigen::VectorXd& w, double b) const {
  const Eigen::VectorXd z = (x * w).array() + b;
  double nll = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) nll += softplus(z(i)) - y(i) * z(i);
  return nll / static_cast<double>(z.size()) + 0.5 * l2 * w.squaredNorm();
}

void LogisticObjective::gradient(const Eigen::VectorXd& w, double b, Eigen::VectorXd& grad_w, double& grad_b) const {
  const Eigen::VectorXd z = (x * w).array() + b;
  Eigen::VectorXd residual(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) residual(i) = sigmoid(z(i)) - y(i);
  const auto n = static_cast<double>(z.size());
  grad_w = x.transpose() * residual / n + l2 * w;
  grad_b = residual.sum() / n;
}

LinearModel logistic_train(const Eigen::MatrixXd& features, std::span<const int> labels,
                           const LogisticOptions& options, const TrainOptions& train_options) {
  check_training_set(features, labels);
  if (!(options.l2 >= 0.0)) throw Error(ErrorCode::InvalidArgument, "l2 must be non-negative");
  if (!(options.learning_rate > 0.0)) throw Error(ErrorCode::InvalidArgument, "learning rate must be positive");
  if (options.epochs < 1) throw Error(ErrorCode::InvalidArgument, "epochs must be at least 1");

  LinearModel model;
  model.kind = ModelKind::logistic;
  model.scaler = Scaler::fit(features, train_options.scale);
  const Eigen::MatrixXd x = model.scaler.apply(features);
  const LogisticObjective objective(x, labels, options.l2);

  Eigen::VectorXd w = Eigen::VectorXd::Zero(x.cols());
  double b = 0.0;
  double loss = objective.loss(w, b);
  if (!std::isfinite(loss)) throw Error(ErrorCode::NonFiniteLoss, "initial loss is not finite");
  model.loss_history.push_back(loss);

  double lr = options.learning_rate;
  Eigen::VectorXd grad_w;
  double grad_b = 0.0;
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    objective.gradient(w, b, grad_w, grad_b);
    bool accepted = false;
    Eigen::VectorXd candidate;
    double candidate_b = 0.0, candidate_loss = 0.0;
    // Halve until the step does not raise the loss; 2^-60 is far below any useful rate.
    for (int halving = 0; halving < 60; ++halving) {
      candidate = w - lr * grad_w;
      candidate_b = train_options.fit_intercept ? b - lr * grad_b : 0.0;
      candidate_loss = objective.loss(candidate, candidate_b);
      if (!std::isfinite(candidate_loss) && !std::isfinite(loss))
        throw Error(ErrorCode::NonFiniteLoss, "loss diverged");
      if (std::isfinite(candidate_loss) && candidate_loss <= loss) {
        accepted = true;
        break;
      }
      lr *= 0.5;
    }
    if (!accepted) break;
    const double decrease = loss - candidate_loss;
    w = std::move(candidate);
    b = candidate_b;
    loss = candidate_loss;
    model.loss_history.push_back(loss);
    if (decrease <= options.tol * std::max(1.0, std::fabs(loss))) break;
  }
  model.weights = std::move(w);
  model.intercept = b;
  model.final_learning_rate = lr;
  return model;
}

std::pair<double, double> class_probabilities(double decision) {
  // The larger probability is computed directly and capped below 1; the
  // smaller one is its exact complement.
  constexpr double cap = 1.0 - 0x1p-53;
  if (decision >= 0.0) {
    const double p1 = std::min(cap, sigmoid(decision));
    return {1.0 - p1, p1};
  }
  const double p0 = std::min(cap, sigmoid(-decision));
  return {p0, 1.0 - p0};
}

EvalReport evaluate_features(const LinearModel& model, const Eigen::MatrixXd& features, std::span<const int> labels) {
  if (features.rows() == 0 || labels.empty()) throw Error(ErrorCode::EmptyTest, "test set is empty");
  if (static_cast<Eigen::Index>(labels.size()) != features.rows())
    throw Error(ErrorCode::DimensionMismatch, "one label per test row required");
  class_counts(labels);
  const Eigen::VectorXd decision = model.decision_function(features);
  EvalReport report;
  report.calibrated = model.kind == ModelKind::logistic;
  for (Eigen::Index i = 0; i < decision.size(); ++i) {
    const int truth = labels[static_cast<std::size_t>(i)];
    const int predicted = decision(i) > 0.0 ? 1 : 0;
    report.predictions.push_back(predicted);
    report.per_true_class_probabilities.emplace_back(truth, class_probabilities(decision(i)).second);
    ++report.confusion[static_cast<std::size_t>(truth)][static_cast<std::size_t>(predicted)];
  }
  report.accuracy = static_cast<double>(report.confusion[0][0] + report.confusion[1][1]) /
                    static_cast<double>(labels.size());
  return report;
}

EvalReport evaluate(const LinearModel& model, const RocketTransform& transform,
                    const std::vector<std::vector<double>>& series, std::span<const int> labels, unsigned threads) {
  if (series.empty()) throw Error(ErrorCode::EmptyTest, "test set is empty");
  return evaluate_features(model, rocket_apply(transform, series, threads), labels);
}

}  // namespace aukit
