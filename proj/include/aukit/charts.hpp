#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "aukit/decomposition.hpp"
#include "aukit/group_stats.hpp"
#include "aukit/ts_classify.hpp"

namespace aukit {

// Standalone SVG documents. Output depends only on the inputs.

/// Both group means over normalized time with a one-sd band each.
std::string curve_chart_svg(const GroupCurve& curve);

/// Cumulative explained variance with the threshold line and chosen k.
std::string variance_chart_svg(const PCAModel& model, double threshold);

/// First two score columns, coloured by cluster label.
std::string cluster_scatter_svg(const Eigen::MatrixXd& scores, std::span<const int> labels, const std::string& title);

/// Predicted positive-class probability per test sample, split by true class.
std::string probability_chart_svg(const EvalReport& report, const std::string& title);

}  // namespace aukit
