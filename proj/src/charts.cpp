#include "aukit/charts.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace aukit {

namespace {

constexpr double kWidth = 640, kHeight = 400;
constexpr double kLeft = 60, kRight = 20, kTop = 40, kBottom = 50;
const char* const kPalette[] = {"#c0392b", "#2471a3", "#229954", "#b9770e", "#7d3c98", "#566573"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

class Plot {
 public:
  Plot(double x0, double x1, double y0, double y1) : x0_(x0), x1_(x1), y0_(y0), y1_(y1) {
    if (!(x1_ > x0_)) x1_ = x0_ + 1.0;
    if (!(y1_ > y0_)) {
      y0_ -= 0.5;
      y1_ = y0_ + 1.0;
    }
  }

  double px(double x) const { return kLeft + (x - x0_) / (x1_ - x0_) * (kWidth - kLeft - kRight); }
  double py(double y) const { return kHeight - kBottom - (y - y0_) / (y1_ - y0_) * (kHeight - kTop - kBottom); }

  void polyline(std::span<const double> xs, std::span<const double> ys, const char* colour, double width,
                const char* dash = nullptr) {
    body_ += "<polyline fill=\"none\" stroke=\"" + std::string(colour) + "\" stroke-width=\"" + num(width) + "\"";
    if (dash) body_ += " stroke-dasharray=\"" + std::string(dash) + "\"";
    body_ += " points=\"";
    for (std::size_t i = 0; i < xs.size(); ++i) body_ += num(px(xs[i])) + "," + num(py(ys[i])) + " ";
    body_ += "\"/>\n";
  }

  void band(std::span<const double> xs, std::span<const double> lo, std::span<const double> hi, const char* colour) {
    body_ += "<polygon fill=\"" + std::string(colour) + "\" fill-opacity=\"0.18\" stroke=\"none\" points=\"";
    for (std::size_t i = 0; i < xs.size(); ++i) body_ += num(px(xs[i])) + "," + num(py(hi[i])) + " ";
    for (std::size_t i = xs.size(); i-- > 0;) body_ += num(px(xs[i])) + "," + num(py(lo[i])) + " ";
    body_ += "\"/>\n";
  }

  void circle(double x, double y, const char* colour) {
    body_ += "<circle cx=\"" + num(px(x)) + "\" cy=\"" + num(py(y)) + "\" r=\"3.5\" fill=\"" + colour +
             "\" fill-opacity=\"0.75\"/>\n";
  }

  void hline(double y, const char* colour) {
    body_ += "<line x1=\"" + num(kLeft) + "\" x2=\"" + num(kWidth - kRight) + "\" y1=\"" + num(py(y)) + "\" y2=\"" +
             num(py(y)) + "\" stroke=\"" + colour + "\" stroke-dasharray=\"4 3\"/>\n";
  }

  void vline(double x, const char* colour) {
    body_ += "<line x1=\"" + num(px(x)) + "\" x2=\"" + num(px(x)) + "\" y1=\"" + num(kTop) + "\" y2=\"" +
             num(kHeight - kBottom) + "\" stroke=\"" + colour + "\" stroke-dasharray=\"4 3\"/>\n";
  }

  void legend(int row, const char* colour, const std::string& text) {
    const double y = kTop + 14.0 * row;
    body_ += "<rect x=\"" + num(kWidth - 170) + "\" y=\"" + num(y - 8) + "\" width=\"10\" height=\"10\" fill=\"" +
             colour + "\"/>\n<text x=\"" + num(kWidth - 155) + "\" y=\"" + num(y + 1) +
             "\" font-size=\"11\">" + escape(text) + "</text>\n";
  }

  std::string finish(const std::string& title, const std::string& xlabel, const std::string& ylabel) const {
    std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" +
                    num(kHeight) + "\" font-family=\"sans-serif\">\n";
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s += "<text x=\"" + num(kWidth / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" + escape(title) +
         "</text>\n";
    const double bx = kLeft, by = kHeight - kBottom;
    s += "<line x1=\"" + num(bx) + "\" y1=\"" + num(by) + "\" x2=\"" + num(kWidth - kRight) + "\" y2=\"" + num(by) +
         "\" stroke=\"black\"/>\n";
    s += "<line x1=\"" + num(bx) + "\" y1=\"" + num(kTop) + "\" x2=\"" + num(bx) + "\" y2=\"" + num(by) +
         "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
      const double xv = x0_ + (x1_ - x0_) * i / 4.0, yv = y0_ + (y1_ - y0_) * i / 4.0;
      s += "<text x=\"" + num(px(xv)) + "\" y=\"" + num(by + 16) + "\" text-anchor=\"middle\" font-size=\"10\">" +
           tick(xv) + "</text>\n";
      s += "<text x=\"" + num(bx - 6) + "\" y=\"" + num(py(yv) + 3) + "\" text-anchor=\"end\" font-size=\"10\">" +
           tick(yv) + "</text>\n";
    }
    s += "<text x=\"" + num(kWidth / 2) + "\" y=\"" + num(kHeight - 12) + "\" text-anchor=\"middle\" font-size=\"12\">" +
         escape(xlabel) + "</text>\n";
    s += "<text x=\"16\" y=\"" + num(kHeight / 2) + "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 " +
         num(kHeight / 2) + ")\">" + escape(ylabel) + "</text>\n";
    return s + body_ + "</svg>\n";
  }

 private:
  static std::string tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", std::abs(v) < 1e-12 ? 0.0 : v);
    return buf;
  }

  double x0_, x1_, y0_, y1_;
  std::string body_;
};

std::pair<double, double> bounds(std::initializer_list<std::span<const double>> spans) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& s : spans)
    for (double v : s)
      if (std::isfinite(v)) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
  if (!std::isfinite(lo)) return {0.0, 1.0};
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

}  // namespace

std::string curve_chart_svg(const GroupCurve& curve) {
  const std::size_t n = curve.t.size();
  std::vector<double> lo_a(n), hi_a(n), lo_b(n), hi_b(n);
  for (std::size_t i = 0; i < n; ++i) {
    lo_a[i] = curve.mean_a[i] - curve.sd_a[i];
    hi_a[i] = curve.mean_a[i] + curve.sd_a[i];
    lo_b[i] = curve.mean_b[i] - curve.sd_b[i];
    hi_b[i] = curve.mean_b[i] + curve.sd_b[i];
  }
  const auto [y0, y1] = bounds({lo_a, hi_a, lo_b, hi_b});
  Plot plot(0.0, 1.0, y0, y1);
  plot.band(curve.t, lo_a, hi_a, kPalette[0]);
  plot.band(curve.t, lo_b, hi_b, kPalette[1]);
  plot.polyline(curve.t, curve.mean_a, kPalette[0], 1.5);
  plot.polyline(curve.t, curve.mean_b, kPalette[1], 1.5);
  plot.hline(curve.overall_mean_a, kPalette[0]);
  plot.hline(curve.overall_mean_b, kPalette[1]);
  plot.legend(0, kPalette[0], "Depressed (n=" + std::to_string(curve.n_a) + ")");
  plot.legend(1, kPalette[1], "Healthy (n=" + std::to_string(curve.n_b) + ")");
  return plot.finish(curve.signal_name + " intensity", "normalized time",
                     curve.standardized ? "z-scored intensity" : "intensity");
}

std::string variance_chart_svg(const PCAModel& model, double threshold) {
  const auto m = static_cast<std::size_t>(model.component_count());
  std::vector<double> xs(m), cum(m);
  double acc = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    xs[i] = static_cast<double>(i + 1);
    acc += model.explained_variance_ratio(static_cast<Eigen::Index>(i));
    cum[i] = acc;
  }
  Plot plot(1.0, std::max(2.0, static_cast<double>(m)), 0.0, 1.05);
  plot.polyline(xs, cum, kPalette[1], 1.5);
  plot.hline(threshold, kPalette[0]);
  if (!model.degenerate && m > 0) {
    const auto k = components_for_variance(model, threshold);
    plot.vline(static_cast<double>(k), kPalette[2]);
    plot.legend(0, kPalette[2], "k = " + std::to_string(k));
  }
  return plot.finish("Cumulative explained variance", "components", "cumulative ratio");
}

std::string cluster_scatter_svg(const Eigen::MatrixXd& scores, std::span<const int> labels, const std::string& title) {
  const auto n = static_cast<std::size_t>(scores.rows());
  std::vector<double> xs(n), ys(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = scores.cols() > 0 ? scores(static_cast<Eigen::Index>(i), 0) : 0.0;
    if (scores.cols() > 1) ys[i] = scores(static_cast<Eigen::Index>(i), 1);
  }
  const auto [x0, x1] = bounds({xs});
  const auto [y0, y1] = bounds({ys});
  Plot plot(x0, x1, y0, y1);
  int top = -1;
  for (std::size_t i = 0; i < n; ++i) {
    const int c = labels[i];
    top = std::max(top, c);
    plot.circle(xs[i], ys[i], kPalette[static_cast<std::size_t>(std::max(c, 0)) % 6]);
  }
  for (int c = 0; c <= top && c < 6; ++c) plot.legend(c, kPalette[c], "cluster " + std::to_string(c));
  return plot.finish(title, "PC1", "PC2");
}

std::string probability_chart_svg(const EvalReport& report, const std::string& title) {
  Plot plot(-0.5, 1.5, 0.0, 1.0);
  std::size_t seen[2] = {0, 0};
  for (const auto& [label, p] : report.per_true_class_probabilities) {
    const int cls = label == 1 ? 1 : 0;
    // spread points of one class horizontally so they do not overlap
    const double jitter = (static_cast<double>(seen[cls]++ % 9) - 4.0) * 0.04;
    plot.circle(static_cast<double>(cls) + jitter, p, kPalette[cls == 1 ? 0 : 1]);
  }
  plot.hline(0.5, "#566573");
  plot.legend(0, kPalette[1], "true Healthy (x = 0)");
  plot.legend(1, kPalette[0], "true Depressed (x = 1)");
  return plot.finish(title, "true class", report.calibrated ? "P(Depressed)" : "squashed decision value");
}

}  // namespace aukit
