#pragma once

#include <filesystem>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "aukit/errors.hpp"
#include "aukit/ingest.hpp"

namespace testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("aukit_" + tag + "_" + std::to_string(std::random_device{}()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng, double sd = 1.0) {
  std::normal_distribution<double> n(0.0, sd);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = n(rng);
  return m;
}

inline aukit::AUFrameSeries constant_series(std::string id, std::size_t frames,
                                            const std::vector<std::string>& aus, double value) {
  aukit::AUFrameSeries s;
  s.participant_id = std::move(id);
  s.au_ids = aus;
  s.values = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(frames), static_cast<Eigen::Index>(aus.size()), value);
  return s;
}

// Runs fn and returns the ErrorCode it threw; fails the test otherwise.
template <typename Fn>
aukit::ErrorCode error_of(Fn&& fn) {
  try {
    fn();
  } catch (const aukit::Error& e) {
    return e.code();
  }
  throw std::runtime_error("expected an aukit::Error");
}

}  // namespace testing
