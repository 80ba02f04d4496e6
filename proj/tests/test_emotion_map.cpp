#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "aukit/emotion_map.hpp"
#include "aukit/errors.hpp"
#include "support.hpp"

using namespace aukit;
using testing::error_of;

namespace {

std::map<std::string, double> random_frame(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::map<std::string, double> f;
  for (int au : {1, 2, 4, 5, 6, 7, 9, 10, 12, 14, 15, 16, 17, 20, 23, 25, 26, 28, 45})
    f[canonical_au_id("AU" + std::to_string(au))] = u(rng);
  return f;
}

}  // namespace

TEST_CASE("built-in registry") {
  const auto& reg = builtin_emotions();
  REQUIRE(reg.size() == 6);
  CHECK(find_emotion(reg, "Happiness").components == std::vector<std::string>{"AU06", "AU12"});
  CHECK(find_emotion(reg, "Sadness").components == std::vector<std::string>{"AU01", "AU04", "AU15"});
  CHECK(find_emotion(reg, "Surprise").components == std::vector<std::string>{"AU01", "AU02", "AU05", "AU26"});
  CHECK(find_emotion(reg, "Fear").components.size() == 7);
  CHECK(find_emotion(reg, "Disgust").components == std::vector<std::string>{"AU09", "AU15", "AU16"});
  CHECK(find_emotion(reg, "Anger").components == std::vector<std::string>{"AU04", "AU05", "AU07", "AU23"});
  CHECK(lookup_emotion(reg, "Contempt") == nullptr);
  CHECK(error_of([&] { find_emotion(reg, "Contempt"); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("frame intensities") {
  const auto& reg = builtin_emotions();
  std::map<std::string, double> zero;
  for (const auto& e : reg) CHECK(emotion_frame_intensity(zero, e) == 0.0);
  CHECK(emotion_frame_intensity({{"AU06", 0.5}, {"AU12", 0.3}}, find_emotion(reg, "Happiness")) ==
        doctest::Approx(0.8).epsilon(1e-15));
  CHECK(emotion_frame_intensity({{"AU01", 0.2}, {"AU04", 0.1}, {"AU15", 0.3}}, find_emotion(reg, "Sadness")) ==
        doctest::Approx(0.6).epsilon(1e-15));
  EmotionOptions normalized;
  normalized.normalize = true;
  CHECK(emotion_frame_intensity({{"AU06", 0.5}, {"AU12", 0.3}}, find_emotion(reg, "Happiness"), normalized) ==
        doctest::Approx(0.4));
}

TEST_CASE("definitions") {
  CHECK(error_of([] { make_emotion("Empty", {}); }) == ErrorCode::InvalidArgument);
  CHECK(error_of([] { make_emotion("Twice", {"AU1", "AU01"}); }) == ErrorCode::InvalidArgument);
  const auto custom = parse_emotion_definitions(R"({"Smirk": ["AU12", "AU14"]})");
  REQUIRE(custom.size() == 1);
  CHECK(custom[0].components == std::vector<std::string>{"AU12", "AU14"});
}

TEST_CASE("emotion series") {
  const auto& reg = builtin_emotions();
  SUBCASE("constant frames stay constant, length preserved") {
    const auto s = testing::constant_series("P", 90, {"AU06", "AU12"}, 0.25);
    const auto e = emotion_series(s, find_emotion(reg, "Happiness"));
    REQUIRE(e.values.size() == 90);
    for (double v : e.values) CHECK(v == 0.5);
    CHECK(e.coverage == 1.0);
  }
  SUBCASE("missing AU16 lowers Disgust coverage") {
    AUFrameSeries s;
    s.au_ids = {"AU09", "AU15"};
    s.values.resize(3, 2);
    s.values << 0.1, 0.2, 0.3, 0.4, 0.5, 0.6;
    const auto e = emotion_series(s, find_emotion(reg, "Disgust"));
    CHECK(e.coverage == doctest::Approx(2.0 / 3.0));
    CHECK(e.values[0] == doctest::Approx(0.3));
    CHECK(e.values[1] == doctest::Approx(0.7));
    CHECK(e.values[2] == doctest::Approx(1.1));
  }
}

TEST_CASE("every built-in definition is computable on OpenFace-style output") {
  // OpenFace reports intensities without AU16 or AU28; those count as zero.
  const std::vector<std::string> aus = {"AU01", "AU02", "AU04", "AU05", "AU06", "AU07", "AU09", "AU10", "AU12",
                                        "AU14", "AU15", "AU17", "AU20", "AU23", "AU25", "AU26", "AU45"};
  const auto s = testing::constant_series("P", 10, aus, 0.1);
  for (const auto& def : builtin_emotions()) {
    const auto e = emotion_series(s, def);
    std::size_t present = 0;
    for (const auto& c : def.components) present += std::count(aus.begin(), aus.end(), c);
    CHECK(e.values[0] == doctest::Approx(0.1 * static_cast<double>(present)));
  }
}

TEST_CASE("additivity, monotonicity and permutation invariance on random frames") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> bump(0.0, 0.5);
  const auto& reg = builtin_emotions();
  for (int trial = 0; trial < 1000; ++trial) {
    const auto a = random_frame(rng), b = random_frame(rng);
    std::map<std::string, double> sum;
    for (const auto& [au, v] : a) sum[au] = v + b.at(au);
    for (const auto& def : reg) {
      const double fa = emotion_frame_intensity(a, def), fb = emotion_frame_intensity(b, def);
      CHECK(emotion_frame_intensity(sum, def) == doctest::Approx(fa + fb).epsilon(1e-12));
      auto raised = a;
      const auto& au = def.components[rng() % def.components.size()];
      raised[au] += bump(rng);
      CHECK(emotion_frame_intensity(raised, def) >= fa);
    }
  }

  // Column permutation of whole series.
  AUFrameSeries s;
  s.au_ids = {"AU01", "AU02", "AU04", "AU05", "AU06", "AU07", "AU09", "AU12", "AU15", "AU20", "AU23", "AU26"};
  s.values = Eigen::MatrixXd::Random(50, static_cast<Eigen::Index>(s.au_ids.size())).cwiseAbs();
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Eigen::Index> perm(s.au_ids.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    AUFrameSeries p = s;
    for (std::size_t c = 0; c < perm.size(); ++c) {
      p.au_ids[c] = s.au_ids[static_cast<std::size_t>(perm[c])];
      p.values.col(static_cast<Eigen::Index>(c)) = s.values.col(perm[c]);
    }
    for (const auto& def : reg) CHECK(emotion_series(p, def).values == emotion_series(s, def).values);
  }
}
