#include "aukit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "aukit/errors.hpp"
#include "aukit/parallel.hpp"

namespace aukit {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

double group_sign(Label label) {
  switch (label) {
    case Label::Depressed: return 0.5;
    case Label::Healthy: return -0.5;
    case Label::SubClinical: return 0.25;
  }
  return 0.0;
}

std::string participant_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "P%04zu", index + 1);
  return buf;
}

}  // namespace

std::vector<std::string> default_au_ids() {
  return {"AU01", "AU02", "AU04", "AU05", "AU06", "AU07", "AU09", "AU10", "AU12",
          "AU14", "AU15", "AU17", "AU20", "AU23", "AU25", "AU26", "AU45"};
}

CohortSpec CohortSpec::defaults() {
  CohortSpec spec;
  spec.au_ids = default_au_ids();
  spec.au_offsets = {{"AU01", 0.15}, {"AU06", -0.15}, {"AU15", 0.15}};
  return spec;
}

CohortSpec CohortSpec::from_json(const nlohmann::json& j) {
  CohortSpec s = defaults();
  try {
    if (j.contains("n_depressed")) s.n_depressed = j.at("n_depressed").get<int>();
    if (j.contains("n_healthy")) s.n_healthy = j.at("n_healthy").get<int>();
    if (j.contains("n_subclinical")) s.n_subclinical = j.at("n_subclinical").get<int>();
    if (j.contains("T_range")) {
      s.t_min = j.at("T_range").at(0).get<int>();
      s.t_max = j.at("T_range").at(1).get<int>();
    }
    if (j.contains("fps")) s.fps = j.at("fps").get<double>();
    if (j.contains("au_ids")) {
      s.au_ids.clear();
      for (const auto& au : j.at("au_ids")) s.au_ids.push_back(canonical_au_id(au.get<std::string>()));
    }
    if (j.contains("au_offsets")) {
      s.au_offsets.clear();
      for (const auto& [au, off] : j.at("au_offsets").items()) s.au_offsets[canonical_au_id(au)] = off.get<double>();
    }
    if (j.contains("base_level")) s.base_level = j.at("base_level").get<double>();
    if (j.contains("noise_sd")) s.noise_sd = j.at("noise_sd").get<double>();
    if (j.contains("ar_coeff")) s.ar_coeff = j.at("ar_coeff").get<double>();
    if (j.contains("participant_sd")) s.participant_sd = j.at("participant_sd").get<double>();
    if (j.contains("range")) s.range = {j.at("range").at(0).get<double>(), j.at("range").at(1).get<double>()};
    if (j.contains("phase_margin_s")) s.phase_margin_s = j.at("phase_margin_s").get<double>();
    if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidSpec, std::string("cohort spec: ") + e.what());
  }
  s.validate();
  return s;
}

nlohmann::json CohortSpec::to_json() const {
  return {{"n_depressed", n_depressed},
          {"n_healthy", n_healthy},
          {"n_subclinical", n_subclinical},
          {"T_range", {t_min, t_max}},
          {"fps", fps},
          {"au_ids", au_ids},
          {"au_offsets", au_offsets},
          {"base_level", base_level},
          {"noise_sd", noise_sd},
          {"ar_coeff", ar_coeff},
          {"participant_sd", participant_sd},
          {"range", {range.lo, range.hi}},
          {"phase_margin_s", phase_margin_s},
          {"seed", seed}};
}

void CohortSpec::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidSpec, msg); };
  if (n_depressed < 0 || n_healthy < 0 || n_subclinical < 0) fail("participant counts must be non-negative");
  if (n_depressed + n_healthy < 2) fail("n_depressed + n_healthy must be at least 2");
  if (t_min < 1 || t_max < t_min) fail("T_range must satisfy 1 <= min <= max");
  if (!(fps > 0.0)) fail("fps must be positive");
  if (au_ids.empty()) fail("au_ids is empty");
  for (const auto& [au, off] : au_offsets) {
    if (std::find(au_ids.begin(), au_ids.end(), au) == au_ids.end()) fail("offset for " + au + " which is not generated");
    if (!std::isfinite(off)) fail("offset for " + au + " is not finite");
  }
  if (!(noise_sd >= 0.0) || !(participant_sd >= 0.0)) fail("noise_sd and participant_sd must be non-negative");
  if (!(ar_coeff >= 0.0 && ar_coeff < 1.0)) fail("ar_coeff must lie in [0, 1)");
  if (!(range.lo < range.hi)) fail("range must satisfy lo < hi");
  if (!(phase_margin_s >= 0.0)) fail("phase_margin_s must be non-negative");
  if (static_cast<double>(t_min) / fps <= 2.0 * phase_margin_s) fail("shortest recording leaves no room for the EI phase");
}

SyntheticCohort generate_cohort(const CohortSpec& spec, unsigned threads) {
  spec.validate();
  std::vector<Label> labels;
  labels.insert(labels.end(), static_cast<std::size_t>(spec.n_depressed), Label::Depressed);
  labels.insert(labels.end(), static_cast<std::size_t>(spec.n_healthy), Label::Healthy);
  labels.insert(labels.end(), static_cast<std::size_t>(spec.n_subclinical), Label::SubClinical);

  std::vector<std::string> aus;
  for (const auto& au : spec.au_ids) aus.push_back(canonical_au_id(au));
  std::vector<double> offsets(aus.size(), 0.0);
  for (std::size_t a = 0; a < aus.size(); ++a) {
    const auto it = spec.au_offsets.find(aus[a]);
    if (it != spec.au_offsets.end()) offsets[a] = it->second;
  }

  SyntheticCohort out;
  out.cohort.participants.resize(labels.size());
  std::vector<nlohmann::json> truth(labels.size());
  const double innovation_sd = spec.noise_sd * std::sqrt(1.0 - spec.ar_coeff * spec.ar_coeff);

  parallel_for(labels.size(), threads, [&](std::size_t i) {
    std::mt19937_64 rng(splitmix64(spec.seed ^ splitmix64(i)));
    std::uniform_int_distribution<int> length(spec.t_min, spec.t_max);
    std::normal_distribution<double> normal(0.0, 1.0);

    Participant p;
    p.label = labels[i];
    p.series.participant_id = participant_name(i);
    p.series.fps = spec.fps;
    p.series.au_ids = aus;
    const int frames = length(rng);
    p.series.values.resize(frames, static_cast<Eigen::Index>(aus.size()));
    std::vector<double> effects(aus.size());
    for (auto& e : effects) e = spec.participant_sd * normal(rng);

    for (std::size_t a = 0; a < aus.size(); ++a) {
      const double level = spec.base_level + group_sign(p.label) * offsets[a] + effects[a];
      double noise = spec.noise_sd * normal(rng);
      for (int t = 0; t < frames; ++t) {
        if (t > 0) noise = spec.ar_coeff * noise + innovation_sd * normal(rng);
        const double v = std::clamp(level + noise, spec.range.lo, spec.range.hi);
        p.series.values(t, static_cast<Eigen::Index>(a)) = std::round(v * 1e6) / 1e6;
      }
    }

    const double duration = frames / spec.fps;
    PhaseTiming timing;
    timing.participant_id = p.series.participant_id;
    if (spec.phase_margin_s > 0.0) {
      timing.phases = {{"baseline", 0.0, spec.phase_margin_s},
                       {"EI", spec.phase_margin_s, duration - spec.phase_margin_s},
                       {"recovery", duration - spec.phase_margin_s, duration}};
    } else {
      timing.phases = {{"EI", 0.0, duration}};
    }
    p.timing = std::move(timing);

    nlohmann::json effect_json = nlohmann::json::object();
    for (std::size_t a = 0; a < aus.size(); ++a) effect_json[aus[a]] = effects[a];
    truth[i] = {{"participant_id", p.series.participant_id},
                {"label", std::string(to_string(p.label))},
                {"frames", frames},
                {"participant_effects", effect_json}};
    out.cohort.participants[i] = std::move(p);
  });

  out.ground_truth = {{"spec", spec.to_json()},
                      {"offsets", spec.au_offsets},
                      {"group_shift", {{"Depressed", 0.5}, {"Healthy", -0.5}, {"SubClinical", 0.25}}},
                      {"participants", truth}};
  return out;
}

void write_cohort(const SyntheticCohort& synthetic, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "au");
  std::filesystem::create_directories(dir / "timing");
  std::vector<ManifestEntry> manifest;
  for (const auto& p : synthetic.cohort.participants) {
    const auto& id = p.series.participant_id;
    ManifestEntry e{id, dir / "au" / (id + ".csv"), dir / "timing" / (id + ".json"), p.label};
    write_file(e.au_csv_path, write_au_csv(p.series));
    if (p.timing) write_file(e.timing_path, write_phase_timing(*p.timing));
    else e.timing_path.clear();
    manifest.push_back(std::move(e));
  }
  write_file(dir / "manifest.json", write_manifest(manifest, dir));
  write_file(dir / "ground_truth.json", synthetic.ground_truth.dump(2) + "\n");
}

}  // namespace aukit
