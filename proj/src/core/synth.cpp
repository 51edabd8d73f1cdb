#include "synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <set>

#include "json.hpp"

#include "error.hpp"
#include "features.hpp"
#include "rng.hpp"

namespace wsvad {

using nlohmann::json;

void SynthConfig::validate() const {
  if (frames < 2) fail(ErrorCode::argument, "synth config: frames must be >= 2");
  if (dim < 1) fail(ErrorCode::argument, "synth config: dim must be >= 1");
  if (anomaly_len < 1 || anomaly_len >= frames) {
    fail(ErrorCode::argument, "synth config: anomaly_len must be in [1, frames)");
  }
  if (magnitude_boost <= 1.0) {
    fail(ErrorCode::argument, "synth config: magnitude_boost must be > 1");
  }
  if (noise_sigma <= 0.0) fail(ErrorCode::argument, "synth config: noise_sigma must be positive");
}

namespace {

constexpr double kBaseMagnitude = 1.0;
constexpr double kDriftRate = 0.02;
// The anomaly direction completes four full turns over the interval: the
// per-frame displacement stays large for the regularity-based transforms
// while the raw embedding largely cancels under mean pooling.
constexpr double kTurnsPerInterval = 4.0;
// Normal content is drawn around a small pool of shared scene prototypes so
// the normal concept transfers from the training videos to the test split.
constexpr std::size_t kPrototypes = 4;
constexpr double kPrototypeJitter = 0.25;

std::vector<double> random_unit_vector(SeededRng& rng, std::size_t dim) {
  std::vector<double> v(dim);
  double norm = 0.0;
  do {
    norm = 0.0;
    for (double& x : v) {
      x = rng.gaussian();
      norm += x * x;
    }
  } while (norm == 0.0);
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

// Unit vector orthogonal to base.
std::vector<double> orthogonal_unit_vector(SeededRng& rng, const std::vector<double>& base) {
  while (true) {
    std::vector<double> v = random_unit_vector(rng, base.size());
    double dot = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) dot += v[i] * base[i];
    double norm = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      v[i] -= dot * base[i];
      norm += v[i] * v[i];
    }
    if (norm > 1e-12) {
      norm = std::sqrt(norm);
      for (double& x : v) x /= norm;
      return v;
    }
  }
}

std::vector<std::vector<double>> scene_prototypes(const SynthConfig& cfg) {
  SeededRng rng(mix_seed(cfg.seed, 0x3000000));
  std::vector<std::vector<double>> prototypes;
  for (std::size_t p = 0; p < kPrototypes; ++p) {
    prototypes.push_back(random_unit_vector(rng, cfg.dim));
  }
  return prototypes;
}

Matrix synth_video(const SynthConfig& cfg, uint64_t video_salt,
                   const std::vector<double>& prototype, bool anomalous,
                   FrameInterval* interval_out) {
  SeededRng rng(mix_seed(cfg.seed, video_salt));
  const std::size_t t_len = cfg.frames;
  const std::size_t d = cfg.dim;

  std::vector<double> base(d);
  {
    double norm = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      base[c] = prototype[c] + kPrototypeJitter * rng.gaussian();
      norm += base[c] * base[c];
    }
    norm = std::sqrt(norm);
    for (double& x : base) x /= norm;
  }
  std::vector<double> rotor;
  FrameInterval interval{};
  if (anomalous) {
    rotor = orthogonal_unit_vector(rng, base);
    const uint32_t start =
        static_cast<uint32_t>(rng.below(static_cast<uint64_t>(t_len - cfg.anomaly_len + 1)));
    interval = {start, start + static_cast<uint32_t>(cfg.anomaly_len)};
  }

  Matrix out(t_len, d);
  std::vector<double> direction = base;
  const double omega =
      kTurnsPerInterval * 2.0 * std::numbers::pi / static_cast<double>(cfg.anomaly_len);
  for (std::size_t t = 0; t < t_len; ++t) {
    // Slow drift keeps normal segments smooth but not constant.
    double norm = 0.0;
    for (double& x : direction) {
      x += kDriftRate * rng.gaussian();
      norm += x * x;
    }
    norm = std::sqrt(norm);
    for (double& x : direction) x /= norm;

    const bool inside = anomalous && t >= interval.begin && t < interval.end;
    for (std::size_t c = 0; c < d; ++c) {
      double signal;
      if (inside) {
        const double phase = omega * static_cast<double>(t - interval.begin);
        signal = cfg.magnitude_boost * kBaseMagnitude *
                 (std::cos(phase) * direction[c] + std::sin(phase) * rotor[c]);
      } else {
        signal = kBaseMagnitude * direction[c];
      }
      out(t, c) = signal + cfg.noise_sigma * rng.gaussian();
    }
  }
  if (interval_out) *interval_out = interval;
  return out;
}

std::string zero_padded(std::size_t value, int width) {
  std::string s = std::to_string(value);
  while (static_cast<int>(s.size()) < width) s.insert(s.begin(), '0');
  return s;
}

}  // namespace

std::filesystem::path generate_synthetic_dataset(const SynthConfig& cfg,
                                                 const std::filesystem::path& out_dir) {
  cfg.validate();
  const std::filesystem::path feature_dir = out_dir / "features";
  std::error_code ec;
  std::filesystem::create_directories(feature_dir, ec);
  if (ec) fail(ErrorCode::io, "cannot create output directory: " + feature_dir.string());

  std::vector<ManifestEntry> entries;
  const std::vector<std::vector<double>> prototypes = scene_prototypes(cfg);
  const std::size_t tag_count = std::size(kClassTags);
  const std::size_t n_test = cfg.n_anomaly * 3 / 10;
  const std::size_t n_train_anomaly = cfg.n_anomaly - n_test;

  for (std::size_t i = 0; i < cfg.n_anomaly; ++i) {
    FrameInterval interval{};
    Matrix data = synth_video(cfg, 0x1000000 + i, prototypes[i % kPrototypes], true, &interval);
    const std::string id = "anomaly_" + zero_padded(i, 4);
    const std::string rel = "features/" + id + ".ftbf";
    encode_feature_file({std::move(data), std::nullopt}, out_dir / rel);

    ManifestEntry e;
    e.video_id = id;
    e.split = i < n_train_anomaly ? Split::train : Split::test;
    e.label = Label::anomaly;
    e.class_tag = kClassTags[i % tag_count];
    e.feature_path = rel;
    e.frame_count = static_cast<uint32_t>(cfg.frames);
    e.anomaly_intervals = {interval};
    entries.push_back(std::move(e));
  }

  for (std::size_t i = 0; i < cfg.n_normal; ++i) {
    Matrix data = synth_video(cfg, 0x2000000 + i, prototypes[i % kPrototypes], false, nullptr);
    const std::string id = "normal_" + zero_padded(i, 4);
    const std::string rel = "features/" + id + ".ftbf";
    encode_feature_file({std::move(data), std::nullopt}, out_dir / rel);

    ManifestEntry e;
    e.video_id = id;
    e.split = Split::train;
    e.label = Label::normal;
    e.feature_path = rel;
    e.frame_count = static_cast<uint32_t>(cfg.frames);
    entries.push_back(std::move(e));
  }

  const std::filesystem::path manifest_path = out_dir / "manifest.jsonl";
  write_manifest(entries, manifest_path);
  return manifest_path;
}

namespace {

std::string id_or_stem(const std::string& id, const std::string& feature_path) {
  if (!id.empty()) return id;
  return std::filesystem::path(feature_path).stem().string();
}

}  // namespace

std::vector<ManifestEntry> build_manifest(const std::vector<AnomalousSource>& anomalous,
                                          const std::vector<NormalSource>& normals,
                                          const SplitRule& rule,
                                          const std::filesystem::path& base_dir) {
  if (rule.test_fraction < 0.0 || rule.test_fraction > 1.0) {
    fail(ErrorCode::argument, "build_manifest: test_fraction must be in [0, 1]");
  }

  std::vector<ManifestEntry> entries;
  std::set<std::string> ids;

  auto claim_id = [&](const std::string& id) {
    if (!ids.insert(id).second) {
      fail(ErrorCode::argument, "build_manifest: duplicate video_id '" + id + "'");
    }
  };

  std::vector<std::size_t> undecided;  // indices into `anomalous` eligible for the rule
  std::vector<ManifestEntry> anomaly_entries(anomalous.size());
  for (std::size_t i = 0; i < anomalous.size(); ++i) {
    const AnomalousSource& src = anomalous[i];
    if (!is_known_class_tag(src.class_tag)) {
      fail(ErrorCode::argument, "build_manifest: unknown class tag '" + src.class_tag + "'");
    }
    ManifestEntry& e = anomaly_entries[i];
    e.video_id = id_or_stem(src.video_id, src.feature_path);
    claim_id(e.video_id);
    e.label = Label::anomaly;
    e.class_tag = src.class_tag;
    e.feature_path = src.feature_path;
    e.frame_count = src.frame_count;
    e.anomaly_intervals = src.intervals;
    if (src.split) {
      if (*src.split == Split::test && src.intervals.empty()) {
        fail(ErrorCode::argument,
             "build_manifest: test source '" + e.video_id + "' has no annotated intervals");
      }
      e.split = *src.split;
    } else if (src.intervals.empty()) {
      e.split = Split::train;  // unannotated videos can only train
    } else {
      undecided.push_back(i);
    }
  }

  // Seeded assignment of test_fraction of the annotated sources to test.
  SeededRng rng(mix_seed(rule.seed, 0x73706c69));
  std::vector<std::size_t> shuffled = undecided;
  rng.shuffle(shuffled);
  const std::size_t n_test = static_cast<std::size_t>(
      std::llround(rule.test_fraction * static_cast<double>(shuffled.size())));
  std::set<std::size_t> test_set(shuffled.begin(), shuffled.begin() + n_test);
  for (std::size_t i : undecided) {
    anomaly_entries[i].split = test_set.count(i) ? Split::test : Split::train;
  }

  for (ManifestEntry& e : anomaly_entries) entries.push_back(std::move(e));

  for (const NormalSource& src : normals) {
    ManifestEntry e;
    e.video_id = id_or_stem(src.video_id, src.feature_path);
    claim_id(e.video_id);
    e.split = Split::train;
    e.label = Label::normal;
    e.feature_path = src.feature_path;
    e.frame_count = src.frame_count;
    entries.push_back(std::move(e));
  }

  for (const ManifestEntry& e : entries) {
    if (!std::filesystem::exists(resolve_feature_path(e, base_dir))) {
      fail(ErrorCode::io, "build_manifest: feature file missing for '" + e.video_id +
                              "': " + e.feature_path);
    }
  }

  ValidationReport report = validate_manifest(entries);
  if (!report.ok()) {
    fail(ErrorCode::validation, "build_manifest produced an invalid manifest:\n" + report.to_text());
  }
  return entries;
}

namespace {

std::vector<json> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open sources file: " + path.string());
  std::vector<json> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      fail(ErrorCode::format, path.string() + ":" + std::to_string(line_no) + ": invalid JSON");
    }
    records.push_back(std::move(j));
  }
  return records;
}

}  // namespace

std::vector<AnomalousSource> read_anomalous_sources(const std::filesystem::path& path) {
  std::vector<AnomalousSource> sources;
  for (const json& j : read_jsonl(path)) {
    AnomalousSource src;
    try {
      src.feature_path = j.at("feature_path").get<std::string>();
      src.frame_count = j.at("frame_count").get<uint32_t>();
      src.class_tag = j.at("class_tag").get<std::string>();
      if (j.contains("video_id")) src.video_id = j.at("video_id").get<std::string>();
      if (j.contains("split") && !j.at("split").is_null()) {
        src.split = split_from_string(j.at("split").get<std::string>());
      }
      if (j.contains("anomaly_intervals") && !j.at("anomaly_intervals").is_null()) {
        for (const json& pair : j.at("anomaly_intervals")) {
          src.intervals.push_back({pair.at(0).get<uint32_t>(), pair.at(1).get<uint32_t>()});
        }
      }
    } catch (const json::exception& ex) {
      fail(ErrorCode::format, path.string() + ": malformed anomalous source: " + ex.what());
    }
    sources.push_back(std::move(src));
  }
  return sources;
}

std::vector<NormalSource> read_normal_sources(const std::filesystem::path& path) {
  std::vector<NormalSource> sources;
  for (const json& j : read_jsonl(path)) {
    if (j.contains("anomaly_intervals") && !j.at("anomaly_intervals").is_null() &&
        !j.at("anomaly_intervals").empty()) {
      fail(ErrorCode::argument,
           path.string() + ": normal source lists anomaly intervals: " + j.dump());
    }
    NormalSource src;
    try {
      src.feature_path = j.at("feature_path").get<std::string>();
      src.frame_count = j.at("frame_count").get<uint32_t>();
      if (j.contains("video_id")) src.video_id = j.at("video_id").get<std::string>();
    } catch (const json::exception& ex) {
      fail(ErrorCode::format, path.string() + ": malformed normal source: " + ex.what());
    }
    sources.push_back(std::move(src));
  }
  return sources;
}

}  // namespace wsvad
