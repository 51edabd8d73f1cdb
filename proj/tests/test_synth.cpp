#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <fstream>

#include "error.hpp"
#include "features.hpp"
#include "support/tmpdir.hpp"
#include "synth.hpp"

using namespace wsvad;

namespace {

SynthConfig small_synth(uint64_t seed = 7) {
  SynthConfig cfg;
  cfg.n_normal = 6;
  cfg.n_anomaly = 6;
  cfg.frames = 64;
  cfg.dim = 8;
  cfg.anomaly_len = 16;
  cfg.seed = seed;
  return cfg;
}

std::string read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("generation produces a valid manifest with the requested counts") {
  testsup::TmpDir tmp("synth_counts");
  const auto manifest_path = generate_synthetic_dataset(small_synth(), tmp.path());

  std::vector<ManifestEntry> entries = read_manifest(manifest_path);
  CHECK(entries.size() == 12);

  std::size_t train_normal = 0, train_anomaly = 0, test_anomaly = 0;
  for (const ManifestEntry& e : entries) {
    if (e.label == Label::normal) {
      CHECK(e.split == Split::train);
      ++train_normal;
    } else if (e.split == Split::train) {
      ++train_anomaly;
    } else {
      ++test_anomaly;
      CHECK(e.class_tag.has_value());
    }
    CHECK(std::filesystem::exists(tmp.path() / e.feature_path));
  }
  CHECK(train_normal == 6);
  // 70/30 split of the 6 anomalous videos: floor(6 * 3 / 10) = 1 test video.
  CHECK(test_anomaly == 1);
  CHECK(train_anomaly == 5);

  CHECK(validate_manifest(entries, {.deep = true, .base_dir = tmp.path()}).ok());
}

TEST_CASE("generation is byte-identical for the same config and seed") {
  testsup::TmpDir tmp_a("synth_det_a");
  testsup::TmpDir tmp_b("synth_det_b");
  const auto manifest_a = generate_synthetic_dataset(small_synth(42), tmp_a.path());
  const auto manifest_b = generate_synthetic_dataset(small_synth(42), tmp_b.path());

  CHECK(read_bytes(manifest_a) == read_bytes(manifest_b));
  for (const ManifestEntry& e : read_manifest(manifest_a)) {
    CHECK(read_bytes(tmp_a.path() / e.feature_path) == read_bytes(tmp_b.path() / e.feature_path));
  }

  testsup::TmpDir tmp_c("synth_det_c");
  const auto manifest_c = generate_synthetic_dataset(small_synth(43), tmp_c.path());
  bool any_payload_changed = false;
  for (const ManifestEntry& e : read_manifest(manifest_a)) {
    if (e.label == Label::normal) continue;
    if (read_bytes(tmp_a.path() / e.feature_path) != read_bytes(tmp_c.path() / e.feature_path)) {
      any_payload_changed = true;
    }
  }
  CHECK(any_payload_changed);
}

TEST_CASE("planted intervals are in bounds with exactly the configured length") {
  testsup::TmpDir tmp("synth_intervals");
  SynthConfig cfg = small_synth(11);
  const auto manifest_path = generate_synthetic_dataset(cfg, tmp.path());
  for (const ManifestEntry& e : read_manifest(manifest_path)) {
    if (e.label != Label::anomaly) {
      CHECK(e.anomaly_intervals.empty());
      continue;
    }
    REQUIRE(e.anomaly_intervals.size() == 1);
    const FrameInterval iv = e.anomaly_intervals[0];
    CHECK(iv.end - iv.begin == cfg.anomaly_len);
    CHECK(iv.end <= cfg.frames);
  }
}

TEST_CASE("anomalous frames carry a higher mean l2 norm inside the interval") {
  testsup::TmpDir tmp("synth_norms");
  SynthConfig cfg = small_synth(13);
  const auto manifest_path = generate_synthetic_dataset(cfg, tmp.path());
  for (const ManifestEntry& e : read_manifest(manifest_path)) {
    if (e.label != Label::anomaly) continue;
    FeatureSequence seq = decode_feature_file(tmp.path() / e.feature_path);
    const FrameInterval iv = e.anomaly_intervals[0];
    double inside = 0.0, outside = 0.0;
    std::size_t n_inside = 0, n_outside = 0;
    for (std::size_t t = 0; t < seq.data.rows(); ++t) {
      const bool in_interval = t >= iv.begin && t < iv.end;
      (in_interval ? inside : outside) += row_norm(seq.data, t);
      (in_interval ? n_inside : n_outside) += 1;
    }
    inside /= static_cast<double>(n_inside);
    outside /= static_cast<double>(n_outside);
    CHECK(inside > outside);
  }
}

TEST_CASE("a run without anomalies surfaces the precondition violation") {
  testsup::TmpDir tmp("synth_no_anomaly");
  SynthConfig cfg = small_synth(17);
  cfg.n_anomaly = 0;
  const auto manifest_path = generate_synthetic_dataset(cfg, tmp.path());
  ValidationReport report = validate_manifest(read_manifest(manifest_path));
  bool found = false;
  for (const auto& v : report.violations) {
    if (v.code == "no-anomaly-train") found = true;
  }
  CHECK(found);
}

TEST_CASE("synth config validation") {
  SynthConfig cfg = small_synth();
  cfg.anomaly_len = cfg.frames;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = small_synth();
  cfg.magnitude_boost = 1.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = small_synth();
  cfg.noise_sigma = 0.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

namespace {

// Feature files the manifest builder can point at.
void touch_features(const std::filesystem::path& dir, const std::vector<std::string>& names) {
  FeatureSequence seq;
  seq.data = Matrix(10, 2);
  for (double& v : seq.data.data()) v = 1.0;
  for (const std::string& name : names) encode_feature_file(seq, dir / name);
}

}  // namespace

TEST_CASE("build_manifest assembles a valid manifest from source pools") {
  testsup::TmpDir tmp("build_manifest");
  touch_features(tmp.path(), {"a0.ftbf", "a1.ftbf", "n0.ftbf", "n1.ftbf"});

  std::vector<AnomalousSource> anomalous = {
      {"", "a0.ftbf", 10, "ST", {{2, 6}}, Split::train},
      {"", "a1.ftbf", 10, "TC", {{1, 4}}, Split::test},
  };
  std::vector<NormalSource> normals = {
      {"", "n0.ftbf", 10},
      {"", "n1.ftbf", 10},
  };

  std::vector<ManifestEntry> entries = build_manifest(anomalous, normals, {}, tmp.path());
  CHECK(entries.size() == 4);
  CHECK(validate_manifest(entries).ok());

  std::size_t train_count = 0;
  for (const ManifestEntry& e : entries) {
    if (e.split == Split::train) ++train_count;
    if (e.video_id == "a0") CHECK(e.class_tag == "ST");
  }
  CHECK(train_count == 3);  // a0 + both normals
}

TEST_CASE("build_manifest applies the seeded split rule to undecided sources") {
  testsup::TmpDir tmp("build_split_rule");
  std::vector<std::string> names;
  std::vector<AnomalousSource> anomalous;
  for (int i = 0; i < 10; ++i) {
    const std::string name = "a" + std::to_string(i) + ".ftbf";
    names.push_back(name);
    anomalous.push_back({"", name, 10, "OO", {{0, 5}}, std::nullopt});
  }
  names.push_back("n.ftbf");
  touch_features(tmp.path(), names);
  std::vector<NormalSource> normals = {{"", "n.ftbf", 10}};

  SplitRule rule{0.3, 9};
  std::vector<ManifestEntry> first = build_manifest(anomalous, normals, rule, tmp.path());
  std::vector<ManifestEntry> second = build_manifest(anomalous, normals, rule, tmp.path());

  std::size_t test_count = 0;
  for (std::size_t i = 0; i < first.size(); ++i) {
    CHECK(first[i].split == second[i].split);  // deterministic
    if (first[i].split == Split::test) ++test_count;
  }
  CHECK(test_count == 3);  // round(0.3 * 10)
}

TEST_CASE("build_manifest rejects bad sources") {
  testsup::TmpDir tmp("build_errors");
  touch_features(tmp.path(), {"a.ftbf", "n.ftbf"});

  SUBCASE("unknown class tag") {
    std::vector<AnomalousSource> anomalous = {{"", "a.ftbf", 10, "XX", {{0, 3}}, Split::train}};
    CHECK_THROWS_WITH_AS(build_manifest(anomalous, {{"", "n.ftbf", 10}}, {}, tmp.path()),
                         doctest::Contains("unknown class tag"), Error);
  }
  SUBCASE("test source without intervals") {
    std::vector<AnomalousSource> anomalous = {{"", "a.ftbf", 10, "ST", {}, Split::test}};
    CHECK_THROWS_WITH_AS(build_manifest(anomalous, {{"", "n.ftbf", 10}}, {}, tmp.path()),
                         doctest::Contains("no annotated intervals"), Error);
  }
  SUBCASE("duplicate video id") {
    std::vector<AnomalousSource> anomalous = {
        {"dup", "a.ftbf", 10, "ST", {{0, 3}}, Split::train},
        {"dup", "a.ftbf", 10, "AH", {{0, 3}}, Split::train},
    };
    CHECK_THROWS_WITH_AS(build_manifest(anomalous, {{"", "n.ftbf", 10}}, {}, tmp.path()),
                         doctest::Contains("duplicate"), Error);
  }
  SUBCASE("missing feature file") {
    std::vector<AnomalousSource> anomalous = {{"", "gone.ftbf", 10, "ST", {{0, 3}}, Split::train}};
    CHECK_THROWS_WITH_AS(build_manifest(anomalous, {{"", "n.ftbf", 10}}, {}, tmp.path()),
                         doctest::Contains("missing"), Error);
  }
}

TEST_CASE("source pools parse from jsonl") {
  testsup::TmpDir tmp("source_parse");
  {
    std::ofstream out(tmp / "anom.jsonl");
    out << R"({"feature_path": "a.ftbf", "frame_count": 20, "class_tag": "VP",)"
        << R"( "anomaly_intervals": [[3, 9]], "split": "test"})" << "\n";
    out << R"({"feature_path": "b.ftbf", "frame_count": 30, "class_tag": "LA"})" << "\n";
  }
  {
    std::ofstream out(tmp / "norm.jsonl");
    out << R"({"feature_path": "n.ftbf", "frame_count": 40, "video_id": "named"})" << "\n";
  }

  auto anomalous = read_anomalous_sources(tmp / "anom.jsonl");
  REQUIRE(anomalous.size() == 2);
  CHECK(anomalous[0].class_tag == "VP");
  CHECK(anomalous[0].split == Split::test);
  CHECK(anomalous[0].intervals == std::vector<FrameInterval>{{3, 9}});
  CHECK(!anomalous[1].split.has_value());

  auto normals = read_normal_sources(tmp / "norm.jsonl");
  REQUIRE(normals.size() == 1);
  CHECK(normals[0].video_id == "named");
  CHECK(normals[0].frame_count == 40);

  std::ofstream(tmp / "bad_norm.jsonl")
      << R"({"feature_path": "n.ftbf", "frame_count": 4, "anomaly_intervals": [[1, 2]]})" << "\n";
  CHECK_THROWS_WITH_AS(read_normal_sources(tmp / "bad_norm.jsonl"),
                       doctest::Contains("normal source lists anomaly intervals"), Error);
}
