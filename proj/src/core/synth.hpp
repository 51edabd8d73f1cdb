#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "manifest.hpp"

namespace wsvad {

// Desk-scale planted-anomaly dataset. Normal videos are a fixed Gaussian base
// direction with a slow directional drift and small per-frame noise;
// anomalous videos additionally contain one contiguous interval whose frames
// have their magnitude scaled by magnitude_boost while the direction rotates
// through the plane spanned by the base and a second random direction. The
// rotation averages the raw embedding toward zero under snippet pooling, so
// the spatial-only transform sees a weaker cue than the regularity-based
// ones.
struct SynthConfig {
  std::size_t n_normal = 10;
  std::size_t n_anomaly = 10;
  std::size_t frames = 256;  // T
  std::size_t dim = 32;      // D
  std::size_t anomaly_len = 32;
  double magnitude_boost = 3.0;
  double noise_sigma = 0.05;
  uint64_t seed = 0;

  void validate() const;
};

// Writes one .ftbf per video under out_dir/features plus out_dir/manifest.jsonl
// (70/30 train/test split of the anomalous videos, all normals in train) and
// returns the manifest path. Byte-identical for identical configs.
std::filesystem::path generate_synthetic_dataset(const SynthConfig& cfg,
                                                 const std::filesystem::path& out_dir);

struct AnomalousSource {
  std::string video_id;  // defaults to the feature file stem
  std::string feature_path;
  uint32_t frame_count = 0;
  std::string class_tag;
  std::vector<FrameInterval> intervals;
  std::optional<Split> split;  // explicit assignment overrides the rule
};

struct NormalSource {
  std::string video_id;
  std::string feature_path;
  uint32_t frame_count = 0;
};

struct SplitRule {
  double test_fraction = 0.3;
  uint64_t seed = 0;
};

// Assembles a manifest: normals always train; anomalous sources follow their
// explicit split when given, otherwise a seeded draw sends test_fraction of
// the interval-annotated ones to test. The result always passes
// validate_manifest or the call throws.
std::vector<ManifestEntry> build_manifest(const std::vector<AnomalousSource>& anomalous,
                                          const std::vector<NormalSource>& normals,
                                          const SplitRule& rule,
                                          const std::filesystem::path& base_dir);

std::vector<AnomalousSource> read_anomalous_sources(const std::filesystem::path& path);
std::vector<NormalSource> read_normal_sources(const std::filesystem::path& path);

}  // namespace wsvad
