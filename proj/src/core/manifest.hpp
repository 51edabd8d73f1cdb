#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace wsvad {

enum class Split { train, test };
enum class Label { normal, anomaly };

// Collision/out-of-control anomaly taxonomy used by the test split.
inline constexpr const char* kClassTags[] = {"ST", "AH", "LA", "OC", "TC", "VP", "VO", "OO"};

bool is_known_class_tag(const std::string& tag);

// Half-open frame interval [begin, end), 0-indexed.
struct FrameInterval {
  uint32_t begin = 0;
  uint32_t end = 0;
  friend bool operator==(const FrameInterval&, const FrameInterval&) = default;
};

struct ManifestEntry {
  std::string video_id;
  Split split = Split::train;
  Label label = Label::normal;
  std::optional<std::string> class_tag;
  std::string feature_path;
  uint32_t frame_count = 0;
  std::vector<FrameInterval> anomaly_intervals;
};

struct Violation {
  std::string video_id;  // empty for manifest-wide violations
  std::string code;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  std::string to_text() const;
  std::string to_json() const;
};

struct ValidateOptions {
  bool deep = false;               // also decode every referenced feature file
  std::filesystem::path base_dir;  // resolves relative feature paths
};

// Violations are data, not exceptions: the report is empty iff the manifest
// satisfies the weak-supervision precondition (train split holds at least one
// normal and one anomaly entry), every per-entry invariant, and id uniqueness.
ValidationReport validate_manifest(const std::vector<ManifestEntry>& entries,
                                   const ValidateOptions& options = {});

// Manifests are line-delimited JSON, one entry per line, keys: video_id,
// split, label, class_tag, feature_path, frame_count, anomaly_intervals.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);
void write_manifest(const std::vector<ManifestEntry>& entries,
                    const std::filesystem::path& path);

std::string to_string(Split split);
std::string to_string(Label label);
Split split_from_string(const std::string& text);
Label label_from_string(const std::string& text);

std::filesystem::path resolve_feature_path(const ManifestEntry& entry,
                                           const std::filesystem::path& base_dir);

}  // namespace wsvad
