#include "manifest.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "error.hpp"
#include "features.hpp"

namespace wsvad {

using nlohmann::json;

bool is_known_class_tag(const std::string& tag) {
  for (const char* known : kClassTags) {
    if (tag == known) return true;
  }
  return false;
}

std::string to_string(Split split) { return split == Split::train ? "train" : "test"; }
std::string to_string(Label label) { return label == Label::normal ? "normal" : "anomaly"; }

Split split_from_string(const std::string& text) {
  if (text == "train") return Split::train;
  if (text == "test") return Split::test;
  fail(ErrorCode::format, "unknown split: " + text);
}

Label label_from_string(const std::string& text) {
  if (text == "normal") return Label::normal;
  if (text == "anomaly") return Label::anomaly;
  fail(ErrorCode::format, "unknown label: " + text);
}

std::filesystem::path resolve_feature_path(const ManifestEntry& entry,
                                           const std::filesystem::path& base_dir) {
  std::filesystem::path p(entry.feature_path);
  if (p.is_absolute() || base_dir.empty()) return p;
  return base_dir / p;
}

std::string ValidationReport::to_text() const {
  std::ostringstream out;
  for (const Violation& v : violations) {
    if (!v.video_id.empty()) out << v.video_id << ": ";
    out << v.code << ": " << v.message << "\n";
  }
  return out.str();
}

std::string ValidationReport::to_json() const {
  json arr = json::array();
  for (const Violation& v : violations) {
    arr.push_back({{"video_id", v.video_id}, {"code", v.code}, {"message", v.message}});
  }
  return arr.dump();
}

namespace {

void check_entry(const ManifestEntry& e, std::vector<Violation>& out) {
  auto add = [&](const std::string& code, const std::string& message) {
    out.push_back({e.video_id, code, message});
  };

  if (e.video_id.empty()) add("empty-video-id", "video_id must be non-empty");
  if (e.feature_path.empty()) add("empty-feature-path", "feature_path must be non-empty");
  if (e.frame_count == 0) add("zero-frame-count", "frame_count must be positive");

  if (e.class_tag && !is_known_class_tag(*e.class_tag)) {
    add("unknown-class-tag", "class_tag '" + *e.class_tag + "' is not in the taxonomy");
  }

  uint32_t prev_end = 0;
  bool first = true;
  for (const FrameInterval& iv : e.anomaly_intervals) {
    if (iv.begin >= iv.end) {
      add("empty-interval", "interval [" + std::to_string(iv.begin) + ", " +
                                std::to_string(iv.end) + ") is empty or reversed");
    }
    if (iv.end > e.frame_count) {
      add("interval-out-of-bounds", "interval end " + std::to_string(iv.end) +
                                        " exceeds frame_count " + std::to_string(e.frame_count));
    }
    if (!first && iv.begin < prev_end) {
      add("intervals-unsorted", "intervals must be sorted and disjoint");
    }
    prev_end = iv.end;
    first = false;
  }

  if (e.label == Label::normal && !e.anomaly_intervals.empty()) {
    add("normal-with-intervals", "normal entry carries anomaly intervals");
  }

  if (e.split == Split::test) {
    if (e.label == Label::anomaly && !e.class_tag) {
      add("missing-class-tag", "test anomaly entry lacks a class_tag");
    }
    if (e.label == Label::normal && e.class_tag) {
      add("unexpected-class-tag", "test normal entry carries a class_tag");
    }
    if (e.label == Label::anomaly && e.anomaly_intervals.empty()) {
      add("missing-intervals", "test anomaly entry has no annotated intervals");
    }
  }
}

}  // namespace

ValidationReport validate_manifest(const std::vector<ManifestEntry>& entries,
                                   const ValidateOptions& options) {
  ValidationReport report;

  std::size_t train_normal = 0;
  std::size_t train_anomaly = 0;
  std::set<std::string> seen_ids;
  for (const ManifestEntry& e : entries) {
    check_entry(e, report.violations);
    if (!seen_ids.insert(e.video_id).second) {
      report.violations.push_back(
          {e.video_id, "duplicate-video-id", "video_id appears more than once"});
    }
    if (e.split == Split::train) {
      (e.label == Label::normal ? train_normal : train_anomaly) += 1;
    }
  }

  if (train_normal == 0) {
    report.violations.push_back({"", "no-normal-train",
                                 "weak-supervision precondition: no normal training videos"});
  }
  if (train_anomaly == 0) {
    report.violations.push_back({"", "no-anomaly-train",
                                 "weak-supervision precondition: no anomaly training videos"});
  }

  if (options.deep) {
    for (const ManifestEntry& e : entries) {
      try {
        FeatureSequence seq = decode_feature_file(resolve_feature_path(e, options.base_dir));
        if (seq.data.rows() != e.frame_count) {
          report.violations.push_back(
              {e.video_id, "feature-length-mismatch",
               "feature file has " + std::to_string(seq.data.rows()) + " rows but manifest says " +
                   std::to_string(e.frame_count) + " frames"});
        }
      } catch (const Error& err) {
        report.violations.push_back({e.video_id, "feature-decode-failure", err.what()});
      }
    }
  }

  // Deterministic and order-insensitive over entry permutations.
  std::sort(report.violations.begin(), report.violations.end(),
            [](const Violation& a, const Violation& b) {
              return std::tie(a.video_id, a.code, a.message) <
                     std::tie(b.video_id, b.code, b.message);
            });
  return report;
}

namespace {

ManifestEntry entry_from_json(const json& j, const std::filesystem::path& path, std::size_t line) {
  auto bad = [&](const std::string& what) -> void {
    fail(ErrorCode::format,
         path.string() + ":" + std::to_string(line) + ": " + what);
  };
  ManifestEntry e;
  try {
    e.video_id = j.at("video_id").get<std::string>();
    e.split = split_from_string(j.at("split").get<std::string>());
    e.label = label_from_string(j.at("label").get<std::string>());
    if (j.contains("class_tag") && !j.at("class_tag").is_null()) {
      e.class_tag = j.at("class_tag").get<std::string>();
    }
    e.feature_path = j.at("feature_path").get<std::string>();
    e.frame_count = j.at("frame_count").get<uint32_t>();
    if (j.contains("anomaly_intervals") && !j.at("anomaly_intervals").is_null()) {
      for (const json& pair : j.at("anomaly_intervals")) {
        if (!pair.is_array() || pair.size() != 2) bad("anomaly interval must be a [start, end) pair");
        e.anomaly_intervals.push_back({pair[0].get<uint32_t>(), pair[1].get<uint32_t>()});
      }
    }
  } catch (const json::exception& ex) {
    bad(std::string("malformed manifest entry: ") + ex.what());
  }
  return e;
}

}  // namespace

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    fail(ErrorCode::io, "cannot open manifest: " + path.string());
  }
  std::vector<ManifestEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      fail(ErrorCode::format,
           path.string() + ":" + std::to_string(line_no) + ": invalid JSON");
    }
    entries.push_back(entry_from_json(j, path, line_no));
  }
  return entries;
}

void write_manifest(const std::vector<ManifestEntry>& entries,
                    const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    fail(ErrorCode::io, "cannot open manifest for writing: " + path.string());
  }
  for (const ManifestEntry& e : entries) {
    json intervals = json::array();
    for (const FrameInterval& iv : e.anomaly_intervals) {
      intervals.push_back({iv.begin, iv.end});
    }
    json j = {
        {"video_id", e.video_id},
        {"split", to_string(e.split)},
        {"label", to_string(e.label)},
        {"class_tag", e.class_tag ? json(*e.class_tag) : json(nullptr)},
        {"feature_path", e.feature_path},
        {"frame_count", e.frame_count},
        {"anomaly_intervals", intervals},
    };
    out << j.dump() << "\n";
  }
  if (!out) {
    fail(ErrorCode::io, "write failure on manifest: " + path.string());
  }
}

}  // namespace wsvad
