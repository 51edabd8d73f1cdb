#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "manifest.hpp"

namespace wsvad {

struct ScoreSeries {
  std::string video_id;
  std::vector<double> frame_scores;  // in [0, 1], one per frame
};

// Broadcasts snippet scores back to frames: frame f takes the score of
// snippet floor(f / snippet_len). The snippet count must equal
// ceil(frame_count / snippet_len).
std::vector<double> expand_scores(std::span<const double> snippet_scores,
                                  std::size_t snippet_len, std::size_t frame_count);

// Probability that a uniformly random positive outscores a uniformly random
// negative, ties counted 1/2. Computed via midranks; equals the pairwise
// definition exactly.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

struct EvalOptions {
  // Adds a per-video macro average next to the micro-averaged overall AUC.
  bool macro_average = false;
  // Pools the normal frames of every test video as negatives for each
  // class-wise AUC instead of only the frames of that class's own videos.
  bool cross_class_negatives = false;
};

struct EvalReport {
  double overall_auc = 0.0;
  std::map<std::string, double> class_auc;
  std::map<std::string, std::size_t> class_frames;
  std::size_t total_frames = 0;
  std::optional<double> macro_auc;
};

// Frame labels come from the manifest's anomaly intervals: a frame is
// positive iff it lies inside any interval.
std::vector<int> frame_labels(const ManifestEntry& entry);

// Micro-averaged frame-level AUC over the concatenated test videos, plus one
// AUC per anomaly class over that class's videos. Classes lacking positive
// or negative frames are omitted.
EvalReport evaluate(const std::vector<ManifestEntry>& test_entries,
                    const std::vector<ScoreSeries>& scores, const EvalOptions& options = {});

void write_report(const EvalReport& report, const std::filesystem::path& path);

// Score CSV: header "frame_index,score", one row per frame.
void write_score_csv(const ScoreSeries& series, const std::filesystem::path& path);
ScoreSeries read_score_csv(const std::filesystem::path& path, const std::string& video_id);

// Heatmap CSV: header "frame_index,score,label" with interval-derived labels.
void write_heatmap_csv(const ScoreSeries& series, const ManifestEntry& entry,
                       const std::filesystem::path& path);

}  // namespace wsvad
