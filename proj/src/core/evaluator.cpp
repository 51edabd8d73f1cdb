#include "evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "json.hpp"

#include "error.hpp"
#include "features.hpp"

namespace wsvad {

using nlohmann::json;

std::vector<double> expand_scores(std::span<const double> snippet_scores,
                                  std::size_t snippet_len, std::size_t frame_count) {
  if (snippet_len < 1) fail(ErrorCode::argument, "expand_scores: snippet_len must be >= 1");
  if (frame_count < 1) fail(ErrorCode::argument, "expand_scores: frame_count must be >= 1");
  const std::size_t expected = snippet_count(frame_count, snippet_len);
  if (snippet_scores.size() != expected) {
    fail(ErrorCode::shape, "expand_scores: " + std::to_string(snippet_scores.size()) +
                               " snippet scores but ceil(" + std::to_string(frame_count) + "/" +
                               std::to_string(snippet_len) + ") = " + std::to_string(expected));
  }
  std::vector<double> frames(frame_count);
  for (std::size_t f = 0; f < frame_count; ++f) {
    frames[f] = snippet_scores[f / snippet_len];
  }
  return frames;
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    fail(ErrorCode::argument, "roc_auc: scores and labels differ in length");
  }
  const std::size_t n = scores.size();
  for (double s : scores) {
    if (!std::isfinite(s)) fail(ErrorCode::argument, "roc_auc: scores must be finite");
  }
  std::size_t positives = 0;
  for (int label : labels) {
    if (label != 0 && label != 1) fail(ErrorCode::argument, "roc_auc: labels must be 0 or 1");
    positives += static_cast<std::size_t>(label);
  }
  const std::size_t negatives = n - positives;
  if (positives == 0 || negatives == 0) {
    fail(ErrorCode::argument, "roc_auc: need at least one positive and one negative label");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Midranks over tie groups; the numerator stays an exact multiple of 1/2,
  // so the result matches the brute-force pairwise count bit for bit.
  double positive_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);  // 1-based average
    for (std::size_t q = i; q < j; ++q) {
      if (labels[order[q]] == 1) positive_rank_sum += midrank;
    }
    i = j;
  }

  const double np = static_cast<double>(positives);
  const double nn = static_cast<double>(negatives);
  const double wins_doubled = 2.0 * (positive_rank_sum - np * (np + 1.0) / 2.0);
  return wins_doubled / (2.0 * np * nn);
}

std::vector<int> frame_labels(const ManifestEntry& entry) {
  std::vector<int> labels(entry.frame_count, 0);
  for (const FrameInterval& iv : entry.anomaly_intervals) {
    for (uint32_t f = iv.begin; f < iv.end && f < entry.frame_count; ++f) labels[f] = 1;
  }
  return labels;
}

EvalReport evaluate(const std::vector<ManifestEntry>& test_entries,
                    const std::vector<ScoreSeries>& scores, const EvalOptions& options) {
  std::map<std::string, const ScoreSeries*> by_id;
  for (const ScoreSeries& s : scores) by_id[s.video_id] = &s;

  std::vector<double> all_scores;
  std::vector<int> all_labels;
  std::map<std::string, std::vector<double>> class_scores;
  std::map<std::string, std::vector<int>> class_labels;
  std::vector<double> per_video_auc;

  for (const ManifestEntry& entry : test_entries) {
    if (entry.split != Split::test) continue;
    auto found = by_id.find(entry.video_id);
    if (found == by_id.end()) {
      fail(ErrorCode::validation, "evaluate: no scores for test video '" + entry.video_id + "'");
    }
    const ScoreSeries& series = *found->second;
    if (series.frame_scores.size() != entry.frame_count) {
      fail(ErrorCode::shape, "evaluate: video '" + entry.video_id + "' has " +
                                 std::to_string(series.frame_scores.size()) +
                                 " scores for " + std::to_string(entry.frame_count) + " frames");
    }
    for (double v : series.frame_scores) {
      if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
        fail(ErrorCode::validation,
             "evaluate: video '" + entry.video_id + "' has scores outside [0, 1]");
      }
    }

    const std::vector<int> labels = frame_labels(entry);
    all_scores.insert(all_scores.end(), series.frame_scores.begin(), series.frame_scores.end());
    all_labels.insert(all_labels.end(), labels.begin(), labels.end());

    if (entry.class_tag) {
      auto& cs = class_scores[*entry.class_tag];
      auto& cl = class_labels[*entry.class_tag];
      cs.insert(cs.end(), series.frame_scores.begin(), series.frame_scores.end());
      cl.insert(cl.end(), labels.begin(), labels.end());
    }
    if (options.cross_class_negatives) {
      // Every video's normal frames also count as negatives for the other
      // classes.
      for (const char* tag : kClassTags) {
        if (entry.class_tag && *entry.class_tag == tag) continue;
        auto& cs = class_scores[tag];
        auto& cl = class_labels[tag];
        for (std::size_t f = 0; f < labels.size(); ++f) {
          if (labels[f] == 0) {
            cs.push_back(series.frame_scores[f]);
            cl.push_back(0);
          }
        }
      }
    }

    if (options.macro_average) {
      const bool has_pos = std::count(labels.begin(), labels.end(), 1) > 0;
      const bool has_neg = std::count(labels.begin(), labels.end(), 0) > 0;
      if (has_pos && has_neg) {
        per_video_auc.push_back(roc_auc(series.frame_scores, labels));
      }
    }
  }

  if (all_scores.empty()) {
    fail(ErrorCode::validation, "evaluate: manifest has no test entries");
  }

  EvalReport report;
  report.total_frames = all_scores.size();
  report.overall_auc = roc_auc(all_scores, all_labels);
  for (const auto& [tag, cs] : class_scores) {
    const auto& cl = class_labels[tag];
    const auto pos = std::count(cl.begin(), cl.end(), 1);
    if (pos == 0 || static_cast<std::size_t>(pos) == cl.size()) continue;
    report.class_auc[tag] = roc_auc(cs, cl);
    report.class_frames[tag] = cs.size();
  }
  if (options.macro_average && !per_video_auc.empty()) {
    report.macro_auc = std::accumulate(per_video_auc.begin(), per_video_auc.end(), 0.0) /
                       static_cast<double>(per_video_auc.size());
  }
  return report;
}

void write_report(const EvalReport& report, const std::filesystem::path& path) {
  json frames = {{"total", report.total_frames}};
  for (const auto& [tag, count] : report.class_frames) frames[tag] = count;
  json j = {
      {"overall_auc", report.overall_auc},
      {"class_auc", report.class_auc},
      {"frames_evaluated", frames},
  };
  if (report.macro_auc) j["macro_auc"] = *report.macro_auc;

  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorCode::io, "cannot open report for writing: " + path.string());
  out << j.dump(2) << "\n";
  if (!out) fail(ErrorCode::io, "write failure on report: " + path.string());
}

namespace {

// Shortest representation that round-trips a double exactly.
std::string format_score(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  double parsed = std::strtod(buf, nullptr);
  if (parsed == v) {
    for (int precision = 1; precision < 17; ++precision) {
      char shorter[32];
      std::snprintf(shorter, sizeof(shorter), "%.*g", precision, v);
      if (std::strtod(shorter, nullptr) == v) return shorter;
    }
  }
  return buf;
}

}  // namespace

void write_score_csv(const ScoreSeries& series, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorCode::io, "cannot open score CSV for writing: " + path.string());
  out << "frame_index,score\n";
  for (std::size_t f = 0; f < series.frame_scores.size(); ++f) {
    out << f << "," << format_score(series.frame_scores[f]) << "\n";
  }
  if (!out) fail(ErrorCode::io, "write failure on score CSV: " + path.string());
}

ScoreSeries read_score_csv(const std::filesystem::path& path, const std::string& video_id) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open score CSV: " + path.string());
  ScoreSeries series;
  series.video_id = video_id;
  std::string line;
  if (!std::getline(in, line) || line != "frame_index,score") {
    fail(ErrorCode::format, "score CSV missing its header: " + path.string());
  }
  std::size_t expected_index = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::size_t comma = line.find(',');
    if (comma == std::string::npos) {
      fail(ErrorCode::format, "malformed score CSV row: " + path.string());
    }
    char* end = nullptr;
    const unsigned long index = std::strtoul(line.c_str(), &end, 10);
    if (end != line.c_str() + comma || index != expected_index) {
      fail(ErrorCode::format, "score CSV rows malformed or out of order: " + path.string());
    }
    const char* score_text = line.c_str() + comma + 1;
    const double score = std::strtod(score_text, &end);
    if (end == score_text || *end != '\0') {
      fail(ErrorCode::format, "malformed score value in CSV: " + path.string());
    }
    series.frame_scores.push_back(score);
    ++expected_index;
  }
  return series;
}

void write_heatmap_csv(const ScoreSeries& series, const ManifestEntry& entry,
                       const std::filesystem::path& path) {
  if (series.frame_scores.size() != entry.frame_count) {
    fail(ErrorCode::shape, "heatmap: score length does not match frame_count for '" +
                               entry.video_id + "'");
  }
  const std::vector<int> labels = frame_labels(entry);
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorCode::io, "cannot open heatmap CSV for writing: " + path.string());
  out << "frame_index,score,label\n";
  for (std::size_t f = 0; f < series.frame_scores.size(); ++f) {
    out << f << "," << format_score(series.frame_scores[f]) << "," << labels[f] << "\n";
  }
  if (!out) fail(ErrorCode::io, "write failure on heatmap CSV: " + path.string());
}

}  // namespace wsvad
