#include "pipeline.hpp"

#include "error.hpp"
#include "features.hpp"

namespace wsvad {

std::filesystem::path effective_base_dir(const std::filesystem::path& manifest_path,
                                         const std::filesystem::path& base_dir) {
  if (!base_dir.empty()) return base_dir;
  return manifest_path.parent_path();
}

TrainPaths train_to_dir(const std::filesystem::path& manifest_path,
                        const std::filesystem::path& base_dir, ModelConfig model_cfg,
                        const TrainConfig& cfg, const std::filesystem::path& out_dir) {
  const std::vector<ManifestEntry> manifest = read_manifest(manifest_path);
  const std::filesystem::path base = effective_base_dir(manifest_path, base_dir);

  TrainResult result = train(manifest, base, model_cfg, cfg);

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) fail(ErrorCode::io, "cannot create output directory: " + out_dir.string());

  TrainPaths paths{out_dir / "checkpoint.wsck", out_dir / "history.jsonl"};
  save_checkpoint({result.params, cfg.ftb_mode, cfg.snippet_len, cfg.dct_lowpass_cutoff},
                  paths.checkpoint);
  write_history(result.history, paths.history);
  return paths;
}

void score_to_dir(const std::filesystem::path& checkpoint_path,
                  const std::filesystem::path& manifest_path,
                  const std::filesystem::path& base_dir, const std::string& split,
                  const std::filesystem::path& out_dir) {
  if (split != "test" && split != "train" && split != "all") {
    fail(ErrorCode::argument, "score: split must be test, train, or all");
  }
  const Checkpoint ckpt = load_checkpoint(checkpoint_path);
  const std::vector<ManifestEntry> manifest = read_manifest(manifest_path);
  const std::filesystem::path base = effective_base_dir(manifest_path, base_dir);

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) fail(ErrorCode::io, "cannot create output directory: " + out_dir.string());

  for (const ManifestEntry& entry : manifest) {
    if (split == "test" && entry.split != Split::test) continue;
    if (split == "train" && entry.split != Split::train) continue;

    FeatureSequence seq = decode_feature_file(resolve_feature_path(entry, base));
    TransformedFeature tf = apply_ftb(seq, ckpt.ftb_mode, {ckpt.dct_lowpass_cutoff});
    Matrix snippets = snippetize_rows(tf.data, ckpt.snippet_len);
    SnippetOutput out = forward(ckpt.params, snippets);

    ScoreSeries series;
    series.video_id = entry.video_id;
    series.frame_scores = expand_scores(out.scores, ckpt.snippet_len, entry.frame_count);
    write_score_csv(series, out_dir / (entry.video_id + ".csv"));
  }
}

EvalReport evaluate_files(const std::filesystem::path& manifest_path,
                          const std::filesystem::path& scores_dir,
                          const EvalOptions& options,
                          const std::filesystem::path& report_path,
                          const std::optional<std::filesystem::path>& heatmap_dir) {
  const std::vector<ManifestEntry> manifest = read_manifest(manifest_path);

  std::vector<ScoreSeries> scores;
  for (const ManifestEntry& entry : manifest) {
    if (entry.split != Split::test) continue;
    const std::filesystem::path csv = scores_dir / (entry.video_id + ".csv");
    if (!std::filesystem::exists(csv)) {
      fail(ErrorCode::validation,
           "evaluate: no score CSV for test video '" + entry.video_id + "' at " + csv.string());
    }
    scores.push_back(read_score_csv(csv, entry.video_id));
  }

  EvalReport report = evaluate(manifest, scores, options);
  write_report(report, report_path);

  if (heatmap_dir) {
    std::error_code ec;
    std::filesystem::create_directories(*heatmap_dir, ec);
    if (ec) fail(ErrorCode::io, "cannot create heatmap directory: " + heatmap_dir->string());
    std::size_t i = 0;
    for (const ManifestEntry& entry : manifest) {
      if (entry.split != Split::test) continue;
      write_heatmap_csv(scores[i++], entry, *heatmap_dir / (entry.video_id + ".csv"));
    }
  }
  return report;
}

}  // namespace wsvad
