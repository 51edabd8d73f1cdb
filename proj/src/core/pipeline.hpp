#pragma once

#include <filesystem>
#include <optional>

#include "evaluator.hpp"
#include "synth.hpp"
#include "trainer.hpp"

namespace wsvad {

// File-level orchestration shared by the C API, the CLI, and the acceptance
// suite. Paths inside a manifest resolve against base_dir; an empty base_dir
// means the manifest's own directory.

struct TrainPaths {
  std::filesystem::path checkpoint;  // <out_dir>/checkpoint.wsck
  std::filesystem::path history;     // <out_dir>/history.jsonl
};

// Trains on the manifest's train split and writes the checkpoint and epoch
// history under out_dir. model_cfg.input_dim of 0 is inferred from the data.
TrainPaths train_to_dir(const std::filesystem::path& manifest_path,
                        const std::filesystem::path& base_dir, ModelConfig model_cfg,
                        const TrainConfig& cfg, const std::filesystem::path& out_dir);

// Scores every video of the chosen split ("test", "train", or "all") with a
// saved checkpoint and writes one <video_id>.csv per video under out_dir.
void score_to_dir(const std::filesystem::path& checkpoint_path,
                  const std::filesystem::path& manifest_path,
                  const std::filesystem::path& base_dir, const std::string& split,
                  const std::filesystem::path& out_dir);

// Evaluates score CSVs against the manifest's test split; writes the report
// JSON and, when heatmap_dir is given, one heatmap CSV per test video.
EvalReport evaluate_files(const std::filesystem::path& manifest_path,
                          const std::filesystem::path& scores_dir,
                          const EvalOptions& options,
                          const std::filesystem::path& report_path,
                          const std::optional<std::filesystem::path>& heatmap_dir = {});

std::filesystem::path effective_base_dir(const std::filesystem::path& manifest_path,
                                         const std::filesystem::path& base_dir);

}  // namespace wsvad
