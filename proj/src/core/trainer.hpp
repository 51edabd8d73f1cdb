#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "error.hpp"
#include "manifest.hpp"
#include "model.hpp"

namespace wsvad {

// Top-k feature-magnitude MIL: bags are whole videos carrying only their
// video-level label; the k highest-magnitude snippets of each bag drive a
// hinge on magnitude separation and a binary cross-entropy on their scores,
// with smoothness and sparsity regularizers on the abnormal bag.
struct TrainConfig {
  std::size_t top_k = 3;
  double margin = 100.0;
  double magnitude_weight = 1e-4;   // alpha
  double smoothness_weight = 8e-4;  // beta
  double sparsity_weight = 8e-4;    // gamma
  double learning_rate = 1e-3;
  double momentum = 0.9;
  std::size_t epochs = 50;
  std::size_t snippet_len = 16;
  uint64_t seed = 0;
  FtbMode ftb_mode = FtbMode::m3;
  std::size_t dct_lowpass_cutoff = 0;

  void validate() const;
};

struct Bag {
  std::string video_id;
  Label label = Label::normal;
  Matrix snippets;  // transformed features, one row per snippet
};

struct TopkSelection {
  std::vector<std::size_t> indices;  // ascending; ties broken toward lower index
  double mean = 0.0;
};

// Picks the min(k, T') largest values. Ties go to the lower index so the
// selection matches a stable full sort.
TopkSelection topk_select(std::span<const double> magnitudes, std::size_t k);

struct LossBreakdown {
  double total = 0.0;
  double cls = 0.0;     // clamped binary cross-entropy on top-k scores
  double mag = 0.0;     // hinge max(0, margin - mu_abnormal + mu_normal)
  double smooth = 0.0;  // sum of squared consecutive score differences, abnormal bag
  double sparse = 0.0;  // sum of scores, abnormal bag
};

LossBreakdown mil_loss(const SnippetOutput& abnormal, const SnippetOutput& normal,
                       const TrainConfig& cfg);

struct LossGradients {
  LossBreakdown loss;
  std::vector<double> d_scores_abnormal, d_magnitudes_abnormal;
  std::vector<double> d_scores_normal, d_magnitudes_normal;
};

LossGradients mil_loss_gradients(const SnippetOutput& abnormal, const SnippetOutput& normal,
                                 const TrainConfig& cfg);

struct EpochStats {
  std::size_t epoch = 0;  // 1-based
  double mean_total = 0.0;
  double mean_cls = 0.0;
  double mean_mag = 0.0;
  double mean_smooth = 0.0;
  double mean_sparse = 0.0;
};

struct TrainResult {
  ModelParams params;
  std::vector<EpochStats> history;
};

// Thrown when the manifest fails validation; carries the full report.
class TrainValidationError : public Error {
 public:
  explicit TrainValidationError(ValidationReport report)
      : Error(ErrorCode::validation,
              "manifest failed validation:\n" + report.to_text()),
        report_(std::move(report)) {}
  const ValidationReport& report() const { return report_; }

 private:
  ValidationReport report_;
};

Bag load_bag(const ManifestEntry& entry, const std::filesystem::path& base_dir,
             const TrainConfig& cfg);

// Momentum-SGD over seeded random (abnormal, normal) bag pairs. Deterministic
// per seed; model_cfg.seed controls the init, cfg.seed the pairing order.
TrainResult train(const std::vector<ManifestEntry>& manifest,
                  const std::filesystem::path& base_dir, ModelConfig model_cfg,
                  const TrainConfig& cfg);

// Compares analytic gradients of the total loss against central finite
// differences over every parameter element; returns the max relative error
// max(|ga - gf| / max(|ga|, |gf|, 1e-8)).
double gradient_check(const ModelParams& params, const Bag& abnormal, const Bag& normal,
                      const TrainConfig& cfg, double eps);

// One JSON object per epoch: {epoch, mean_total, mean_cls, mean_mag,
// mean_smooth, mean_sparse}.
void write_history(const std::vector<EpochStats>& history, const std::filesystem::path& path);

}  // namespace wsvad
