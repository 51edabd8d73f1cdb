#include "trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "json.hpp"

#include "error.hpp"
#include "features.hpp"
#include "rng.hpp"

namespace wsvad {

using nlohmann::json;

namespace {

constexpr double kProbClamp = 1e-7;

double clamp_prob(double p) { return std::clamp(p, kProbClamp, 1.0 - kProbClamp); }

}  // namespace

void TrainConfig::validate() const {
  if (top_k < 1) fail(ErrorCode::argument, "train config: top_k must be >= 1");
  if (margin <= 0.0) fail(ErrorCode::argument, "train config: margin must be positive");
  if (magnitude_weight < 0.0 || smoothness_weight < 0.0 || sparsity_weight < 0.0) {
    fail(ErrorCode::argument, "train config: loss weights must be nonnegative");
  }
  if (learning_rate <= 0.0) fail(ErrorCode::argument, "train config: learning_rate must be positive");
  if (momentum < 0.0 || momentum >= 1.0) {
    fail(ErrorCode::argument, "train config: momentum must be in [0, 1)");
  }
  if (epochs < 1) fail(ErrorCode::argument, "train config: epochs must be >= 1");
  if (snippet_len < 1) fail(ErrorCode::argument, "train config: snippet_len must be >= 1");
}

TopkSelection topk_select(std::span<const double> magnitudes, std::size_t k) {
  if (k < 1) fail(ErrorCode::argument, "topk_select: k must be >= 1");
  if (magnitudes.empty()) fail(ErrorCode::argument, "topk_select: empty magnitude vector");

  const std::size_t k_eff = std::min(k, magnitudes.size());
  std::vector<std::size_t> order(magnitudes.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return magnitudes[a] > magnitudes[b];
  });
  order.resize(k_eff);
  std::sort(order.begin(), order.end());

  TopkSelection sel;
  sel.indices = std::move(order);
  double sum = 0.0;
  for (std::size_t i : sel.indices) sum += magnitudes[i];
  sel.mean = sum / static_cast<double>(k_eff);
  return sel;
}

LossGradients mil_loss_gradients(const SnippetOutput& abnormal, const SnippetOutput& normal,
                                 const TrainConfig& cfg) {
  cfg.validate();
  const std::size_t t_abn = abnormal.scores.size();
  const std::size_t t_norm = normal.scores.size();
  if (t_abn == 0 || t_norm == 0) {
    fail(ErrorCode::argument, "mil_loss: bags must contain at least one snippet");
  }

  LossGradients out;
  out.d_scores_abnormal.assign(t_abn, 0.0);
  out.d_magnitudes_abnormal.assign(t_abn, 0.0);
  out.d_scores_normal.assign(t_norm, 0.0);
  out.d_magnitudes_normal.assign(t_norm, 0.0);

  const TopkSelection top_abn = topk_select(abnormal.magnitudes, cfg.top_k);
  const TopkSelection top_norm = topk_select(normal.magnitudes, cfg.top_k);
  const double k_abn = static_cast<double>(top_abn.indices.size());
  const double k_norm = static_cast<double>(top_norm.indices.size());

  // Magnitude hinge on the top-k means.
  const double separation = cfg.margin - top_abn.mean + top_norm.mean;
  out.loss.mag = std::max(0.0, separation);
  if (separation > 0.0) {
    for (std::size_t i : top_abn.indices) {
      out.d_magnitudes_abnormal[i] -= cfg.magnitude_weight / k_abn;
    }
    for (std::size_t i : top_norm.indices) {
      out.d_magnitudes_normal[i] += cfg.magnitude_weight / k_norm;
    }
  }

  // Classification: mean score over the magnitude-selected snippets, pushed
  // toward 1 for the abnormal bag and 0 for the normal bag.
  double p_abn = 0.0;
  for (std::size_t i : top_abn.indices) p_abn += abnormal.scores[i];
  p_abn /= k_abn;
  double p_norm = 0.0;
  for (std::size_t i : top_norm.indices) p_norm += normal.scores[i];
  p_norm /= k_norm;

  const double pc_abn = clamp_prob(p_abn);
  const double pc_norm = clamp_prob(p_norm);
  out.loss.cls = -std::log(pc_abn) - std::log(1.0 - pc_norm);
  if (p_abn > kProbClamp && p_abn < 1.0 - kProbClamp) {
    const double g = -1.0 / (pc_abn * k_abn);
    for (std::size_t i : top_abn.indices) out.d_scores_abnormal[i] += g;
  }
  if (p_norm > kProbClamp && p_norm < 1.0 - kProbClamp) {
    const double g = 1.0 / ((1.0 - pc_norm) * k_norm);
    for (std::size_t i : top_norm.indices) out.d_scores_normal[i] += g;
  }

  // Smoothness and sparsity act on the abnormal bag only.
  for (std::size_t t = 0; t + 1 < t_abn; ++t) {
    const double diff = abnormal.scores[t] - abnormal.scores[t + 1];
    out.loss.smooth += diff * diff;
    out.d_scores_abnormal[t] += cfg.smoothness_weight * 2.0 * diff;
    out.d_scores_abnormal[t + 1] -= cfg.smoothness_weight * 2.0 * diff;
  }
  for (std::size_t t = 0; t < t_abn; ++t) {
    out.loss.sparse += abnormal.scores[t];
    out.d_scores_abnormal[t] += cfg.sparsity_weight;
  }

  out.loss.total = out.loss.cls + cfg.magnitude_weight * out.loss.mag +
                   cfg.smoothness_weight * out.loss.smooth +
                   cfg.sparsity_weight * out.loss.sparse;
  return out;
}

LossBreakdown mil_loss(const SnippetOutput& abnormal, const SnippetOutput& normal,
                       const TrainConfig& cfg) {
  return mil_loss_gradients(abnormal, normal, cfg).loss;
}

Bag load_bag(const ManifestEntry& entry, const std::filesystem::path& base_dir,
             const TrainConfig& cfg) {
  FeatureSequence seq = decode_feature_file(resolve_feature_path(entry, base_dir));
  TransformedFeature tf = apply_ftb(seq, cfg.ftb_mode, {cfg.dct_lowpass_cutoff});
  Bag bag;
  bag.video_id = entry.video_id;
  bag.label = entry.label;
  bag.snippets = snippetize_rows(tf.data, cfg.snippet_len);
  return bag;
}

namespace {

struct StepAccum {
  double total = 0.0, cls = 0.0, mag = 0.0, smooth = 0.0, sparse = 0.0;
  std::size_t steps = 0;

  void add(const LossBreakdown& loss) {
    total += loss.total;
    cls += loss.cls;
    mag += loss.mag;
    smooth += loss.smooth;
    sparse += loss.sparse;
    steps += 1;
  }

  EpochStats stats(std::size_t epoch) const {
    const double n = static_cast<double>(steps);
    return {epoch, total / n, cls / n, mag / n, smooth / n, sparse / n};
  }
};

}  // namespace

TrainResult train(const std::vector<ManifestEntry>& manifest,
                  const std::filesystem::path& base_dir, ModelConfig model_cfg,
                  const TrainConfig& cfg) {
  cfg.validate();

  ValidationReport report = validate_manifest(manifest, {.deep = true, .base_dir = base_dir});
  if (!report.ok()) {
    throw TrainValidationError(std::move(report));
  }

  std::vector<Bag> abnormal_bags;
  std::vector<Bag> normal_bags;
  for (const ManifestEntry& entry : manifest) {
    if (entry.split != Split::train) continue;
    Bag bag = load_bag(entry, base_dir, cfg);
    (entry.label == Label::anomaly ? abnormal_bags : normal_bags).push_back(std::move(bag));
  }

  if (model_cfg.input_dim == 0 && !abnormal_bags.empty()) {
    model_cfg.input_dim = abnormal_bags.front().snippets.cols();
  }
  for (const Bag& bag : abnormal_bags) {
    if (bag.snippets.cols() != model_cfg.input_dim) {
      fail(ErrorCode::shape, "train: bag '" + bag.video_id + "' dimension mismatch");
    }
  }
  for (const Bag& bag : normal_bags) {
    if (bag.snippets.cols() != model_cfg.input_dim) {
      fail(ErrorCode::shape, "train: bag '" + bag.video_id + "' dimension mismatch");
    }
  }

  TrainResult result;
  result.params = init_model(model_cfg);
  ModelParams velocity = zeros_like(result.params);
  ModelParams grads = zeros_like(result.params);

  SeededRng pairing_rng(mix_seed(cfg.seed, 0x70617273));  // pairing stream

  std::vector<std::size_t> abn_order(abnormal_bags.size());
  std::vector<std::size_t> norm_order(normal_bags.size());
  const std::size_t steps_per_epoch = std::max(abnormal_bags.size(), normal_bags.size());

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::iota(abn_order.begin(), abn_order.end(), 0);
    std::iota(norm_order.begin(), norm_order.end(), 0);
    pairing_rng.shuffle(abn_order);
    pairing_rng.shuffle(norm_order);

    StepAccum accum;
    for (std::size_t step = 0; step < steps_per_epoch; ++step) {
      const Bag& abn = abnormal_bags[abn_order[step % abn_order.size()]];
      const Bag& norm = normal_bags[norm_order[step % norm_order.size()]];

      Workspace ws_abn, ws_norm;
      SnippetOutput out_abn = forward(result.params, abn.snippets, ws_abn);
      SnippetOutput out_norm = forward(result.params, norm.snippets, ws_norm);

      LossGradients lg = mil_loss_gradients(out_abn, out_norm, cfg);
      accum.add(lg.loss);

      for (Tensor& g : grads.tensors) g.data.assign(g.data.size(), 0.0);
      backward(result.params, ws_abn, lg.d_scores_abnormal, lg.d_magnitudes_abnormal, grads);
      backward(result.params, ws_norm, lg.d_scores_normal, lg.d_magnitudes_normal, grads);

      for (std::size_t t = 0; t < result.params.tensors.size(); ++t) {
        auto& p = result.params.tensors[t].data;
        auto& v = velocity.tensors[t].data;
        const auto& g = grads.tensors[t].data;
        for (std::size_t i = 0; i < p.size(); ++i) {
          v[i] = cfg.momentum * v[i] - cfg.learning_rate * g[i];
          p[i] += v[i];
        }
      }
    }
    result.history.push_back(accum.stats(epoch));
  }
  return result;
}

double gradient_check(const ModelParams& params, const Bag& abnormal, const Bag& normal,
                      const TrainConfig& cfg, double eps) {
  if (eps <= 0.0) fail(ErrorCode::argument, "gradient_check: eps must be positive");

  auto total_loss = [&](const ModelParams& p) {
    SnippetOutput out_abn = forward(p, abnormal.snippets);
    SnippetOutput out_norm = forward(p, normal.snippets);
    return mil_loss(out_abn, out_norm, cfg).total;
  };

  // Analytic gradients.
  ModelParams grads = zeros_like(params);
  {
    Workspace ws_abn, ws_norm;
    SnippetOutput out_abn = forward(params, abnormal.snippets, ws_abn);
    SnippetOutput out_norm = forward(params, normal.snippets, ws_norm);
    LossGradients lg = mil_loss_gradients(out_abn, out_norm, cfg);
    backward(params, ws_abn, lg.d_scores_abnormal, lg.d_magnitudes_abnormal, grads);
    backward(params, ws_norm, lg.d_scores_normal, lg.d_magnitudes_normal, grads);
  }

  ModelParams probe = params;
  double max_rel = 0.0;
  for (std::size_t t = 0; t < params.tensors.size(); ++t) {
    for (std::size_t i = 0; i < params.tensors[t].data.size(); ++i) {
      const double saved = probe.tensors[t].data[i];
      probe.tensors[t].data[i] = saved + eps;
      const double plus = total_loss(probe);
      probe.tensors[t].data[i] = saved - eps;
      const double minus = total_loss(probe);
      probe.tensors[t].data[i] = saved;

      const double fd = (plus - minus) / (2.0 * eps);
      const double analytic = grads.tensors[t].data[i];
      const double rel = std::abs(analytic - fd) /
                         std::max({std::abs(analytic), std::abs(fd), 1e-8});
      max_rel = std::max(max_rel, rel);
    }
  }
  return max_rel;
}

void write_history(const std::vector<EpochStats>& history, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorCode::io, "cannot open history file for writing: " + path.string());
  for (const EpochStats& e : history) {
    json j = {
        {"epoch", e.epoch},
        {"mean_total", e.mean_total},
        {"mean_cls", e.mean_cls},
        {"mean_mag", e.mean_mag},
        {"mean_smooth", e.mean_smooth},
        {"mean_sparse", e.mean_sparse},
    };
    out << j.dump() << "\n";
  }
  if (!out) fail(ErrorCode::io, "write failure on history file: " + path.string());
}

}  // namespace wsvad
