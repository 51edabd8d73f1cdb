#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ftb.hpp"
#include "matrix.hpp"

namespace wsvad {

// Detector network: a pyramid of dilated 1-D convolutions plus a single-head
// temporal self-attention branch, concatenated back to the input width and
// residual-added, followed by an MLP scorer with a sigmoid output. Scores are
// per snippet; magnitudes are l2 norms of the enhanced rows.
struct ModelConfig {
  std::size_t input_dim = 0;
  std::size_t branch_dim = 0;  // 0 = input_dim / (dilations.size() + 1)
  std::vector<std::size_t> dilations = {1, 2, 4};
  std::size_t kernel_size = 3;
  std::vector<std::size_t> scorer_hidden = {512, 32};
  uint64_t seed = 0;

  std::size_t branch_count() const { return dilations.size() + 1; }
  std::size_t resolved_branch_dim() const;
  void validate() const;
};

struct Tensor {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;
  Tensor(std::string n, std::vector<std::size_t> s);
  std::size_t size() const { return data.size(); }
};

struct ModelParams {
  ModelConfig config;
  std::vector<Tensor> tensors;  // canonical order, see layout accessors

  Tensor& conv_weight(std::size_t branch) { return tensors[2 * branch]; }
  Tensor& conv_bias(std::size_t branch) { return tensors[2 * branch + 1]; }
  Tensor& attn_query() { return tensors[attn_base()]; }
  Tensor& attn_key() { return tensors[attn_base() + 1]; }
  Tensor& attn_value() { return tensors[attn_base() + 2]; }
  Tensor& scorer_weight(std::size_t layer) { return tensors[scorer_base() + 2 * layer]; }
  Tensor& scorer_bias(std::size_t layer) { return tensors[scorer_base() + 2 * layer + 1]; }

  const Tensor& conv_weight(std::size_t branch) const { return tensors[2 * branch]; }
  const Tensor& conv_bias(std::size_t branch) const { return tensors[2 * branch + 1]; }
  const Tensor& attn_query() const { return tensors[attn_base()]; }
  const Tensor& attn_key() const { return tensors[attn_base() + 1]; }
  const Tensor& attn_value() const { return tensors[attn_base() + 2]; }
  const Tensor& scorer_weight(std::size_t layer) const {
    return tensors[scorer_base() + 2 * layer];
  }
  const Tensor& scorer_bias(std::size_t layer) const {
    return tensors[scorer_base() + 2 * layer + 1];
  }

  std::size_t scorer_layer_count() const { return config.scorer_hidden.size() + 1; }

 private:
  std::size_t attn_base() const { return 2 * config.dilations.size(); }
  std::size_t scorer_base() const { return attn_base() + 3; }
};

// Parameters drawn uniformly in +-1/sqrt(fan_in), tensor by tensor in
// canonical order from the seeded generator; bit-identical per seed.
ModelParams init_model(const ModelConfig& config);

// Same shapes, zero data. Used for gradient and velocity buffers.
ModelParams zeros_like(const ModelParams& params);

struct SnippetOutput {
  Matrix enhanced;                 // T' x D
  std::vector<double> scores;      // in [0, 1]
  std::vector<double> magnitudes;  // >= 0
};

// Intermediates kept by the forward pass for backpropagation.
struct Workspace {
  Matrix input;
  std::vector<Matrix> conv_pre;  // per branch, pre-ReLU
  Matrix query, key, value;
  Matrix attn_weights;           // softmax rows
  Matrix enhanced;
  std::vector<Matrix> scorer_pre;  // per layer, pre-activation
  std::vector<double> scores;
  std::vector<double> magnitudes;
};

SnippetOutput forward(const ModelParams& params, const Matrix& features);
SnippetOutput forward(const ModelParams& params, const Matrix& features, Workspace& ws);

// Accumulates parameter gradients for dL/d(scores) and dL/d(magnitudes)
// into grads (shapes must match params). Input gradients are not produced.
void backward(const ModelParams& params, const Workspace& ws,
              const std::vector<double>& d_scores, const std::vector<double>& d_magnitudes,
              ModelParams& grads);

// The attention branch on its own, exposed for direct checks.
Matrix attention_branch(const ModelParams& params, const Matrix& features);

struct Checkpoint {
  ModelParams params;
  FtbMode ftb_mode = FtbMode::m3;
  std::size_t snippet_len = 16;
  std::size_t dct_lowpass_cutoff = 0;
};

// Versioned container: magic, config JSON, then each tensor as name, shape,
// and float32 little-endian payload. Layout is documented in the README.
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace wsvad
