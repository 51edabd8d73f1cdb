#include "model.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "json.hpp"

#include "error.hpp"
#include "rng.hpp"

namespace wsvad {

using nlohmann::json;

std::size_t ModelConfig::resolved_branch_dim() const {
  if (branch_dim != 0) return branch_dim;
  return input_dim / branch_count();
}

void ModelConfig::validate() const {
  if (input_dim < 1) fail(ErrorCode::argument, "model config: input_dim must be >= 1");
  if (dilations.empty()) fail(ErrorCode::argument, "model config: need at least one dilation");
  for (std::size_t d : dilations) {
    if (d < 1) fail(ErrorCode::argument, "model config: dilations must be >= 1");
  }
  if (kernel_size < 1 || kernel_size % 2 == 0) {
    fail(ErrorCode::argument, "model config: kernel_size must be odd and >= 1");
  }
  for (std::size_t h : scorer_hidden) {
    if (h < 1) fail(ErrorCode::argument, "model config: scorer widths must be >= 1");
  }
  if (branch_dim == 0) {
    if (input_dim % branch_count() != 0) {
      fail(ErrorCode::argument,
           "model config: input_dim must be divisible by " + std::to_string(branch_count()) +
               " when branch_dim is defaulted");
    }
  } else if (branch_dim * branch_count() != input_dim) {
    fail(ErrorCode::argument,
         "model config: branch_dim * " + std::to_string(branch_count()) +
             " must equal input_dim so the branches concatenate back to the input width");
  }
}

Tensor::Tensor(std::string n, std::vector<std::size_t> s) : name(std::move(n)), shape(std::move(s)) {
  std::size_t total = 1;
  for (std::size_t dim : shape) total *= dim;
  data.assign(total, 0.0);
}

namespace {

ModelParams make_params(const ModelConfig& config) {
  config.validate();
  const std::size_t d = config.input_dim;
  const std::size_t b = config.resolved_branch_dim();
  const std::size_t k = config.kernel_size;

  ModelParams params;
  params.config = config;
  params.config.branch_dim = b;
  for (std::size_t i = 0; i < config.dilations.size(); ++i) {
    const std::string stem = "conv" + std::to_string(i);
    params.tensors.emplace_back(stem + ".weight", std::vector<std::size_t>{b, d, k});
    params.tensors.emplace_back(stem + ".bias", std::vector<std::size_t>{b});
  }
  params.tensors.emplace_back("attn.query", std::vector<std::size_t>{d, b});
  params.tensors.emplace_back("attn.key", std::vector<std::size_t>{d, b});
  params.tensors.emplace_back("attn.value", std::vector<std::size_t>{d, b});

  std::size_t in_features = d;
  for (std::size_t l = 0; l <= config.scorer_hidden.size(); ++l) {
    const std::size_t out_features =
        l < config.scorer_hidden.size() ? config.scorer_hidden[l] : 1;
    const std::string stem = "scorer" + std::to_string(l);
    params.tensors.emplace_back(stem + ".weight",
                                std::vector<std::size_t>{out_features, in_features});
    params.tensors.emplace_back(stem + ".bias", std::vector<std::size_t>{out_features});
    in_features = out_features;
  }
  return params;
}

std::size_t fan_in_of(const ModelParams& params, const Tensor& t) {
  // Weight fan-in; a bias shares its layer's fan-in.
  const std::size_t d = params.config.input_dim;
  const std::size_t k = params.config.kernel_size;
  if (t.name.starts_with("conv")) return d * k;
  if (t.name.starts_with("attn")) return d;
  // scorer{l}: fan-in is the weight's second dimension
  const std::size_t layer = static_cast<std::size_t>(std::stoul(t.name.substr(6)));
  std::size_t in_features = d;
  for (std::size_t l = 0; l < layer; ++l) in_features = params.config.scorer_hidden[l];
  return in_features;
}

}  // namespace

ModelParams init_model(const ModelConfig& config) {
  ModelParams params = make_params(config);
  SeededRng rng(config.seed);
  for (Tensor& t : params.tensors) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in_of(params, t)));
    for (double& v : t.data) v = rng.uniform(-bound, bound);
  }
  return params;
}

ModelParams zeros_like(const ModelParams& params) {
  ModelParams zero = params;
  for (Tensor& t : zero.tensors) t.data.assign(t.data.size(), 0.0);
  return zero;
}

namespace {

// out[t, o] = bias[o] + sum_{j, i} w[o, i, j] * x[clamp(t + (j - P) * dil), i].
// "Same" padding replicates the edge rows; zero padding would give boundary
// snippets a systematically different feature scale, which the magnitude
// supervision never corrects. Pre-activation only; ReLU is applied by the
// caller so the backward pass can see the sign.
std::size_t clamp_row(std::ptrdiff_t t, std::size_t t_len) {
  if (t < 0) return 0;
  if (t >= static_cast<std::ptrdiff_t>(t_len)) return t_len - 1;
  return static_cast<std::size_t>(t);
}

Matrix conv_pre_activation(const ModelParams& params, std::size_t branch, const Matrix& x) {
  const std::size_t t_len = x.rows();
  const std::size_t d = x.cols();
  const std::size_t b = params.config.resolved_branch_dim();
  const std::size_t k = params.config.kernel_size;
  const std::size_t dil = params.config.dilations[branch];
  const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(k / 2);

  const Tensor& w = params.conv_weight(branch);
  const Tensor& bias = params.conv_bias(branch);
  Matrix pre(t_len, b);
  for (std::size_t t = 0; t < t_len; ++t) {
    for (std::size_t o = 0; o < b; ++o) pre(t, o) = bias.data[o];
    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t src = clamp_row(static_cast<std::ptrdiff_t>(t) +
                                            (static_cast<std::ptrdiff_t>(j) - half) *
                                                static_cast<std::ptrdiff_t>(dil),
                                        t_len);
      for (std::size_t o = 0; o < b; ++o) {
        const double* w_row = w.data.data() + (o * d) * k + j;
        double acc = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
          acc += w_row[i * k] * x(src, i);
        }
        pre(t, o) += acc;
      }
    }
  }
  return pre;
}

Matrix matmul(const Matrix& a, const Tensor& w) {
  // a: T x D, w: [D, B] -> T x B
  const std::size_t t_len = a.rows();
  const std::size_t d = a.cols();
  const std::size_t b = w.shape[1];
  Matrix out(t_len, b);
  for (std::size_t t = 0; t < t_len; ++t) {
    for (std::size_t i = 0; i < d; ++i) {
      const double v = a(t, i);
      const double* w_row = w.data.data() + i * b;
      for (std::size_t o = 0; o < b; ++o) out(t, o) += v * w_row[o];
    }
  }
  return out;
}

void softmax_rows(Matrix& m) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    double max_v = row[0];
    for (double v : row) max_v = std::max(max_v, v);
    double sum = 0.0;
    for (double& v : row) {
      v = std::exp(v - max_v);
      sum += v;
    }
    for (double& v : row) v /= sum;
  }
}

}  // namespace

Matrix attention_branch(const ModelParams& params, const Matrix& x) {
  const std::size_t t_len = x.rows();
  const std::size_t b = params.config.resolved_branch_dim();
  Matrix q = matmul(x, params.attn_query());
  Matrix k = matmul(x, params.attn_key());
  Matrix v = matmul(x, params.attn_value());
  const double scale = 1.0 / std::sqrt(static_cast<double>(b));
  Matrix logits(t_len, t_len);
  for (std::size_t r = 0; r < t_len; ++r) {
    for (std::size_t c = 0; c < t_len; ++c) {
      double acc = 0.0;
      for (std::size_t i = 0; i < b; ++i) acc += q(r, i) * k(c, i);
      logits(r, c) = acc * scale;
    }
  }
  softmax_rows(logits);
  Matrix out(t_len, b);
  for (std::size_t r = 0; r < t_len; ++r) {
    for (std::size_t c = 0; c < t_len; ++c) {
      const double a = logits(r, c);
      for (std::size_t i = 0; i < b; ++i) out(r, i) += a * v(c, i);
    }
  }
  return out;
}

SnippetOutput forward(const ModelParams& params, const Matrix& features) {
  Workspace ws;
  return forward(params, features, ws);
}

SnippetOutput forward(const ModelParams& params, const Matrix& features, Workspace& ws) {
  const ModelConfig& cfg = params.config;
  if (features.cols() != cfg.input_dim) {
    fail(ErrorCode::shape, "forward: input has " + std::to_string(features.cols()) +
                               " dims, model expects " + std::to_string(cfg.input_dim));
  }
  if (features.rows() == 0) {
    fail(ErrorCode::shape, "forward: input has no rows");
  }
  const std::size_t t_len = features.rows();
  const std::size_t d = cfg.input_dim;
  const std::size_t b = cfg.resolved_branch_dim();
  const std::size_t n_conv = cfg.dilations.size();

  ws = Workspace{};
  ws.input = features;

  Matrix concat(t_len, d);
  ws.conv_pre.resize(n_conv);
  for (std::size_t i = 0; i < n_conv; ++i) {
    ws.conv_pre[i] = conv_pre_activation(params, i, features);
    for (std::size_t t = 0; t < t_len; ++t) {
      for (std::size_t o = 0; o < b; ++o) {
        concat(t, i * b + o) = std::max(0.0, ws.conv_pre[i](t, o));
      }
    }
  }

  ws.query = matmul(features, params.attn_query());
  ws.key = matmul(features, params.attn_key());
  ws.value = matmul(features, params.attn_value());
  const double scale = 1.0 / std::sqrt(static_cast<double>(b));
  Matrix logits(t_len, t_len);
  for (std::size_t r = 0; r < t_len; ++r) {
    for (std::size_t c = 0; c < t_len; ++c) {
      double acc = 0.0;
      for (std::size_t i = 0; i < b; ++i) acc += ws.query(r, i) * ws.key(c, i);
      logits(r, c) = acc * scale;
    }
  }
  softmax_rows(logits);
  ws.attn_weights = std::move(logits);
  for (std::size_t r = 0; r < t_len; ++r) {
    for (std::size_t c = 0; c < t_len; ++c) {
      const double a = ws.attn_weights(r, c);
      for (std::size_t i = 0; i < b; ++i) concat(r, n_conv * b + i) += a * ws.value(c, i);
    }
  }

  ws.enhanced = Matrix(t_len, d);
  for (std::size_t t = 0; t < t_len; ++t) {
    for (std::size_t c = 0; c < d; ++c) ws.enhanced(t, c) = features(t, c) + concat(t, c);
  }

  // Scorer: ReLU hidden layers, sigmoid output.
  const std::size_t layers = params.scorer_layer_count();
  ws.scorer_pre.resize(layers);
  Matrix act = ws.enhanced;
  for (std::size_t l = 0; l < layers; ++l) {
    const Tensor& w = params.scorer_weight(l);
    const Tensor& bias = params.scorer_bias(l);
    const std::size_t out_f = w.shape[0];
    const std::size_t in_f = w.shape[1];
    Matrix pre(t_len, out_f);
    for (std::size_t t = 0; t < t_len; ++t) {
      for (std::size_t o = 0; o < out_f; ++o) {
        const double* w_row = w.data.data() + o * in_f;
        double acc = bias.data[o];
        for (std::size_t i = 0; i < in_f; ++i) acc += w_row[i] * act(t, i);
        pre(t, o) = acc;
      }
    }
    ws.scorer_pre[l] = pre;
    if (l + 1 < layers) {
      act = pre;
      for (double& v : act.data()) v = std::max(0.0, v);
    } else {
      act = std::move(pre);
    }
  }

  ws.scores.resize(t_len);
  ws.magnitudes.resize(t_len);
  for (std::size_t t = 0; t < t_len; ++t) {
    ws.scores[t] = sigmoid(act(t, 0));
    ws.magnitudes[t] = row_norm(ws.enhanced, t);
  }

  SnippetOutput out;
  out.enhanced = ws.enhanced;
  out.scores = ws.scores;
  out.magnitudes = ws.magnitudes;
  return out;
}

void backward(const ModelParams& params, const Workspace& ws,
              const std::vector<double>& d_scores, const std::vector<double>& d_magnitudes,
              ModelParams& grads) {
  const ModelConfig& cfg = params.config;
  const std::size_t t_len = ws.input.rows();
  const std::size_t d = cfg.input_dim;
  const std::size_t b = cfg.resolved_branch_dim();
  const std::size_t n_conv = cfg.dilations.size();
  const std::size_t layers = params.scorer_layer_count();

  if (d_scores.size() != t_len || d_magnitudes.size() != t_len) {
    fail(ErrorCode::shape, "backward: gradient vectors must match the snippet count");
  }

  // Through the output sigmoid.
  Matrix d_pre(t_len, 1);
  for (std::size_t t = 0; t < t_len; ++t) {
    const double s = ws.scores[t];
    d_pre(t, 0) = d_scores[t] * s * (1.0 - s);
  }

  // Scorer layers, last to first. Activations are recomputed from the stored
  // pre-activations.
  Matrix d_enhanced(t_len, d);
  for (std::size_t l_rev = 0; l_rev < layers; ++l_rev) {
    const std::size_t l = layers - 1 - l_rev;
    const Tensor& w = params.scorer_weight(l);
    const std::size_t out_f = w.shape[0];
    const std::size_t in_f = w.shape[1];

    Matrix input_act =
        l == 0 ? ws.enhanced : ws.scorer_pre[l - 1];
    if (l > 0) {
      for (double& v : input_act.data()) v = std::max(0.0, v);
    }

    Tensor& dw = grads.scorer_weight(l);
    Tensor& db = grads.scorer_bias(l);
    for (std::size_t t = 0; t < t_len; ++t) {
      for (std::size_t o = 0; o < out_f; ++o) {
        const double g = d_pre(t, o);
        if (g == 0.0) continue;
        double* dw_row = dw.data.data() + o * in_f;
        for (std::size_t i = 0; i < in_f; ++i) dw_row[i] += g * input_act(t, i);
        db.data[o] += g;
      }
    }

    Matrix d_input(t_len, in_f);
    for (std::size_t t = 0; t < t_len; ++t) {
      for (std::size_t o = 0; o < out_f; ++o) {
        const double g = d_pre(t, o);
        if (g == 0.0) continue;
        const double* w_row = w.data.data() + o * in_f;
        for (std::size_t i = 0; i < in_f; ++i) d_input(t, i) += g * w_row[i];
      }
    }

    if (l == 0) {
      d_enhanced = std::move(d_input);
    } else {
      const Matrix& pre_below = ws.scorer_pre[l - 1];
      d_pre = std::move(d_input);
      for (std::size_t t = 0; t < t_len; ++t) {
        for (std::size_t i = 0; i < pre_below.cols(); ++i) {
          if (pre_below(t, i) <= 0.0) d_pre(t, i) = 0.0;
        }
      }
    }
  }

  // Magnitude path: d||e|| / de = e / ||e||.
  for (std::size_t t = 0; t < t_len; ++t) {
    const double mag = ws.magnitudes[t];
    if (mag <= 0.0 || d_magnitudes[t] == 0.0) continue;
    const double g = d_magnitudes[t] / mag;
    for (std::size_t c = 0; c < d; ++c) d_enhanced(t, c) += g * ws.enhanced(t, c);
  }

  // Residual: d_enhanced flows into the concat branches unchanged.
  // Conv branches.
  const std::size_t k = cfg.kernel_size;
  const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(k / 2);
  for (std::size_t i = 0; i < n_conv; ++i) {
    const std::size_t dil = cfg.dilations[i];
    Tensor& dw = grads.conv_weight(i);
    Tensor& db = grads.conv_bias(i);
    for (std::size_t t = 0; t < t_len; ++t) {
      for (std::size_t o = 0; o < b; ++o) {
        if (ws.conv_pre[i](t, o) <= 0.0) continue;  // ReLU gate
        const double g = d_enhanced(t, i * b + o);
        if (g == 0.0) continue;
        db.data[o] += g;
        for (std::size_t j = 0; j < k; ++j) {
          const std::size_t src = clamp_row(static_cast<std::ptrdiff_t>(t) +
                                                (static_cast<std::ptrdiff_t>(j) - half) *
                                                    static_cast<std::ptrdiff_t>(dil),
                                            t_len);
          double* dw_base = dw.data.data() + (o * d) * k + j;
          for (std::size_t c = 0; c < d; ++c) {
            dw_base[c * k] += g * ws.input(src, c);
          }
        }
      }
    }
  }

  // Attention branch.
  {
    const double scale = 1.0 / std::sqrt(static_cast<double>(b));
    Matrix d_attn(t_len, b);
    for (std::size_t t = 0; t < t_len; ++t) {
      for (std::size_t o = 0; o < b; ++o) d_attn(t, o) = d_enhanced(t, n_conv * b + o);
    }

    // out = A V
    Matrix d_value(t_len, b);
    Matrix d_weights(t_len, t_len);
    for (std::size_t r = 0; r < t_len; ++r) {
      for (std::size_t c = 0; c < t_len; ++c) {
        const double a = ws.attn_weights(r, c);
        double dot = 0.0;
        for (std::size_t i = 0; i < b; ++i) {
          d_value(c, i) += a * d_attn(r, i);
          dot += d_attn(r, i) * ws.value(c, i);
        }
        d_weights(r, c) = dot;
      }
    }

    // Softmax rows: dl = a .* (dw - sum(dw .* a)).
    Matrix d_logits(t_len, t_len);
    for (std::size_t r = 0; r < t_len; ++r) {
      double inner = 0.0;
      for (std::size_t c = 0; c < t_len; ++c) inner += d_weights(r, c) * ws.attn_weights(r, c);
      for (std::size_t c = 0; c < t_len; ++c) {
        d_logits(r, c) = ws.attn_weights(r, c) * (d_weights(r, c) - inner);
      }
    }

    Matrix d_query(t_len, b);
    Matrix d_key(t_len, b);
    for (std::size_t r = 0; r < t_len; ++r) {
      for (std::size_t c = 0; c < t_len; ++c) {
        const double g = d_logits(r, c) * scale;
        if (g == 0.0) continue;
        for (std::size_t i = 0; i < b; ++i) {
          d_query(r, i) += g * ws.key(c, i);
          d_key(c, i) += g * ws.query(r, i);
        }
      }
    }

    // Projections: p = X W, so dW = X^T dP.
    auto accumulate_proj = [&](Tensor& dw, const Matrix& d_proj) {
      for (std::size_t t = 0; t < t_len; ++t) {
        for (std::size_t i = 0; i < d; ++i) {
          const double x = ws.input(t, i);
          if (x == 0.0) continue;
          double* dw_row = dw.data.data() + i * b;
          for (std::size_t o = 0; o < b; ++o) dw_row[o] += x * d_proj(t, o);
        }
      }
    };
    accumulate_proj(grads.attn_query(), d_query);
    accumulate_proj(grads.attn_key(), d_key);
    accumulate_proj(grads.attn_value(), d_value);
  }
}

namespace {

void put_u32(std::string& out, uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

class ByteReader {
 public:
  ByteReader(const std::string& bytes, const std::string& what)
      : bytes_(bytes), what_(what) {}

  uint32_t u32() {
    need(4);
    const auto* p = reinterpret_cast<const unsigned char*>(bytes_.data() + pos_);
    pos_ += 4;
    return static_cast<uint32_t>(p[0]) | static_cast<uint32_t>(p[1]) << 8 |
           static_cast<uint32_t>(p[2]) << 16 | static_cast<uint32_t>(p[3]) << 24;
  }

  std::string str(std::size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  float f32() { return std::bit_cast<float>(u32()); }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) {
    if (bytes_.size() - pos_ < n) {
      fail(ErrorCode::format, "truncated checkpoint: " + what_);
    }
  }
  const std::string& bytes_;
  std::string what_;
  std::size_t pos_ = 0;
};

constexpr char kCheckpointMagic[4] = {'W', 'S', 'C', 'K'};
constexpr uint32_t kCheckpointVersion = 1;

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  const ModelConfig& cfg = ckpt.params.config;
  json config_json = {
      {"input_dim", cfg.input_dim},
      {"branch_dim", cfg.resolved_branch_dim()},
      {"dilations", cfg.dilations},
      {"kernel_size", cfg.kernel_size},
      {"scorer_hidden", cfg.scorer_hidden},
      {"seed", cfg.seed},
      {"ftb_mode", to_string(ckpt.ftb_mode)},
      {"snippet_len", ckpt.snippet_len},
      {"dct_lowpass", ckpt.dct_lowpass_cutoff},
  };
  const std::string config_text = config_json.dump();

  std::string bytes;
  bytes.append(kCheckpointMagic, 4);
  put_u32(bytes, kCheckpointVersion);
  put_u32(bytes, static_cast<uint32_t>(config_text.size()));
  bytes.append(config_text);
  put_u32(bytes, static_cast<uint32_t>(ckpt.params.tensors.size()));
  for (const Tensor& t : ckpt.params.tensors) {
    put_u32(bytes, static_cast<uint32_t>(t.name.size()));
    bytes.append(t.name);
    put_u32(bytes, static_cast<uint32_t>(t.shape.size()));
    for (std::size_t dim : t.shape) put_u32(bytes, static_cast<uint32_t>(dim));
    for (double v : t.data) put_u32(bytes, std::bit_cast<uint32_t>(static_cast<float>(v)));
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::io, "cannot open checkpoint for writing: " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) fail(ErrorCode::io, "write failure on checkpoint: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot open checkpoint: " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  ByteReader reader(bytes, path.string());

  if (reader.str(4) != std::string(kCheckpointMagic, 4)) {
    fail(ErrorCode::format, "bad magic, not a checkpoint: " + path.string());
  }
  const uint32_t version = reader.u32();
  if (version != kCheckpointVersion) {
    fail(ErrorCode::format,
         "unsupported checkpoint version " + std::to_string(version) + ": " + path.string());
  }
  const std::string config_text = reader.str(reader.u32());
  json config_json = json::parse(config_text, nullptr, false);
  if (config_json.is_discarded()) {
    fail(ErrorCode::format, "invalid config JSON in checkpoint: " + path.string());
  }

  Checkpoint ckpt;
  ModelConfig cfg;
  try {
    cfg.input_dim = config_json.at("input_dim").get<std::size_t>();
    cfg.branch_dim = config_json.at("branch_dim").get<std::size_t>();
    cfg.dilations = config_json.at("dilations").get<std::vector<std::size_t>>();
    cfg.kernel_size = config_json.at("kernel_size").get<std::size_t>();
    cfg.scorer_hidden = config_json.at("scorer_hidden").get<std::vector<std::size_t>>();
    cfg.seed = config_json.at("seed").get<uint64_t>();
    ckpt.ftb_mode = ftb_mode_from_string(config_json.at("ftb_mode").get<std::string>());
    ckpt.snippet_len = config_json.at("snippet_len").get<std::size_t>();
    ckpt.dct_lowpass_cutoff = config_json.at("dct_lowpass").get<std::size_t>();
  } catch (const json::exception& ex) {
    fail(ErrorCode::format,
         "malformed checkpoint config (" + std::string(ex.what()) + "): " + path.string());
  }

  ckpt.params = make_params(cfg);
  const uint32_t tensor_count = reader.u32();
  if (tensor_count != ckpt.params.tensors.size()) {
    fail(ErrorCode::format, "checkpoint tensor count does not match its config: " + path.string());
  }
  for (Tensor& t : ckpt.params.tensors) {
    const std::string name = reader.str(reader.u32());
    if (name != t.name) {
      fail(ErrorCode::format, "unexpected tensor '" + name + "' in checkpoint: " + path.string());
    }
    const uint32_t ndim = reader.u32();
    std::vector<std::size_t> shape(ndim);
    for (uint32_t i = 0; i < ndim; ++i) shape[i] = reader.u32();
    if (shape != t.shape) {
      fail(ErrorCode::format, "tensor '" + name + "' has an unexpected shape: " + path.string());
    }
    for (double& v : t.data) {
      v = static_cast<double>(reader.f32());
      if (!std::isfinite(v)) {
        fail(ErrorCode::format,
             "non-finite value in tensor '" + name + "': " + path.string());
      }
    }
  }
  if (!reader.done()) {
    fail(ErrorCode::format, "trailing bytes after checkpoint payload: " + path.string());
  }
  return ckpt;
}

}  // namespace wsvad
