// C API implementation: thin translation layer over the wsvad core. Opaque
// handles wrap the core value types; core exceptions become status codes and
// a thread-local message.

#include "wsvad.h"

#include <cstring>
#include <string>

#include "json.hpp"

#include "error.hpp"
#include "features.hpp"
#include "ftb.hpp"
#include "manifest.hpp"
#include "pipeline.hpp"
#include "synth.hpp"

using nlohmann::json;

struct wsvad_features {
  wsvad::FeatureSequence seq;
};

struct wsvad_manifest {
  std::vector<wsvad::ManifestEntry> entries;
  std::filesystem::path source_dir;
};

namespace {

thread_local std::string g_last_error;

wsvad_status status_from(wsvad::ErrorCode code) {
  switch (code) {
    case wsvad::ErrorCode::argument: return WSVAD_ERROR_ARGUMENT;
    case wsvad::ErrorCode::io: return WSVAD_ERROR_IO;
    case wsvad::ErrorCode::format: return WSVAD_ERROR_FORMAT;
    case wsvad::ErrorCode::validation: return WSVAD_ERROR_VALIDATION;
    case wsvad::ErrorCode::shape: return WSVAD_ERROR_SHAPE;
    case wsvad::ErrorCode::internal: return WSVAD_ERROR_INTERNAL;
  }
  return WSVAD_ERROR_INTERNAL;
}

template <typename Fn>
wsvad_status guarded(Fn&& fn) {
  try {
    fn();
    return WSVAD_OK;
  } catch (const wsvad::Error& e) {
    g_last_error = e.what();
    return status_from(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return WSVAD_ERROR_INTERNAL;
  }
}

wsvad_status fail_argument(const char* message) {
  g_last_error = message;
  return WSVAD_ERROR_ARGUMENT;
}

wsvad::FtbMode mode_from(wsvad_ftb_mode mode) {
  switch (mode) {
    case WSVAD_FTB_M1: return wsvad::FtbMode::m1;
    case WSVAD_FTB_M2: return wsvad::FtbMode::m2;
    case WSVAD_FTB_M3: return wsvad::FtbMode::m3;
  }
  wsvad::fail(wsvad::ErrorCode::argument, "unknown ftb mode value");
}

char* copy_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void reject_unknown_keys(const json& j, std::initializer_list<const char*> known,
                         const char* what) {
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* key : known) {
      if (item.key() == key) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      wsvad::fail(wsvad::ErrorCode::argument,
                  std::string(what) + ": unknown key '" + item.key() + "'");
    }
  }
}

json parse_config(const char* config_json, const char* what) {
  if (config_json == nullptr || config_json[0] == '\0') return json::object();
  json j = json::parse(config_json, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    wsvad::fail(wsvad::ErrorCode::argument, std::string(what) + ": config must be a JSON object");
  }
  return j;
}

}  // namespace

extern "C" {

const char* wsvad_version(void) { return "0.1.0"; }

const char* wsvad_status_name(wsvad_status status) {
  switch (status) {
    case WSVAD_OK: return "ok";
    case WSVAD_ERROR_ARGUMENT: return "argument";
    case WSVAD_ERROR_IO: return "io";
    case WSVAD_ERROR_FORMAT: return "format";
    case WSVAD_ERROR_VALIDATION: return "validation";
    case WSVAD_ERROR_SHAPE: return "shape";
    case WSVAD_ERROR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* wsvad_last_error(void) { return g_last_error.c_str(); }

void wsvad_string_free(char* s) { delete[] s; }

wsvad_status wsvad_features_create(const float* data, uint32_t rows, uint32_t cols,
                                   wsvad_features** out) {
  if (data == nullptr || out == nullptr) return fail_argument("null pointer argument");
  return guarded([&] {
    wsvad::FeatureSequence seq;
    seq.data = wsvad::Matrix(rows, cols);
    for (std::size_t i = 0; i < seq.data.data().size(); ++i) {
      seq.data.data()[i] = static_cast<double>(data[i]);
    }
    wsvad::check_feature_invariants(seq);
    *out = new wsvad_features{std::move(seq)};
  });
}

wsvad_status wsvad_features_read(const char* path, wsvad_features** out) {
  if (path == nullptr || out == nullptr) return fail_argument("null pointer argument");
  return guarded([&] { *out = new wsvad_features{wsvad::decode_feature_file(path)}; });
}

wsvad_status wsvad_features_write(const wsvad_features* features, const char* path) {
  if (features == nullptr || path == nullptr) return fail_argument("null pointer argument");
  return guarded([&] { wsvad::encode_feature_file(features->seq, path); });
}

uint32_t wsvad_features_rows(const wsvad_features* features) {
  return features ? static_cast<uint32_t>(features->seq.data.rows()) : 0;
}

uint32_t wsvad_features_cols(const wsvad_features* features) {
  return features ? static_cast<uint32_t>(features->seq.data.cols()) : 0;
}

wsvad_status wsvad_features_copy_data(const wsvad_features* features, float* out,
                                      size_t out_len) {
  if (features == nullptr || out == nullptr) return fail_argument("null pointer argument");
  const auto& data = features->seq.data.data();
  if (out_len < data.size()) return fail_argument("output buffer too small");
  for (std::size_t i = 0; i < data.size(); ++i) out[i] = static_cast<float>(data[i]);
  return WSVAD_OK;
}

wsvad_status wsvad_features_snippetize(const wsvad_features* features, uint32_t snippet_len,
                                       wsvad_features** out) {
  if (features == nullptr || out == nullptr) return fail_argument("null pointer argument");
  return guarded([&] {
    *out = new wsvad_features{wsvad::snippetize(features->seq, snippet_len)};
  });
}

wsvad_status wsvad_features_transform(const wsvad_features* features, wsvad_ftb_mode mode,
                                      uint32_t dct_lowpass_cutoff, wsvad_features** out) {
  if (features == nullptr || out == nullptr) return fail_argument("null pointer argument");
  return guarded([&] {
    wsvad::TransformedFeature tf =
        wsvad::apply_ftb(features->seq, mode_from(mode), {dct_lowpass_cutoff});
    *out = new wsvad_features{{std::move(tf.data), features->seq.frame_rate_hint}};
  });
}

void wsvad_features_free(wsvad_features* features) { delete features; }

wsvad_status wsvad_transform_file(const char* input_path, const char* output_path,
                                  wsvad_ftb_mode mode, uint32_t dct_lowpass_cutoff) {
  if (input_path == nullptr || output_path == nullptr) {
    return fail_argument("null pointer argument");
  }
  return guarded([&] {
    wsvad::FeatureSequence seq = wsvad::decode_feature_file(input_path);
    wsvad::TransformedFeature tf = wsvad::apply_ftb(seq, mode_from(mode), {dct_lowpass_cutoff});
    wsvad::encode_feature_file({std::move(tf.data), seq.frame_rate_hint}, output_path);
  });
}

wsvad_status wsvad_manifest_read(const char* path, wsvad_manifest** out) {
  if (path == nullptr || out == nullptr) return fail_argument("null pointer argument");
  return guarded([&] {
    auto entries = wsvad::read_manifest(path);
    *out = new wsvad_manifest{std::move(entries),
                              std::filesystem::path(path).parent_path()};
  });
}

size_t wsvad_manifest_size(const wsvad_manifest* manifest) {
  return manifest ? manifest->entries.size() : 0;
}

wsvad_status wsvad_manifest_validate(const wsvad_manifest* manifest, const char* base_dir,
                                     int deep, char** report_json_out) {
  if (manifest == nullptr || report_json_out == nullptr) {
    return fail_argument("null pointer argument");
  }
  return guarded([&] {
    wsvad::ValidateOptions options;
    options.deep = deep != 0;
    options.base_dir = base_dir ? std::filesystem::path(base_dir) : manifest->source_dir;
    wsvad::ValidationReport report = wsvad::validate_manifest(manifest->entries, options);
    *report_json_out = copy_string(report.to_json());
  });
}

void wsvad_manifest_free(wsvad_manifest* manifest) { delete manifest; }

wsvad_status wsvad_build_manifest(const char* anomalous_sources_path,
                                  const char* normal_sources_path, double test_fraction,
                                  uint64_t seed, const char* base_dir, const char* out_path) {
  if (anomalous_sources_path == nullptr || normal_sources_path == nullptr ||
      out_path == nullptr) {
    return fail_argument("null pointer argument");
  }
  return guarded([&] {
    auto anomalous = wsvad::read_anomalous_sources(anomalous_sources_path);
    auto normals = wsvad::read_normal_sources(normal_sources_path);
    const std::filesystem::path base =
        base_dir ? std::filesystem::path(base_dir)
                 : std::filesystem::path(out_path).parent_path();
    auto entries = wsvad::build_manifest(anomalous, normals, {test_fraction, seed}, base);
    wsvad::write_manifest(entries, out_path);
  });
}

wsvad_status wsvad_synth_generate(const char* config_json, const char* out_dir,
                                  char** manifest_path_out) {
  if (out_dir == nullptr) return fail_argument("null pointer argument");
  return guarded([&] {
    json j = parse_config(config_json, "synth");
    reject_unknown_keys(j,
                        {"n_normal", "n_anomaly", "frames", "dim", "anomaly_len",
                         "magnitude_boost", "noise_sigma", "seed"},
                        "synth");
    wsvad::SynthConfig cfg;
    cfg.n_normal = j.value("n_normal", cfg.n_normal);
    cfg.n_anomaly = j.value("n_anomaly", cfg.n_anomaly);
    cfg.frames = j.value("frames", cfg.frames);
    cfg.dim = j.value("dim", cfg.dim);
    cfg.anomaly_len = j.value("anomaly_len", cfg.anomaly_len);
    cfg.magnitude_boost = j.value("magnitude_boost", cfg.magnitude_boost);
    cfg.noise_sigma = j.value("noise_sigma", cfg.noise_sigma);
    cfg.seed = j.value("seed", cfg.seed);
    const std::filesystem::path manifest = wsvad::generate_synthetic_dataset(cfg, out_dir);
    if (manifest_path_out) *manifest_path_out = copy_string(manifest.string());
  });
}

wsvad_status wsvad_train(const char* manifest_path, const char* base_dir,
                         const char* config_json, const char* out_dir) {
  if (manifest_path == nullptr || out_dir == nullptr) {
    return fail_argument("null pointer argument");
  }
  return guarded([&] {
    json j = parse_config(config_json, "train");
    reject_unknown_keys(j,
                        {"top_k", "margin", "magnitude_weight", "smoothness_weight",
                         "sparsity_weight", "learning_rate", "momentum", "epochs",
                         "snippet_len", "seed", "ftb_mode", "dct_lowpass", "branch_dim",
                         "dilations", "kernel_size", "scorer_hidden", "model_seed"},
                        "train");
    wsvad::TrainConfig cfg;
    cfg.top_k = j.value("top_k", cfg.top_k);
    cfg.margin = j.value("margin", cfg.margin);
    cfg.magnitude_weight = j.value("magnitude_weight", cfg.magnitude_weight);
    cfg.smoothness_weight = j.value("smoothness_weight", cfg.smoothness_weight);
    cfg.sparsity_weight = j.value("sparsity_weight", cfg.sparsity_weight);
    cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
    cfg.momentum = j.value("momentum", cfg.momentum);
    cfg.epochs = j.value("epochs", cfg.epochs);
    cfg.snippet_len = j.value("snippet_len", cfg.snippet_len);
    cfg.seed = j.value("seed", cfg.seed);
    if (j.contains("ftb_mode")) {
      cfg.ftb_mode = wsvad::ftb_mode_from_string(j.at("ftb_mode").get<std::string>());
    }
    cfg.dct_lowpass_cutoff = j.value("dct_lowpass", cfg.dct_lowpass_cutoff);

    wsvad::ModelConfig model_cfg;
    model_cfg.branch_dim = j.value("branch_dim", model_cfg.branch_dim);
    if (j.contains("dilations")) {
      model_cfg.dilations = j.at("dilations").get<std::vector<std::size_t>>();
    }
    model_cfg.kernel_size = j.value("kernel_size", model_cfg.kernel_size);
    if (j.contains("scorer_hidden")) {
      model_cfg.scorer_hidden = j.at("scorer_hidden").get<std::vector<std::size_t>>();
    }
    model_cfg.seed = j.value("model_seed", cfg.seed);

    wsvad::train_to_dir(manifest_path, base_dir ? base_dir : "", model_cfg, cfg, out_dir);
  });
}

wsvad_status wsvad_score(const char* checkpoint_path, const char* manifest_path,
                         const char* base_dir, const char* split, const char* out_dir) {
  if (checkpoint_path == nullptr || manifest_path == nullptr || out_dir == nullptr) {
    return fail_argument("null pointer argument");
  }
  return guarded([&] {
    wsvad::score_to_dir(checkpoint_path, manifest_path, base_dir ? base_dir : "",
                        split ? split : "test", out_dir);
  });
}

wsvad_status wsvad_evaluate(const char* manifest_path, const char* scores_dir,
                            const char* report_path, const char* heatmap_dir,
                            int macro_average, int cross_class_negatives,
                            double* overall_auc_out) {
  if (manifest_path == nullptr || scores_dir == nullptr || report_path == nullptr) {
    return fail_argument("null pointer argument");
  }
  return guarded([&] {
    wsvad::EvalOptions options;
    options.macro_average = macro_average != 0;
    options.cross_class_negatives = cross_class_negatives != 0;
    std::optional<std::filesystem::path> heatmaps;
    if (heatmap_dir) heatmaps = std::filesystem::path(heatmap_dir);
    wsvad::EvalReport report =
        wsvad::evaluate_files(manifest_path, scores_dir, options, report_path, heatmaps);
    if (overall_auc_out) *overall_auc_out = report.overall_auc;
  });
}

wsvad_status wsvad_roc_auc(const double* scores, const int32_t* labels, size_t len,
                           double* auc_out) {
  if (scores == nullptr || labels == nullptr || auc_out == nullptr) {
    return fail_argument("null pointer argument");
  }
  return guarded([&] {
    std::vector<int> label_vec(labels, labels + len);
    *auc_out = wsvad::roc_auc({scores, len}, label_vec);
  });
}

}  // extern "C"
