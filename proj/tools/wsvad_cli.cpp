// Command-line front end. Links the C API only; all configuration is
// resolved here, echoed as one JSON line, and passed down as JSON or flags.
//
// Exit codes: 0 success, 2 usage error, 3 validation failure, 4 I/O or file
// format error, 1 anything else.

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "wsvad.h"

using nlohmann::json;

namespace {

int exit_code_for(wsvad_status status) {
  switch (status) {
    case WSVAD_OK: return 0;
    case WSVAD_ERROR_ARGUMENT: return 2;
    case WSVAD_ERROR_VALIDATION: return 3;
    case WSVAD_ERROR_SHAPE: return 3;
    case WSVAD_ERROR_IO: return 4;
    case WSVAD_ERROR_FORMAT: return 4;
    case WSVAD_ERROR_INTERNAL: return 1;
  }
  return 1;
}

int finish(wsvad_status status) {
  if (status != WSVAD_OK) {
    std::cerr << "error (" << wsvad_status_name(status) << "): " << wsvad_last_error() << "\n";
  }
  return exit_code_for(status);
}

void print_config(const json& config) { std::cout << config.dump() << "\n"; }

wsvad_ftb_mode parse_mode(const std::string& text, bool& ok) {
  ok = true;
  if (text == "m1" || text == "M1") return WSVAD_FTB_M1;
  if (text == "m2" || text == "M2") return WSVAD_FTB_M2;
  if (text == "m3" || text == "M3") return WSVAD_FTB_M3;
  ok = false;
  return WSVAD_FTB_M1;
}

struct SynthArgs {
  std::string out_dir;
  uint64_t n_normal = 10, n_anomaly = 10;
  uint64_t frames = 256, dim = 32, anomaly_len = 32;
  double magnitude_boost = 3.0, noise_sigma = 0.05;
  uint64_t seed = 0;
};

int run_synth(const SynthArgs& a) {
  json config = {
      {"command", "synth"},       {"out", a.out_dir},
      {"n_normal", a.n_normal},   {"n_anomaly", a.n_anomaly},
      {"frames", a.frames},       {"dim", a.dim},
      {"anomaly_len", a.anomaly_len}, {"magnitude_boost", a.magnitude_boost},
      {"noise_sigma", a.noise_sigma}, {"seed", a.seed},
  };
  print_config(config);
  config.erase("command");
  config.erase("out");

  char* manifest_path = nullptr;
  wsvad_status status =
      wsvad_synth_generate(config.dump().c_str(), a.out_dir.c_str(), &manifest_path);
  if (status != WSVAD_OK) return finish(status);
  std::cout << "manifest: " << manifest_path << "\n";

  // Surface any precondition violation of the generated manifest (e.g. a run
  // with no anomalous videos), without failing the generation itself.
  wsvad_manifest* manifest = nullptr;
  if (wsvad_manifest_read(manifest_path, &manifest) == WSVAD_OK) {
    char* report = nullptr;
    if (wsvad_manifest_validate(manifest, nullptr, 0, &report) == WSVAD_OK) {
      json violations = json::parse(report);
      for (const json& v : violations) {
        std::cout << "warning: " << v.at("code").get<std::string>() << ": "
                  << v.at("message").get<std::string>() << "\n";
      }
      wsvad_string_free(report);
    }
    wsvad_manifest_free(manifest);
  }
  wsvad_string_free(manifest_path);
  return 0;
}

struct BuildArgs {
  std::string anomalous, normal, out, base_dir;
  double test_fraction = 0.3;
  uint64_t seed = 0;
};

int run_build_manifest(const BuildArgs& a) {
  print_config({{"command", "build-manifest"},
                {"anomalous", a.anomalous},
                {"normal", a.normal},
                {"test_fraction", a.test_fraction},
                {"seed", a.seed},
                {"base_dir", a.base_dir},
                {"out", a.out}});
  wsvad_status status = wsvad_build_manifest(
      a.anomalous.c_str(), a.normal.c_str(), a.test_fraction, a.seed,
      a.base_dir.empty() ? nullptr : a.base_dir.c_str(), a.out.c_str());
  if (status == WSVAD_OK) std::cout << "manifest: " << a.out << "\n";
  return finish(status);
}

struct ValidateArgs {
  std::string manifest, base_dir;
  bool deep = false;
};

int run_validate(const ValidateArgs& a) {
  print_config({{"command", "validate"},
                {"manifest", a.manifest},
                {"deep", a.deep},
                {"base_dir", a.base_dir}});
  wsvad_manifest* manifest = nullptr;
  wsvad_status status = wsvad_manifest_read(a.manifest.c_str(), &manifest);
  if (status != WSVAD_OK) return finish(status);

  char* report = nullptr;
  status = wsvad_manifest_validate(manifest, a.base_dir.empty() ? nullptr : a.base_dir.c_str(),
                                   a.deep ? 1 : 0, &report);
  wsvad_manifest_free(manifest);
  if (status != WSVAD_OK) return finish(status);

  json violations = json::parse(report);
  wsvad_string_free(report);
  for (const json& v : violations) {
    const std::string id = v.at("video_id").get<std::string>();
    std::cout << "violation: " << (id.empty() ? "<manifest>" : id) << ": "
              << v.at("code").get<std::string>() << ": " << v.at("message").get<std::string>()
              << "\n";
  }
  if (!violations.empty()) {
    std::cout << violations.size() << " violation(s)\n";
    return 3;
  }
  std::cout << "manifest ok\n";
  return 0;
}

struct TransformArgs {
  std::string mode = "m3", input, output;
  uint64_t dct_lowpass = 0;
};

int run_transform(const TransformArgs& a) {
  print_config({{"command", "transform"},
                {"mode", a.mode},
                {"input", a.input},
                {"output", a.output},
                {"dct_lowpass", a.dct_lowpass}});
  bool ok = false;
  const wsvad_ftb_mode mode = parse_mode(a.mode, ok);
  if (!ok) {
    std::cerr << "error (argument): unknown ftb mode: " << a.mode << "\n";
    return 2;
  }
  return finish(wsvad_transform_file(a.input.c_str(), a.output.c_str(), mode,
                                     static_cast<uint32_t>(a.dct_lowpass)));
}

struct TrainArgs {
  std::string manifest, base_dir, out, ftb = "m3";
  uint64_t epochs = 50, top_k = 3, snippet_len = 16, seed = 0;
  double margin = 100.0, alpha = 1e-4, beta = 8e-4, gamma = 8e-4;
  double learning_rate = 1e-3, momentum = 0.9;
  uint64_t dct_lowpass = 0, branch_dim = 0, kernel_size = 3;
  std::vector<uint64_t> dilations = {1, 2, 4};
  std::vector<uint64_t> scorer_hidden = {512, 32};
};

int run_train(const TrainArgs& a) {
  json config = {
      {"command", "train"},
      {"manifest", a.manifest},
      {"base_dir", a.base_dir},
      {"out", a.out},
      {"ftb_mode", a.ftb},
      {"epochs", a.epochs},
      {"top_k", a.top_k},
      {"margin", a.margin},
      {"magnitude_weight", a.alpha},
      {"smoothness_weight", a.beta},
      {"sparsity_weight", a.gamma},
      {"learning_rate", a.learning_rate},
      {"momentum", a.momentum},
      {"snippet_len", a.snippet_len},
      {"seed", a.seed},
      {"dct_lowpass", a.dct_lowpass},
      {"branch_dim", a.branch_dim},
      {"dilations", a.dilations},
      {"kernel_size", a.kernel_size},
      {"scorer_hidden", a.scorer_hidden},
  };
  print_config(config);
  config.erase("command");
  config.erase("manifest");
  config.erase("base_dir");
  config.erase("out");

  wsvad_status status =
      wsvad_train(a.manifest.c_str(), a.base_dir.empty() ? nullptr : a.base_dir.c_str(),
                  config.dump().c_str(), a.out.c_str());
  if (status == WSVAD_OK) {
    std::cout << "checkpoint: " << a.out << "/checkpoint.wsck\n";
    std::cout << "history: " << a.out << "/history.jsonl\n";
  }
  return finish(status);
}

struct ScoreArgs {
  std::string checkpoint, manifest, base_dir, out, split = "test";
};

int run_score(const ScoreArgs& a) {
  print_config({{"command", "score"},
                {"checkpoint", a.checkpoint},
                {"manifest", a.manifest},
                {"base_dir", a.base_dir},
                {"split", a.split},
                {"out", a.out}});
  wsvad_status status = wsvad_score(a.checkpoint.c_str(), a.manifest.c_str(),
                                    a.base_dir.empty() ? nullptr : a.base_dir.c_str(),
                                    a.split.c_str(), a.out.c_str());
  if (status == WSVAD_OK) std::cout << "scores: " << a.out << "\n";
  return finish(status);
}

struct EvaluateArgs {
  std::string manifest, scores, out, heatmaps;
  bool macro = false;
  bool cross_class_negatives = false;
};

int run_evaluate(const EvaluateArgs& a) {
  print_config({{"command", "evaluate"},
                {"manifest", a.manifest},
                {"scores", a.scores},
                {"out", a.out},
                {"heatmaps", a.heatmaps},
                {"macro", a.macro},
                {"cross_class_negatives", a.cross_class_negatives}});
  double overall = 0.0;
  wsvad_status status = wsvad_evaluate(
      a.manifest.c_str(), a.scores.c_str(), a.out.c_str(),
      a.heatmaps.empty() ? nullptr : a.heatmaps.c_str(), a.macro ? 1 : 0,
      a.cross_class_negatives ? 1 : 0, &overall);
  if (status == WSVAD_OK) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", overall);
    std::cout << "overall_auc: " << buf << "\n";
    std::cout << "report: " << a.out << "\n";
  }
  return finish(status);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weakly-supervised driving-video anomaly detection toolkit"};
  app.require_subcommand(1);

  SynthArgs synth;
  CLI::App* synth_cmd = app.add_subcommand("synth", "Generate a synthetic planted-anomaly dataset");
  synth_cmd->add_option("--out", synth.out_dir, "Output directory")->required();
  synth_cmd->add_option("--n-normal", synth.n_normal, "Normal video count");
  synth_cmd->add_option("--n-anomaly", synth.n_anomaly, "Anomalous video count");
  synth_cmd->add_option("--frames", synth.frames, "Frames per video");
  synth_cmd->add_option("--dim", synth.dim, "Embedding dimension");
  synth_cmd->add_option("--anomaly-len", synth.anomaly_len, "Planted interval length in frames");
  synth_cmd->add_option("--magnitude-boost", synth.magnitude_boost,
                        "Magnitude scale inside the interval (> 1)");
  synth_cmd->add_option("--noise-sigma", synth.noise_sigma, "Per-frame noise level");
  synth_cmd->add_option("--seed", synth.seed, "Generation seed");

  BuildArgs build;
  CLI::App* build_cmd =
      app.add_subcommand("build-manifest", "Assemble a manifest from source pools");
  build_cmd->add_option("--anomalous", build.anomalous, "Anomalous sources (JSONL)")->required();
  build_cmd->add_option("--normal", build.normal, "Normal sources (JSONL)")->required();
  build_cmd->add_option("--test-fraction", build.test_fraction,
                        "Fraction of annotated anomalous sources sent to test");
  build_cmd->add_option("--seed", build.seed, "Split assignment seed");
  build_cmd->add_option("--base-dir", build.base_dir,
                        "Directory feature paths resolve against (default: manifest directory)");
  build_cmd->add_option("--out", build.out, "Output manifest path")->required();

  ValidateArgs validate;
  CLI::App* validate_cmd = app.add_subcommand("validate", "Validate a manifest");
  validate_cmd->add_option("--manifest", validate.manifest, "Manifest path")->required();
  validate_cmd->add_flag("--deep", validate.deep, "Also decode every referenced feature file");
  validate_cmd->add_option("--base-dir", validate.base_dir,
                           "Directory feature paths resolve against");

  TransformArgs transform;
  CLI::App* transform_cmd =
      app.add_subcommand("transform", "Apply a feature transformation to a feature file");
  transform_cmd->add_option("--mode", transform.mode, "Transformation: m1, m2, or m3")
      ->required();
  transform_cmd->add_option("--input", transform.input, "Input .ftbf")->required();
  transform_cmd->add_option("--output", transform.output, "Output .ftbf")->required();
  transform_cmd->add_option("--dct-lowpass", transform.dct_lowpass,
                            "Keep only DCT coefficients below this index (m2, experimental)");

  TrainArgs train;
  CLI::App* train_cmd = app.add_subcommand("train", "Train the magnitude-MIL detector");
  train_cmd->add_option("--manifest", train.manifest, "Manifest path")->required();
  train_cmd->add_option("--base-dir", train.base_dir, "Directory feature paths resolve against");
  train_cmd->add_option("--out", train.out, "Output directory")->required();
  train_cmd->add_option("--ftb", train.ftb, "Feature transformation: m1, m2, or m3");
  train_cmd->add_option("--epochs", train.epochs, "Training epochs");
  train_cmd->add_option("--k", train.top_k, "Top-k snippets per bag");
  train_cmd->add_option("--margin", train.margin, "Magnitude separation margin");
  train_cmd->add_option("--alpha", train.alpha, "Magnitude hinge weight");
  train_cmd->add_option("--beta", train.beta, "Smoothness weight");
  train_cmd->add_option("--gamma", train.gamma, "Sparsity weight");
  train_cmd->add_option("--lr", train.learning_rate, "Learning rate");
  train_cmd->add_option("--momentum", train.momentum, "Momentum coefficient");
  train_cmd->add_option("--snippet-len", train.snippet_len, "Frames per snippet");
  train_cmd->add_option("--seed", train.seed, "Training seed (also the init seed)");
  train_cmd->add_option("--dct-lowpass", train.dct_lowpass,
                        "m2 DCT low-pass cutoff (0 keeps all coefficients)");
  train_cmd->add_option("--branch-dim", train.branch_dim,
                        "Encoder branch width (0 = input_dim / branch count)");
  train_cmd->add_option("--dilations", train.dilations, "Conv branch dilations");
  train_cmd->add_option("--kernel-size", train.kernel_size, "Conv kernel size (odd)");
  train_cmd->add_option("--scorer-hidden", train.scorer_hidden, "Scorer hidden widths");

  ScoreArgs score;
  CLI::App* score_cmd = app.add_subcommand("score", "Score videos with a trained checkpoint");
  score_cmd->add_option("--checkpoint", score.checkpoint, "Checkpoint path")->required();
  score_cmd->add_option("--manifest", score.manifest, "Manifest path")->required();
  score_cmd->add_option("--base-dir", score.base_dir, "Directory feature paths resolve against");
  score_cmd->add_option("--split", score.split, "Split to score: test, train, or all");
  score_cmd->add_option("--out", score.out, "Output directory for score CSVs")->required();

  EvaluateArgs evaluate;
  CLI::App* evaluate_cmd =
      app.add_subcommand("evaluate", "Frame-level ROC-AUC over score CSVs");
  evaluate_cmd->add_option("--manifest", evaluate.manifest, "Manifest path")->required();
  evaluate_cmd->add_option("--scores", evaluate.scores, "Directory of score CSVs")->required();
  evaluate_cmd->add_option("--out", evaluate.out, "Report JSON path")->required();
  evaluate_cmd->add_option("--heatmaps", evaluate.heatmaps,
                           "Also write per-video heatmap CSVs here");
  evaluate_cmd->add_flag("--macro", evaluate.macro, "Add a per-video macro-averaged AUC");
  evaluate_cmd->add_flag("--cross-class-negatives", evaluate.cross_class_negatives,
                         "Pool all test videos' normal frames as class-wise negatives");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (app.got_subcommand(synth_cmd)) return run_synth(synth);
  if (app.got_subcommand(build_cmd)) return run_build_manifest(build);
  if (app.got_subcommand(validate_cmd)) return run_validate(validate);
  if (app.got_subcommand(transform_cmd)) return run_transform(transform);
  if (app.got_subcommand(train_cmd)) return run_train(train);
  if (app.got_subcommand(score_cmd)) return run_score(score);
  if (app.got_subcommand(evaluate_cmd)) return run_evaluate(evaluate);
  return 2;
}
