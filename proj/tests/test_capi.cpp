// Exercises the shared-library surface: opaque handles, status codes, and
// the thread-local error message.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "wsvad.h"

#include "support/tmpdir.hpp"

TEST_CASE("version and status names") {
  CHECK(std::string(wsvad_version()) == "0.1.0");
  CHECK(std::string(wsvad_status_name(WSVAD_OK)) == "ok");
  CHECK(std::string(wsvad_status_name(WSVAD_ERROR_VALIDATION)) == "validation");
}

TEST_CASE("feature handles create, write, read, and report shape") {
  testsup::TmpDir tmp("capi_features");
  const std::vector<float> data = {0.0f, 1.0f, 2.0f, 3.0f, 4.0f, 5.0f};

  wsvad_features* features = nullptr;
  REQUIRE(wsvad_features_create(data.data(), 3, 2, &features) == WSVAD_OK);
  CHECK(wsvad_features_rows(features) == 3);
  CHECK(wsvad_features_cols(features) == 2);

  const std::string path = (tmp / "f.ftbf").string();
  REQUIRE(wsvad_features_write(features, path.c_str()) == WSVAD_OK);

  wsvad_features* loaded = nullptr;
  REQUIRE(wsvad_features_read(path.c_str(), &loaded) == WSVAD_OK);
  std::vector<float> copy(6, -1.0f);
  REQUIRE(wsvad_features_copy_data(loaded, copy.data(), copy.size()) == WSVAD_OK);
  CHECK(copy == data);

  wsvad_features_free(features);
  wsvad_features_free(loaded);
}

TEST_CASE("failures set the status and the thread-local message") {
  wsvad_features* features = nullptr;
  CHECK(wsvad_features_read("definitely_missing.ftbf", &features) == WSVAD_ERROR_IO);
  CHECK(std::strlen(wsvad_last_error()) > 0);

  CHECK(wsvad_features_read(nullptr, &features) == WSVAD_ERROR_ARGUMENT);
  CHECK(wsvad_features_create(nullptr, 1, 1, &features) == WSVAD_ERROR_ARGUMENT);

  // A zero-row matrix violates the invariants.
  const float value = 1.0f;
  CHECK(wsvad_features_create(&value, 0, 1, &features) == WSVAD_ERROR_ARGUMENT);
}

TEST_CASE("format errors are distinguished from io errors") {
  testsup::TmpDir tmp("capi_format");
  const std::string path = (tmp / "junk.ftbf").string();
  std::ofstream(path) << "this is not a feature file at all";

  wsvad_features* features = nullptr;
  CHECK(wsvad_features_read(path.c_str(), &features) == WSVAD_ERROR_FORMAT);
  CHECK(std::string(wsvad_last_error()).find("magic") != std::string::npos);
}

TEST_CASE("snippetize and transform through the C surface") {
  const std::vector<float> data = {1.0f, 2.0f, 3.0f, 4.0f, 5.0f};
  wsvad_features* features = nullptr;
  REQUIRE(wsvad_features_create(data.data(), 5, 1, &features) == WSVAD_OK);

  wsvad_features* pooled = nullptr;
  REQUIRE(wsvad_features_snippetize(features, 2, &pooled) == WSVAD_OK);
  CHECK(wsvad_features_rows(pooled) == 3);
  std::vector<float> pooled_data(3);
  REQUIRE(wsvad_features_copy_data(pooled, pooled_data.data(), 3) == WSVAD_OK);
  CHECK(pooled_data == std::vector<float>{1.5f, 3.5f, 5.0f});

  wsvad_features* identity = nullptr;
  REQUIRE(wsvad_features_transform(features, WSVAD_FTB_M1, 0, &identity) == WSVAD_OK);
  std::vector<float> same(5);
  REQUIRE(wsvad_features_copy_data(identity, same.data(), 5) == WSVAD_OK);
  CHECK(same == data);

  wsvad_features* m3 = nullptr;
  REQUIRE(wsvad_features_transform(features, WSVAD_FTB_M3, 0, &m3) == WSVAD_OK);
  std::vector<float> transformed(5);
  REQUIRE(wsvad_features_copy_data(m3, transformed.data(), 5) == WSVAD_OK);
  // Row 0: delta 0 + sigmoid(1).
  CHECK(transformed[0] == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))).epsilon(1e-6));
  // Row 1: delta 1 + sigmoid(2).
  CHECK(transformed[1] == doctest::Approx(1.0 + 1.0 / (1.0 + std::exp(-2.0))).epsilon(1e-6));

  wsvad_features_free(features);
  wsvad_features_free(pooled);
  wsvad_features_free(identity);
  wsvad_features_free(m3);
}

TEST_CASE("roc_auc through the C surface") {
  const std::vector<double> scores = {0.9, 0.1, 0.5, 0.5};
  const std::vector<int32_t> labels = {1, 0, 1, 0};
  double auc = 0.0;
  REQUIRE(wsvad_roc_auc(scores.data(), labels.data(), 4, &auc) == WSVAD_OK);
  CHECK(auc == doctest::Approx(0.875));  // three wins and one tie over four pairs

  const std::vector<int32_t> degenerate = {1, 1, 1, 1};
  CHECK(wsvad_roc_auc(scores.data(), degenerate.data(), 4, &auc) == WSVAD_ERROR_ARGUMENT);
}

TEST_CASE("the full pipeline runs end to end through the C surface") {
  testsup::TmpDir tmp("capi_pipeline");
  const std::string data_dir = (tmp / "data").string();

  char* manifest_path = nullptr;
  REQUIRE(wsvad_synth_generate(
              R"({"n_normal": 6, "n_anomaly": 6, "frames": 64, "dim": 8,
                  "anomaly_len": 16, "seed": 3})",
              data_dir.c_str(), &manifest_path) == WSVAD_OK);

  wsvad_manifest* manifest = nullptr;
  REQUIRE(wsvad_manifest_read(manifest_path, &manifest) == WSVAD_OK);
  CHECK(wsvad_manifest_size(manifest) == 12);
  char* report_json = nullptr;
  REQUIRE(wsvad_manifest_validate(manifest, nullptr, 1, &report_json) == WSVAD_OK);
  CHECK(std::string(report_json) == "[]");
  wsvad_string_free(report_json);
  wsvad_manifest_free(manifest);

  const std::string run_dir = (tmp / "run").string();
  REQUIRE(wsvad_train(manifest_path, nullptr,
                      R"({"epochs": 2, "snippet_len": 4, "ftb_mode": "m3", "seed": 3,
                          "scorer_hidden": [16, 8], "margin": 5.0})",
                      run_dir.c_str()) == WSVAD_OK);

  const std::string scores_dir = (tmp / "scores").string();
  REQUIRE(wsvad_score((run_dir + "/checkpoint.wsck").c_str(), manifest_path, nullptr, "test",
                      scores_dir.c_str()) == WSVAD_OK);

  const std::string report_path = (tmp / "report.json").string();
  double overall = -1.0;
  REQUIRE(wsvad_evaluate(manifest_path, scores_dir.c_str(), report_path.c_str(), nullptr, 0, 0,
                         &overall) == WSVAD_OK);
  CHECK(overall >= 0.0);
  CHECK(overall <= 1.0);
  CHECK(std::filesystem::exists(report_path));

  wsvad_string_free(manifest_path);
}

TEST_CASE("build-manifest assembles and writes through the C surface") {
  testsup::TmpDir tmp("capi_build");

  // Feature files the sources point at.
  const std::vector<float> payload(20, 1.0f);
  for (const char* name : {"a.ftbf", "b.ftbf", "n.ftbf"}) {
    wsvad_features* f = nullptr;
    REQUIRE(wsvad_features_create(payload.data(), 10, 2, &f) == WSVAD_OK);
    REQUIRE(wsvad_features_write(f, (tmp / name).string().c_str()) == WSVAD_OK);
    wsvad_features_free(f);
  }

  std::ofstream(tmp / "anom.jsonl")
      << R"({"feature_path": "a.ftbf", "frame_count": 10, "class_tag": "TC",)"
      << R"( "anomaly_intervals": [[2, 6]], "split": "test"})" << "\n"
      << R"({"feature_path": "b.ftbf", "frame_count": 10, "class_tag": "ST",)"
      << R"( "anomaly_intervals": [[1, 4]], "split": "train"})" << "\n";
  std::ofstream(tmp / "norm.jsonl")
      << R"({"feature_path": "n.ftbf", "frame_count": 10})" << "\n";

  const std::string out = (tmp / "manifest.jsonl").string();
  REQUIRE(wsvad_build_manifest((tmp / "anom.jsonl").string().c_str(),
                               (tmp / "norm.jsonl").string().c_str(), 0.3, 1,
                               tmp.path().string().c_str(), out.c_str()) == WSVAD_OK);

  wsvad_manifest* manifest = nullptr;
  REQUIRE(wsvad_manifest_read(out.c_str(), &manifest) == WSVAD_OK);
  CHECK(wsvad_manifest_size(manifest) == 3);
  char* report = nullptr;
  REQUIRE(wsvad_manifest_validate(manifest, nullptr, 1, &report) == WSVAD_OK);
  CHECK(std::string(report) == "[]");
  wsvad_string_free(report);
  wsvad_manifest_free(manifest);
}

TEST_CASE("train rejects unknown config keys") {
  testsup::TmpDir tmp("capi_bad_config");
  CHECK(wsvad_train("whatever.jsonl", nullptr, R"({"learning_rat": 0.1})",
                    (tmp / "out").string().c_str()) == WSVAD_ERROR_ARGUMENT);
  CHECK(std::string(wsvad_last_error()).find("learning_rat") != std::string::npos);
}
