/* Copyright 2026 The Layerspin Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/


#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "layerspin/config.hpp"
#include "layerspin/experiment.hpp"
#include "layerspin/export.hpp"
#include "layerspin/report.hpp"

namespace layerspin {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Small synthetic problem that trains in milliseconds.
json blob_config(const std::string& id = "blobs") {
  return json{{"run_id", id},
              {"seed", 3},
              {"epochs", 3},
              {"batch_size", 16},
              {"model", {{"layer_widths", {8, 12, 4}}}},
              {"optimizer", {{"kind", "sgd"}}},
              {"layca", {{"variant", "layca"}}},
              {"schedule", {{"rho0", 0.1}}},
              {"dataset",
               {{"source", "synthetic_blobs"},
                {"classes", 4},
                {"per_class", 20},
                {"dimension", 8},
                {"test_per_class", 10}}}};
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), {}};
}

std::size_t count_lines(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("layerspin_h_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

void expect_schema_error(const json& j, const std::string& path) {
  try {
    parse_run_config(j).validate();
    FAIL() << "expected ConfigError at " << path;
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find(path), std::string::npos) << e.what();
  }
}

TEST(RunConfig, ParsesAndRoundTrips) {
  const RunConfig c = parse_run_config(blob_config());
  EXPECT_EQ(c.run_id, "blobs");
  EXPECT_EQ(c.model.layer_widths, (std::vector<std::size_t>{8, 12, 4}));
  EXPECT_EQ(c.dataset.source, DataSource::synthetic_blobs);
  const RunConfig back = parse_run_config(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
}

TEST(RunConfig, SchemaErrorsNameTheField) {
  json j = blob_config();
  j["layca"]["varient"] = "layca";
  expect_schema_error(j, "layca.varient");

  j = blob_config();
  j["optimizer"]["weight_decay"] = 5e-4;
  expect_schema_error(j, "optimizer.weight_decay");

  j = blob_config();
  j["schedule"]["alpha"] = 1.5;
  expect_schema_error(j, "schedule.alpha");

  j = blob_config();
  j["epochs"] = "ten";
  expect_schema_error(j, "epochs");

  j = blob_config();
  j["dataset"]["dimension"] = 9;
  expect_schema_error(j, "dataset.dimension");

  j = blob_config();
  j["run_id"] = "a/b";
  expect_schema_error(j, "run_id");
}

TEST(RunConfig, WeightDecayWithPlainUpdateIsAccepted) {
  json j = blob_config();
  j["layca"]["variant"] = "none";
  j["optimizer"]["weight_decay"] = 5e-4;
  EXPECT_NO_THROW(parse_run_config(j).validate());
}

TEST(RunConfig, ShippedExamplesLoad) {
  std::size_t n = 0;
  for (const auto& entry : fs::directory_iterator(LAYERSPIN_CONFIG_DIR)) {
    if (entry.path().extension() != ".json") continue;
    EXPECT_NO_THROW({
      const RunConfig c = load_run_config(entry.path());
      load_grid_spec(entry.path());
      if (c.dataset.source == DataSource::mnist_idx) {
        EXPECT_TRUE(fs::exists(c.dataset.train_images));
      }
    }) << entry.path();
    ++n;
  }
  EXPECT_GE(n, 5u);
}

TEST(Grid, CrossModeSharesThePivotPoint) {
  const auto points = expand_grid(GridSpec{});
  EXPECT_EQ(points.size(), 22u);
  std::size_t pivot_zero = 0;
  for (const GridPoint& p : points)
    if (p.alpha == 0.0 && p.rate == std::pow(3.0, -3)) ++pivot_zero;
  EXPECT_EQ(pivot_zero, 1u);
  GridSpec product;
  product.mode = GridMode::product;
  EXPECT_EQ(expand_grid(product).size(), 130u);
}

TEST(Train, DeterministicGivenSeed) {
  const RunConfig c = parse_run_config(blob_config());
  const DataBundle data = load_datasets(c.dataset);
  const RunResult a = train(c, data), b = train(c, data);
  ASSERT_EQ(a.status, RunStatus::completed);
  for (std::size_t l = 0; l < a.model.layer_count(); ++l) {
    EXPECT_EQ(a.model.layer(l).weights(), b.model.layer(l).weights());
    EXPECT_EQ(a.record.angles(l), b.record.angles(l));
  }
  EXPECT_EQ(a.metrics.size(), 4u);
  EXPECT_EQ(a.steps, 3 * steps_per_epoch(80, 16));
}

TEST(Train, ZeroRateLeavesKernelsAtInitAndAccuracyAtChance) {
  json j = blob_config();
  j["schedule"]["rho0"] = 0.0;
  const RunConfig c = parse_run_config(j);
  const RunResult r = train(c, load_datasets(c.dataset));
  for (std::size_t l = 0; l < r.record.layer_count(); ++l) {
    EXPECT_EQ(r.record.final_distance(l), 0.0);
    for (double a : r.record.angles(l)) EXPECT_EQ(a, 0.0);
  }
  EXPECT_EQ(r.final_metrics().mean_cosine_distance, 0.0);
  // biases also get zero rate, so the model is exactly the initial one
  EXPECT_EQ(r.final_metrics().train_accuracy, r.metrics.front().train_accuracy);
}

TEST(Train, ReplayMustCoverEveryStep) {
  const RunConfig c = parse_run_config(blob_config());
  const DataBundle data = load_datasets(c.dataset);
  ReplaySchedule short_replay{"x", {{0.1}, {0.1}}};
  EXPECT_THROW(train(c, data, &short_replay), ConfigError);
}

TEST(Train, ReplayOfOwnAnglesReproducesThem) {
  const RunConfig c = parse_run_config(blob_config());
  const DataBundle data = load_datasets(c.dataset);
  const RunResult src = train(c, data);
  const ReplaySchedule replay = build_replay(src.record, c.run_id);
  const RunResult copy = train(c, data, &replay);
  for (std::size_t l = 0; l < src.record.layer_count(); ++l) {
    ASSERT_EQ(copy.record.angles(l).size(), src.record.angles(l).size());
    for (std::size_t t = 0; t < src.record.angles(l).size(); ++t)
      EXPECT_NEAR(copy.record.angles(l)[t], src.record.angles(l)[t], 1e-9);
  }
}

TEST_F(TempDir, RunOutputsAreReproducibleByteForByte) {
  const RunConfig c = parse_run_config(blob_config());
  const json m1 = run_experiment(c, dir_ / "a");
  const json m2 = run_experiment(c, dir_ / "b");
  EXPECT_EQ(m1["files"], m2["files"]);
  EXPECT_EQ(m1["status"], "completed");
  for (const char* f : {"curves.csv", "metrics.csv", "curves.svg", "angles.csv", "replay.json",
                        "manifest.json", "features.json"})
    EXPECT_TRUE(fs::exists(dir_ / "a" / f)) << f;
  EXPECT_EQ(count_lines(slurp(dir_ / "a/curves.csv")), 1u + 4u * 2u);
  EXPECT_EQ(count_lines(slurp(dir_ / "a/metrics.csv")), 1u + 4u);
  for (const auto& [name, digest] : m1["files"].items())
    EXPECT_EQ(sha256_file(dir_ / "a" / name), digest.get<std::string>()) << name;
}

TEST_F(TempDir, ManifestReloadsAsConfig) {
  const RunConfig c = parse_run_config(blob_config());
  run_experiment(c, dir_ / "a");
  const RunConfig again = load_run_config(dir_ / "a/manifest.json");
  EXPECT_EQ(to_json(again), to_json(c));
}

TEST_F(TempDir, ReportHasOneRowPerManifest) {
  for (const char* id : {"r1", "r2", "r3"}) {
    json j = blob_config(id);
    j["epochs"] = 1;
    run_experiment(parse_run_config(j), dir_ / id);
  }
  fs::create_directories(dir_ / "junk");
  write_file(dir_ / "junk/manifest.json", R"({"format":"other"})");
  const auto runs = collect_runs(dir_);
  ASSERT_EQ(runs.size(), 3u);
  EXPECT_EQ(runs[0].run_id, "r1");
  std::ostringstream os;
  write_summary_csv(os, runs);
  EXPECT_EQ(count_lines(os.str()), 4u);
}

TEST(Svg, EmptyRecordIsStillAValidDocument) {
  std::ostringstream os;
  write_curves_svg(os, RotationRecord({"dense_0"}), "empty");
  const std::string s = os.str();
  EXPECT_EQ(s.rfind("<svg", 0) == 0 || s.rfind("<?xml", 0) == 0, true);
  EXPECT_NE(s.find("</svg>"), std::string::npos);
}

TEST(Pgm, ZeroVectorIsMidGrey) {
  std::ostringstream os;
  const std::vector<double> zeros(6, 0.0);
  write_feature_pgm(os, zeros, 2, 3);
  const std::string s = os.str();
  ASSERT_EQ(s.substr(0, 2), "P5");
  const std::string pixels = s.substr(s.size() - 6);
  for (char p : pixels) EXPECT_EQ(static_cast<unsigned char>(p), 128);
}

TEST(Pgm, ExtremesMapToBlackAndWhite) {
  std::ostringstream os;
  const std::vector<double> v{-2, 2};
  write_feature_pgm(os, v, 1, 2);
  const std::string s = os.str();
  EXPECT_EQ(static_cast<unsigned char>(s[s.size() - 2]), 0);
  EXPECT_EQ(static_cast<unsigned char>(s[s.size() - 1]), 255);
}

TEST(Sha256, KnownDigest) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

// CLI exit codes: 0 ok, 2 schema error, 1 other failure.
class Cli : public TempDir {
 protected:
  int run(const std::string& args) {
    const std::string cmd = std::string("\"") + LAYERSPIN_CLI + "\" " + args + " > \"" +
                            (dir_ / "out.txt").string() + "\" 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
  }
};

TEST_F(Cli, ExitCodes) {
  json good = blob_config("cli");
  good["epochs"] = 1;
  write_file(dir_ / "good.json", good.dump());
  json bad = good;
  bad["layca"]["bogus"] = 1;
  write_file(dir_ / "bad.json", bad.dump());
  write_file(dir_ / "broken.json", "{not json");

  EXPECT_EQ(run("run \"" + (dir_ / "good.json").string() + "\" -q --out \"" + dir_.string() + "\""), 0);
  EXPECT_TRUE(fs::exists(dir_ / "cli/manifest.json"));
  EXPECT_EQ(run("run \"" + (dir_ / "bad.json").string() + "\" --out \"" + dir_.string() + "\""), 2);
  EXPECT_NE(slurp(dir_ / "out.txt").find("layca.bogus"), std::string::npos);
  EXPECT_EQ(run("run \"" + (dir_ / "broken.json").string() + "\""), 2);
  EXPECT_EQ(run("report \"" + dir_.string() + "\""), 0);
  EXPECT_TRUE(fs::exists(dir_ / "summary.csv"));
}

}  // namespace
}  // namespace layerspin
