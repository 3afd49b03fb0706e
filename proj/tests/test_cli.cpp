// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "fblab/config.hpp"
#include "fblab/dataset.hpp"
#include "fblab_cli/cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("fblab_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(std::vector<std::string> args) {
    args.insert(args.begin(), "fblab");
    return fblab::cli::run_cli(args);
  }

  // A small fb_base variant so each run takes well under a second.
  fs::path small_config() {
    fblab::TrainConfig c = fblab::preset("fb_base");
    c.model.hidden_widths = {16};
    c.schedule = {0.4, 1, 9, 10};
    auto& src = std::get<fblab::SyntheticSource>(c.dataset.source);
    src.n = 200;
    src.n_val = 200;
    const fs::path p = dir_ / "small.json";
    fblab::write_config(c, p);
    return p;
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
  }

  fs::path dir_;
};

TEST_F(CliTest, TrainTwiceIsByteIdentical) {
  const auto cfg = small_config().string();
  ASSERT_EQ(run({"train", "--config", cfg, "--seed", "1", "--out", (dir_ / "a").string()}), 0);
  ASSERT_EQ(run({"train", "--config", cfg, "--seed", "1", "--out", (dir_ / "b").string()}), 0);
  for (const char* f : {"runlog.csv", "validation.csv", "params.bin", "config.json"}) {
    ASSERT_TRUE(fs::exists(dir_ / "a" / f)) << f;
    EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f)) << f;
  }
  ASSERT_EQ(run({"train", "--config", cfg, "--seed", "2", "--out", (dir_ / "c").string()}), 0);
  EXPECT_NE(slurp(dir_ / "a" / "runlog.csv"), slurp(dir_ / "c" / "runlog.csv"));

  std::istringstream log(slurp(dir_ / "a" / "runlog.csv"));
  std::string line;
  std::size_t rows = 0;
  std::getline(log, line);
  while (std::getline(log, line)) ++rows;
  EXPECT_EQ(rows, 10u);
}

TEST_F(CliTest, SummarizeIsPermutationInvariant) {
  const auto cfg = small_config().string();
  std::vector<std::string> runs;
  for (int s = 1; s <= 3; ++s) {
    runs.push_back((dir_ / ("run" + std::to_string(s))).string());
    ASSERT_EQ(run({"train", "--config", cfg, "--seed", std::to_string(s), "--out", runs.back()}), 0);
  }
  ASSERT_EQ(run({"summarize", runs[0], runs[1], runs[2], "--out", (dir_ / "s1").string()}), 0);
  ASSERT_EQ(run({"summarize", runs[2], runs[0], runs[1], "--out", (dir_ / "s2").string()}), 0);
  EXPECT_EQ(slurp(dir_ / "s1" / "summary.json"), slurp(dir_ / "s2" / "summary.json"));

  const json s = json::parse(slurp(dir_ / "s1" / "summary.json"));
  EXPECT_EQ(s.at("count"), 3);
  const json& acc = s.at("metrics").at("final_val_acc");
  EXPECT_EQ(acc.at("n"), 3);

  double vals[3];
  for (int i = 0; i < 3; ++i) {
    vals[i] = json::parse(slurp(fs::path(runs[i]) / "summary.json"))
                  .at("run").at("final_val_acc").get<double>();
  }
  const double mean = (vals[0] + vals[1] + vals[2]) / 3.0;
  double ss = 0.0;
  for (double v : vals) ss += (v - mean) * (v - mean);
  EXPECT_NEAR(acc.at("mean").get<double>(), mean, 1e-12);
  EXPECT_NEAR(acc.at("std").get<double>(), std::sqrt(ss / 2.0), 1e-12);
}

TEST_F(CliTest, ProbeLandscapeRowsMatchGrid) {
  const auto out = (dir_ / "run").string();
  ASSERT_EQ(run({"train", "--config", small_config().string(), "--out", out}), 0);
  ASSERT_EQ(run({"probe", "--checkpoint", (fs::path(out) / "params.json").string(), "--landscape",
                 "--diversity", "--noise", "--t-grid", "-0.5,-0.25,0,0.25,0.5"}),
            0);
  std::istringstream csv(slurp(fs::path(out) / "landscape.csv"));
  std::string line;
  std::size_t rows = 0;
  std::getline(csv, line);
  while (std::getline(csv, line)) ++rows;
  EXPECT_EQ(rows, 5u);

  const json probe = json::parse(slurp(fs::path(out) / "probe.json"));
  EXPECT_TRUE(probe.contains("landscape"));
  EXPECT_TRUE(probe.contains("diversity"));
  EXPECT_TRUE(probe.contains("noise"));

  EXPECT_EQ(run({"probe", "--checkpoint", (fs::path(out) / "params.json").string(), "--landscape",
                 "--t-grid", "-0.5,0.5"}),
            fblab::cli::kUsageError);
}

TEST_F(CliTest, ExpandWritesCopies) {
  const fblab::Dataset ds = fblab::make_synthetic(fblab::SyntheticKind::gaussians, 12, 3, 3, 4);
  const fs::path in = dir_ / "in.csv";
  fblab::write_csv(ds, in);
  const fs::path a = dir_ / "a.csv";
  const fs::path b = dir_ / "b.csv";
  for (const auto& p : {a, b}) {
    ASSERT_EQ(run({"expand", "--in", in.string(), "--out", p.string(), "--copies", "10",
                   "--magnitude", "0.1", "--seed", "3"}),
              0);
  }
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_EQ(fblab::load_csv(a).size(), 120u);
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(run({"presets"}), fblab::cli::kOk);
  EXPECT_EQ(run({"--help"}), fblab::cli::kOk);
  EXPECT_EQ(run({"train", "--preset", "nope", "--out", (dir_ / "x").string()}), fblab::cli::kUsageError);
  EXPECT_EQ(run({"frobnicate"}), fblab::cli::kUsageError);
  EXPECT_EQ(run({"probe", "--checkpoint", (dir_ / "missing.json").string()}), fblab::cli::kUsageError);

  std::ofstream(dir_ / "bad.json") << R"({"clip": {"max_norm": -1}, "bogus": 1})";
  EXPECT_EQ(run({"train", "--config", (dir_ / "bad.json").string()}), fblab::cli::kUsageError);

  // Divergence is reported as an aborted run, not a crash: features this
  // large overflow the second step's logits.
  fblab::Dataset huge = fblab::make_synthetic(fblab::SyntheticKind::spirals, 20, 2, 2, 0);
  for (double& v : huge.features) v *= 1e200;
  fblab::write_csv(huge, dir_ / "huge.csv");
  fblab::TrainConfig c = fblab::preset("fb_base");
  c.model.hidden_widths = {8};
  c.schedule = {0.4, 1, 10, 10};
  fblab::FileSource src;
  src.train_path = (dir_ / "huge.csv").string();
  c.dataset.source = src;
  fblab::write_config(c, dir_ / "wild.json");
  EXPECT_EQ(run({"train", "--config", (dir_ / "wild.json").string(), "--out",
                 (dir_ / "wild").string()}),
            fblab::cli::kRunAborted);
}

}  // namespace
