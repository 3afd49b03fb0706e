// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "fblab/dataset.hpp"
#include "fblab/error.hpp"

namespace fblab {
namespace {

namespace fs = std::filesystem;

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("fblab_datapipe_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  f << text;
}

TEST(Synthetic, GaussiansDeterministic) {
  const Dataset a = make_synthetic(SyntheticKind::gaussians, 100, 2, 2, 3);
  const Dataset b = make_synthetic(SyntheticKind::gaussians, 100, 2, 2, 3);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.features, b.features);  // bitwise equal doubles
}

TEST(Synthetic, DifferentSeedsDiffer) {
  EXPECT_NE(make_synthetic(SyntheticKind::spirals, 50, 2, 2, 1).features,
            make_synthetic(SyntheticKind::spirals, 50, 2, 2, 2).features);
}

TEST(Synthetic, BalancedClassCounts) {
  std::set<std::pair<int, int>> seen;
  for (std::uint64_t seed = 0; seed < 16; ++seed) {
    const Dataset ds = make_synthetic(SyntheticKind::spirals, 101, 2, 2, seed);
    const int zeros = static_cast<int>(std::count(ds.labels.begin(), ds.labels.end(), 0));
    const int ones = static_cast<int>(std::count(ds.labels.begin(), ds.labels.end(), 1));
    EXPECT_TRUE((zeros == 51 && ones == 50) || (zeros == 50 && ones == 51));
    seen.insert({zeros, ones});
    // Fixed by the seed.
    EXPECT_EQ(ds.labels, make_synthetic(SyntheticKind::spirals, 101, 2, 2, seed).labels);
  }
  EXPECT_EQ(seen.size(), 2u) << "remainder class should depend on the seed";
}

TEST(Synthetic, AllKindsValidAndShaped) {
  for (auto kind : {SyntheticKind::spirals, SyntheticKind::gaussians, SyntheticKind::rings}) {
    const Dataset ds = make_synthetic(kind, 60, 5, 3, 9);
    EXPECT_NO_THROW(ds.validate());
    EXPECT_EQ(ds.size(), 60u);
    EXPECT_EQ(ds.dim, 5u);
    EXPECT_EQ(ds.classes, 3u);
  }
}

TEST(Synthetic, RejectsBadShapes) {
  EXPECT_THROW(make_synthetic(SyntheticKind::spirals, 10, 2, 1, 0), ConfigError);
  EXPECT_THROW(make_synthetic(SyntheticKind::spirals, 1, 2, 2, 0), ConfigError);
  EXPECT_THROW(make_synthetic(SyntheticKind::spirals, 10, 1, 2, 0), ConfigError);
}

TEST_F(TempDir, CsvRoundTrip) {
  Dataset ds;
  ds.dim = 2;
  ds.classes = 3;
  ds.features = {0.1, -2.5, 1e-300, 3.0, 0.30000000000000004, -0.0};
  ds.labels = {2, 0, 1};
  const fs::path p = dir_ / "three.csv";
  write_csv(ds, p);
  const Dataset back = load_csv(p, 3);
  EXPECT_EQ(back.features, ds.features);
  EXPECT_EQ(back.labels, ds.labels);
  EXPECT_EQ(back.dim, 2u);
  const fs::path p2 = dir_ / "again.csv";
  write_csv(back, p2);
  EXPECT_EQ(slurp(p), slurp(p2));
}

TEST_F(TempDir, EmptyFileIsLoadError) {
  const fs::path p = dir_ / "empty.csv";
  write_text(p, "");
  EXPECT_THROW(load_csv(p), LoadError);
  write_text(p, "f0,label\n");
  EXPECT_THROW(load_csv(p), LoadError);
}

TEST_F(TempDir, LabelOutOfDeclaredRange) {
  const fs::path p = dir_ / "labels.csv";
  write_text(p, "f0,f1,label\n0.5,1.0,0\n0.1,0.2,2\n");
  try {
    load_csv(p, 2);
    FAIL() << "expected LoadError";
  } catch (const LoadError& e) {
    EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos) << e.what();
  }
  EXPECT_EQ(load_csv(p).classes, 3u);
}

TEST_F(TempDir, MalformedRowsNameTheLine) {
  const fs::path p = dir_ / "bad.csv";
  write_text(p, "f0,label\n1.0,0\nabc,1\n");
  try {
    load_csv(p);
    FAIL() << "expected LoadError";
  } catch (const LoadError& e) {
    EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos) << e.what();
  }
  write_text(p, "f0,label\n1.0,0,7\n");
  EXPECT_THROW(load_csv(p), LoadError);
  EXPECT_THROW(load_csv(dir_ / "missing.csv"), LoadError);
}

TEST(Expand, SingleCopyIsIdentity) {
  const Dataset ds = make_synthetic(SyntheticKind::gaussians, 40, 3, 2, 1);
  AugmentationSpec aug{AugmentationKind::gaussian_jitter, 0.5, 4, 0};
  const Dataset out = expand_fixed(ds, 1, aug);
  EXPECT_EQ(out.features, ds.features);
  EXPECT_EQ(out.labels, ds.labels);
}

TEST(Expand, TenfoldSizeAndDeterminism) {
  const Dataset ds = make_synthetic(SyntheticKind::spirals, 500, 2, 2, 5);
  AugmentationSpec aug{AugmentationKind::gaussian_jitter, 0.05, 11, 0};
  const Dataset a = expand_fixed(ds, 10, aug);
  const Dataset b = expand_fixed(ds, 10, aug);
  EXPECT_EQ(a.size(), 5000u);
  EXPECT_EQ(a, b);
  // Identity copy first, jittered copies afterwards.
  EXPECT_TRUE(std::equal(ds.features.begin(), ds.features.end(), a.features.begin()));
  EXPECT_FALSE(std::equal(ds.features.begin(), ds.features.end(),
                          a.features.begin() + static_cast<long>(ds.features.size())));
}

TEST(Expand, MagnitudeZeroCopiesExactly) {
  const Dataset ds = make_synthetic(SyntheticKind::rings, 30, 2, 2, 2);
  const Dataset out = expand_fixed(ds, 3, AugmentationSpec{AugmentationKind::gaussian_jitter, 0.0, 9, 0});
  ASSERT_EQ(out.size(), 90u);
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t j = 0; j < 30; ++j) {
      const auto row = out.row(c * 30 + j);
      const auto orig = ds.row(j);
      EXPECT_TRUE(std::equal(row.begin(), row.end(), orig.begin()));
      EXPECT_EQ(out.labels[c * 30 + j], ds.labels[j]);
    }
  }
}

TEST(Expand, PixelShiftFlipKeepsValuesFromTheGrid) {
  Dataset ds;
  ds.dim = 16;
  ds.classes = 2;
  for (int i = 0; i < 16; ++i) ds.features.push_back(i + 1.0);
  ds.labels = {1};
  const Dataset out = expand_fixed(ds, 8, AugmentationSpec{AugmentationKind::pixel_shift_flip, 1.0, 3, 0});
  ASSERT_EQ(out.size(), 8u);
  for (std::size_t c = 1; c < 8; ++c) {
    std::multiset<double> values;
    for (double v : out.row(c)) {
      EXPECT_TRUE(v == 0.0 || (v >= 1.0 && v <= 16.0 && v == std::floor(v)));
      if (v != 0.0) values.insert(v);
    }
    // A shift of at most one cell drops at most one row and one column.
    EXPECT_GE(values.size(), 9u);
    for (double v : values) EXPECT_EQ(values.count(v), 1u);
  }
  EXPECT_THROW(expand_fixed(make_synthetic(SyntheticKind::gaussians, 4, 3, 2, 0), 2,
                            AugmentationSpec{AugmentationKind::pixel_shift_flip, 1.0, 0, 0}),
               ConfigError);
}

TEST(Expand, RejectsZeroCopies) {
  const Dataset ds = make_synthetic(SyntheticKind::gaussians, 4, 2, 2, 0);
  EXPECT_THROW(expand_fixed(ds, 0, {}), ConfigError);
}

TEST(PlanEpoch, FullBatchSingleBlock) {
  const IndexBlocks blocks = plan_epoch(BatchPlan{BatchMode::full_batch, 128, 0}, 50, 3);
  ASSERT_EQ(blocks.size(), 1u);
  EXPECT_EQ(blocks[0], all_indices(50));
}

TEST(PlanEpoch, FixedOrderIdenticalAcrossEpochs) {
  const BatchPlan plan{BatchMode::fixed_order, 4, 21};
  EXPECT_EQ(plan_epoch(plan, 30, 0), plan_epoch(plan, 30, 7));
}

TEST(PlanEpoch, WithoutReplacementPartitions) {
  const BatchPlan plan{BatchMode::without_replacement, 3, 5};
  const IndexBlocks blocks = plan_epoch(plan, 10, 0);
  ASSERT_EQ(blocks.size(), 4u);
  std::vector<std::size_t> sizes;
  std::vector<std::size_t> all;
  for (const auto& b : blocks) {
    sizes.push_back(b.size());
    all.insert(all.end(), b.begin(), b.end());
  }
  EXPECT_EQ(sizes, (std::vector<std::size_t>{3, 3, 3, 1}));
  std::sort(all.begin(), all.end());
  EXPECT_EQ(all, all_indices(10));
  EXPECT_NE(plan_epoch(plan, 10, 0), plan_epoch(plan, 10, 1)) << "reshuffled every epoch";
  EXPECT_EQ(plan_epoch(plan, 10, 4), plan_epoch(plan, 10, 4));
}

TEST(PlanEpoch, WithReplacementDrawsInRange) {
  const BatchPlan plan{BatchMode::with_replacement, 4, 8};
  const IndexBlocks blocks = plan_epoch(plan, 10, 2);
  EXPECT_EQ(blocks.size(), blocks_per_epoch(plan, 10));
  for (const auto& b : blocks) {
    EXPECT_EQ(b.size(), 4u);
    for (std::size_t i : b) EXPECT_LT(i, 10u);
  }
}

TEST(PlanEpoch, BatchLargerThanDataset) {
  EXPECT_THROW(plan_epoch(BatchPlan{BatchMode::without_replacement, 11, 0}, 10, 0), ConfigError);
  EXPECT_THROW(plan_epoch(BatchPlan{BatchMode::without_replacement, 0, 0}, 10, 0), ConfigError);
}

TEST(ContiguousBlocks, SplitsInOrder) {
  const auto idx = all_indices(7);
  const IndexBlocks b = contiguous_blocks(idx, 3);
  ASSERT_EQ(b.size(), 3u);
  EXPECT_EQ(b[0], (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_EQ(b[2], (std::vector<std::size_t>{6}));
}

TEST(EnumNames, RoundTrip) {
  for (auto m : {BatchMode::full_batch, BatchMode::without_replacement, BatchMode::with_replacement,
                 BatchMode::fixed_order}) {
    EXPECT_EQ(batch_mode_from_string(to_string(m)), m);
  }
  for (auto k : {SyntheticKind::spirals, SyntheticKind::gaussians, SyntheticKind::rings}) {
    EXPECT_EQ(synthetic_kind_from_string(to_string(k)), k);
  }
  EXPECT_THROW(batch_mode_from_string("minibatch"), ConfigError);
}

}  // namespace
}  // namespace fblab
