// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "fblab/error.hpp"
#include "fblab/optim.hpp"
#include "fblab/vec.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

namespace fblab {
namespace {

TEST(Schedule, WarmupEndpoints) {
  const Schedule s;  // 0.4 peak, 400 warmup, 4000 horizon, 3000 total
  EXPECT_EQ(lr_at(0, s), 0.0);
  EXPECT_EQ(lr_at(400, s), 0.4);
  EXPECT_DOUBLE_EQ(lr_at(200, s), 0.2);
}

TEST(Schedule, FinalIterateAnchors) {
  Schedule s;
  EXPECT_NEAR(lr_at(3000, s), 0.1093, 1e-3);
  s.peak_lr = 0.8;
  EXPECT_NEAR(lr_at(3000, s), 0.2187, 1e-3);
}

TEST(Schedule, MatchesCosineFormula) {
  const Schedule s{0.8, 400, 4000, 3000};
  for (std::uint64_t k = 400; k <= 3000; k += 137) {
    const double want =
        0.8 * 0.5 * (1.0 + std::cos(std::numbers::pi * static_cast<double>(k - 400) / 4000.0));
    EXPECT_NEAR(lr_at(k, s), want, 1e-15);
  }
}

TEST(Schedule, MonotoneShape) {
  const Schedule s{0.4, 40, 400, 300};
  for (std::uint64_t k = 1; k <= 40; ++k) EXPECT_GT(lr_at(k, s), lr_at(k - 1, s));
  for (std::uint64_t k = 41; k <= 300; ++k) EXPECT_LT(lr_at(k, s), lr_at(k - 1, s));
}

TEST(Schedule, NoWarmupStartsAtPeak) {
  const Schedule s{0.3, 0, 100, 100};
  EXPECT_EQ(lr_at(0, s), 0.3);
  EXPECT_NEAR(lr_at(100, s), 0.0, 1e-15);
}

TEST(Schedule, RejectsOutOfRange) {
  const Schedule s{0.4, 10, 100, 50};
  EXPECT_THROW(lr_at(51, s), UsageError);
  Schedule bad{0.4, 10, 100, 200};  // runs past the annealing horizon
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = Schedule{-0.1, 10, 100, 50};
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(Clip, UnitNormScaledWithFudge) {
  const std::vector<double> g{0.6, 0.0, -0.8};
  const ClipResult r = clip_global(g, ClipConfig{0.25, 1e-6});
  EXPECT_TRUE(r.clipped);
  EXPECT_NEAR(vec::norm(r.grad), 0.25 / (1.0 + 1e-6), 1e-12);
  EXPECT_NEAR(vec::cosine(g, r.grad), 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(r.norm_before, 1.0);
}

TEST(Clip, BelowThresholdUnchanged) {
  const std::vector<double> g{0.06, 0.08};
  const ClipResult r = clip_global(g, ClipConfig{});
  EXPECT_FALSE(r.clipped);
  EXPECT_EQ(r.grad, g);
}

TEST(Clip, ClippedOutputsAreParallel) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal(0.0, 3.0);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> g(17);
    for (auto& x : g) x = normal(rng);
    const ClipResult r = clip_global(g, ClipConfig{});
    ASSERT_TRUE(r.clipped);
    EXPECT_NEAR(vec::cosine(g, r.grad), 1.0, 1e-12);
    EXPECT_LE(vec::norm(r.grad), 0.25);
  }
}

TEST(Clip, RejectsNonFinite) {
  const std::vector<double> g{1.0, std::nan("")};
  EXPECT_THROW(clip_global(g, ClipConfig{}), NumericError);
  ClipConfig bad;
  bad.max_norm = -1.0;
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(Nesterov, VanillaGradientDescent) {
  std::vector<double> p{1.0, -2.0, 0.5};
  const std::vector<double> g{0.3, 0.1, -0.2};
  MomentumState st(3);
  nesterov_update(p, st, g, 0.1, MomentumConfig{0.0, 0.0, true});
  EXPECT_EQ(p, (std::vector<double>{1.0 - 0.1 * 0.3, -2.0 - 0.1 * 0.1, 0.5 + 0.1 * 0.2}));
}

TEST(Nesterov, HandComputedScalarQuadratic) {
  // L = theta^2 / 2, so g = theta.
  // step 1: d = 1, buf = 1, theta = 1 - 0.1 (1 + 0.9) = 0.81
  // step 2: d = 0.81, buf = 0.9 + 0.81 = 1.71, theta = 0.81 - 0.1 (0.81 + 1.539) = 0.5751
  std::vector<double> theta{1.0};
  MomentumState st(1);
  const MomentumConfig cfg{0.9, 0.0, true};
  nesterov_update(theta, st, std::vector<double>{theta[0]}, 0.1, cfg);
  EXPECT_DOUBLE_EQ(theta[0], 0.81);
  EXPECT_DOUBLE_EQ(st.buffer[0], 1.0);
  nesterov_update(theta, st, std::vector<double>{theta[0]}, 0.1, cfg);
  EXPECT_DOUBLE_EQ(theta[0], 0.5751);
  EXPECT_DOUBLE_EQ(st.buffer[0], 1.71);
}

TEST(Nesterov, PlainMomentumUsesBuffer) {
  std::vector<double> theta{1.0};
  MomentumState st(1);
  const MomentumConfig cfg{0.9, 0.0, false};
  nesterov_update(theta, st, std::vector<double>{1.0}, 0.1, cfg);
  nesterov_update(theta, st, std::vector<double>{1.0}, 0.1, cfg);
  EXPECT_DOUBLE_EQ(theta[0], 1.0 - 0.1 - 0.1 * 1.9);
}

TEST(Nesterov, WeightDecayReachesEveryIndex) {
  auto f = testing::make_net(1, {2, 4, 2}, 4);
  std::vector<double> p = f.params.values;
  const std::vector<double> zero(p.size(), 0.0);
  MomentumState st(p.size());
  nesterov_update(p, st, zero, 0.5, MomentumConfig{0.0, 0.1, true});
  for (const auto& seg : f.params.segments) {
    for (std::size_t i = seg.offset; i < seg.offset + seg.size(); ++i) {
      EXPECT_DOUBLE_EQ(p[i], f.params.values[i] * (1.0 - 0.05)) << "index " << i;
    }
  }
}

TEST(Noise, ZeroScaleIsIdentity) {
  const std::vector<double> g{1.0, -2.0, 3.0};
  for (auto mode : {NoiseMode::additive, NoiseMode::multiplicative}) {
    EXPECT_EQ(inject_noise(g, NoiseConfig{mode, 0.0, 3}, 7), g);
  }
  EXPECT_EQ(inject_noise(g, NoiseConfig{NoiseMode::none, 1.0, 3}, 7), g);
}

TEST(Noise, MultiplicativeOnZeroIsZero) {
  const std::vector<double> zero(5, 0.0);
  EXPECT_EQ(inject_noise(zero, NoiseConfig{NoiseMode::multiplicative, 0.5, 1}, 2), zero);
}

TEST(Noise, AdditiveIsUnbiased) {
  const std::vector<double> g{0.5, -1.0, 2.0, 0.0};
  const NoiseConfig cfg{NoiseMode::additive, 0.01, 42};
  const int draws = 10000;
  std::vector<double> mean(g.size(), 0.0);
  for (int k = 1; k <= draws; ++k) {
    const auto out = inject_noise(g, cfg, static_cast<std::uint64_t>(k));
    for (std::size_t i = 0; i < g.size(); ++i) mean[i] += (out[i] - g[i]) / draws;
  }
  for (double m : mean) EXPECT_LE(std::abs(m), 4.0 * 0.01 / std::sqrt(draws));
}

TEST(Noise, DeterministicPerSeedAndStep) {
  const std::vector<double> g{1.0, 1.0};
  const NoiseConfig cfg{NoiseMode::additive, 0.1, 9};
  EXPECT_EQ(inject_noise(g, cfg, 3), inject_noise(g, cfg, 3));
  EXPECT_NE(inject_noise(g, cfg, 3), inject_noise(g, cfg, 4));
  EXPECT_NE(inject_noise(g, cfg, 3), inject_noise(g, NoiseConfig{NoiseMode::additive, 0.1, 10}, 3));
}

TEST(OnlineMean, SmallSequenceExact) {
  OnlineMean m(1);
  for (double x : {1.0, 2.0, 3.0}) m.add(x);
  EXPECT_EQ(m.mean()[0], 2.0);
  EXPECT_EQ(m.total_weight(), 3.0);
}

TEST(OnlineMean, WeightedChunks) {
  OnlineMean m(2);
  m.add(std::vector<double>{1.0, 10.0}, 3.0);
  m.add(std::vector<double>{5.0, 20.0}, 1.0);
  EXPECT_DOUBLE_EQ(m.mean()[0], 2.0);
  EXPECT_DOUBLE_EQ(m.mean()[1], 12.5);
}

TEST(OnlineMean, NoWorseThanNaiveOnMagnitudeSpread) {
  for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> expo(-5.0, 5.0);
    std::vector<double> xs(10000);
    for (auto& x : xs) x = std::pow(10.0, expo(rng));
    const double ref = testing::extended_sum(xs) / static_cast<double>(xs.size());
    double naive = 0.0;
    for (double x : xs) naive += x;
    naive /= static_cast<double>(xs.size());
    OnlineMean m(1);
    for (double x : xs) m.add(x);
    EXPECT_LE(std::abs(m.mean()[0] - ref), std::abs(naive - ref)) << "seed " << seed;
  }
}

TEST(Accumulate, BlockSizeInvariance) {
  auto f = testing::make_net(3, {3, 8, 3}, 37, Activation::relu);
  const GradReport whole = accumulate_full(*f.obj, f.params.values, 37);
  for (std::size_t bs : {1, 2, 5, 16, 128}) {
    const GradReport r = accumulate_full(*f.obj, f.params.values, bs);
    EXPECT_LE(testing::rel_l2(r.grad, whole.grad), 1e-10) << "block size " << bs;
    EXPECT_NEAR(r.loss, whole.loss, 1e-12 * whole.loss);
    EXPECT_EQ(r.count, 37u);
  }
  const GradReport direct = f.obj->grad(f.params.values, f.all);
  EXPECT_LE(testing::rel_l2(whole.grad, direct.grad), 1e-12);
}

TEST(Accumulate, SinglePrecisionIsCloseButNotExact) {
  auto f = testing::make_net(4, {3, 8, 3}, 40);
  const GradReport d = accumulate_full(*f.obj, f.params.values, AccumulationConfig{8, AccumPrecision::fp64});
  const GradReport s = accumulate_full(*f.obj, f.params.values, AccumulationConfig{8, AccumPrecision::fp32});
  const double err = testing::rel_l2(s.grad, d.grad);
  EXPECT_GT(err, 0.0);
  EXPECT_LT(err, 1e-5);
}

TEST(Accumulate, BlocksReportPerBlock) {
  auto f = testing::make_net(5, {2, 4, 2}, 10);
  const IndexBlocks blocks = contiguous_blocks(f.all, 4);
  std::vector<GradReport> reports;
  const GradReport r = accumulate_blocks(*f.obj, f.params.values, blocks, &reports);
  ASSERT_EQ(reports.size(), 3u);
  EXPECT_EQ(reports[2].count, 2u);
  EXPECT_EQ(reports[1].grad, f.obj->grad(f.params.values, blocks[1]).grad);
  EXPECT_LE(testing::rel_l2(r.grad, f.obj->grad(f.params.values, f.all).grad), 1e-12);
}

}  // namespace
}  // namespace fblab
