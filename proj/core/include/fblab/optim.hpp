// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fblab/model.hpp"

namespace fblab {

// ---------------------------------------------------------------------------
// Learning-rate schedule

/// Linear warmup from 0 to `peak_lr`, then a single cosine decay that would
/// reach 0 after `anneal_horizon` further steps. Training may stop before the
/// horizon is exhausted (total_steps <= warmup_steps + anneal_horizon).
struct Schedule {
  double peak_lr = 0.4;
  std::uint64_t warmup_steps = 400;
  std::uint64_t anneal_horizon = 4000;
  std::uint64_t total_steps = 3000;

  void validate() const;
  bool operator==(const Schedule&) const = default;
};

/// Learning rate used for step `step` in [0, total_steps]; UsageError outside.
double lr_at(std::uint64_t step, const Schedule& s);

// ---------------------------------------------------------------------------
// Global clipping

struct ClipConfig {
  double max_norm = 0.25;
  double fudge = 1e-6;

  void validate() const;
  bool operator==(const ClipConfig&) const = default;
};

struct ClipResult {
  std::vector<double> grad;
  bool clipped = false;
  double norm_before = 0.0;
};

/// Rescales g by max_norm / (||g|| + fudge) when ||g|| > max_norm.
ClipResult clip_global(std::span<const double> g, const ClipConfig& cfg);

// ---------------------------------------------------------------------------
// Momentum

struct MomentumConfig {
  double momentum = 0.9;
  double weight_decay = 5e-4;
  bool nesterov = true;

  void validate() const;
  bool operator==(const MomentumConfig&) const = default;
};

struct MomentumState {
  std::vector<double> buffer;

  explicit MomentumState(std::size_t n = 0) : buffer(n, 0.0) {}
};

/// One SGD-with-momentum step, in place:
///   d   = g + weight_decay * params
///   buf = momentum * buf + d
///   params -= lr * (d + momentum * buf)   (nesterov)  or  lr * buf  (plain)
void nesterov_update(std::span<double> params, MomentumState& state, std::span<const double> g,
                     double lr, const MomentumConfig& cfg);

// ---------------------------------------------------------------------------
// Gradient noise baselines

enum class NoiseMode { none, additive, multiplicative };

std::string to_string(NoiseMode mode);
NoiseMode noise_mode_from_string(const std::string& name);

struct NoiseConfig {
  NoiseMode mode = NoiseMode::none;
  double scale = 0.01;
  std::uint64_t seed = 0;

  void validate() const;
  bool operator==(const NoiseConfig&) const = default;
};

/// additive: g + scale * xi; multiplicative: g * (1 + scale * xi), with
/// xi ~ N(0, I) drawn deterministically from (seed, step).
std::vector<double> inject_noise(std::span<const double> g, const NoiseConfig& cfg,
                                 std::uint64_t step);

// ---------------------------------------------------------------------------
// Accumulation

/// Count-weighted streaming mean, m <- m + (x - m) * w / W. The update is
/// applied with a running compensation term so repeated small increments
/// are not lost against a large running mean.
class OnlineMean {
 public:
  explicit OnlineMean(std::size_t n = 0) : mean_(n, 0.0), comp_(n, 0.0) {}

  void add(std::span<const double> x, double weight = 1.0);
  void add(double x, double weight = 1.0) { add(std::span<const double>(&x, 1), weight); }

  std::span<const double> mean() const { return mean_; }
  double total_weight() const { return total_; }
  std::vector<double> take() && { return std::move(mean_); }

 private:
  std::vector<double> mean_;
  std::vector<double> comp_;
  double total_ = 0.0;
};

enum class AccumPrecision { fp64, fp32 };

struct AccumulationConfig {
  std::size_t block_size = 128;
  AccumPrecision precision = AccumPrecision::fp64;

  bool operator==(const AccumulationConfig&) const = default;
};

/// Exact mean loss and gradient over every example, computed block by block
/// in index order and merged with OnlineMean. fp32 rounds each block
/// gradient and the running mean to single precision (measurement option).
GradReport accumulate_full(const Objective& obj, std::span<const double> params,
                           const AccumulationConfig& cfg);

inline GradReport accumulate_full(const Objective& obj, std::span<const double> params,
                                  std::size_t block_size) {
  return accumulate_full(obj, params, AccumulationConfig{block_size, AccumPrecision::fp64});
}

/// Same reduction over explicit blocks; also returns each block's report so
/// callers can reuse them (e.g. for the block gradient penalty).
GradReport accumulate_blocks(const Objective& obj, std::span<const double> params,
                             std::span<const std::vector<std::size_t>> blocks,
                             std::vector<GradReport>* block_reports = nullptr);

}  // namespace fblab
