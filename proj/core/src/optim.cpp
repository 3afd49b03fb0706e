// SPDX-License-Identifier: Apache-2.0
#include "fblab/optim.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "fblab/error.hpp"
#include "fblab/random.hpp"
#include "fblab/vec.hpp"

namespace fblab {

void Schedule::validate() const {
  if (!(peak_lr > 0.0) || !std::isfinite(peak_lr)) throw ConfigError("peak_lr must be > 0");
  if (total_steps == 0) throw ConfigError("total_steps must be >= 1");
  if (anneal_horizon == 0) throw ConfigError("anneal_horizon must be >= 1");
  if (warmup_steps >= total_steps) throw ConfigError("warmup_steps must be < total_steps");
  if (total_steps > warmup_steps + anneal_horizon) {
    throw ConfigError("total_steps must be <= warmup_steps + anneal_horizon");
  }
}

double lr_at(std::uint64_t step, const Schedule& s) {
  if (step > s.total_steps) {
    throw UsageError("step " + std::to_string(step) + " outside [0, " +
                     std::to_string(s.total_steps) + "]");
  }
  if (s.warmup_steps > 0 && step <= s.warmup_steps) {
    return s.peak_lr * static_cast<double>(step) / static_cast<double>(s.warmup_steps);
  }
  const double progress =
      static_cast<double>(step - s.warmup_steps) / static_cast<double>(s.anneal_horizon);
  return s.peak_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

void ClipConfig::validate() const {
  if (!(max_norm > 0.0) || !std::isfinite(max_norm)) throw ConfigError("clip max_norm must be > 0");
  if (!(fudge > 0.0) || !std::isfinite(fudge)) throw ConfigError("clip fudge must be > 0");
}

ClipResult clip_global(std::span<const double> g, const ClipConfig& cfg) {
  if (!vec::all_finite(g)) throw NumericError("cannot clip a non-finite gradient");
  ClipResult r;
  r.grad.assign(g.begin(), g.end());
  r.norm_before = vec::norm(g);
  if (r.norm_before > cfg.max_norm) {
    vec::scale(cfg.max_norm / (r.norm_before + cfg.fudge), r.grad);
    r.clipped = true;
  }
  return r;
}

void MomentumConfig::validate() const {
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
  if (!(weight_decay >= 0.0) || !std::isfinite(weight_decay)) {
    throw ConfigError("weight_decay must be >= 0");
  }
}

void nesterov_update(std::span<double> params, MomentumState& state, std::span<const double> g,
                     double lr, const MomentumConfig& cfg) {
  if (params.size() != g.size() || state.buffer.size() != g.size()) {
    throw ShapeError("momentum update: parameter, gradient and buffer sizes differ");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double d = g[i] + cfg.weight_decay * params[i];
    const double buf = cfg.momentum * state.buffer[i] + d;
    state.buffer[i] = buf;
    const double direction = cfg.nesterov ? d + cfg.momentum * buf : buf;
    params[i] -= lr * direction;
  }
}

std::string to_string(NoiseMode mode) {
  switch (mode) {
    case NoiseMode::none: return "none";
    case NoiseMode::additive: return "additive";
    case NoiseMode::multiplicative: return "multiplicative";
  }
  return "?";
}

NoiseMode noise_mode_from_string(const std::string& name) {
  if (name == "none") return NoiseMode::none;
  if (name == "additive") return NoiseMode::additive;
  if (name == "multiplicative") return NoiseMode::multiplicative;
  throw ConfigError("unknown noise mode '" + name + "'");
}

void NoiseConfig::validate() const {
  if (!(scale >= 0.0) || !std::isfinite(scale)) throw ConfigError("noise scale must be >= 0");
}

std::vector<double> inject_noise(std::span<const double> g, const NoiseConfig& cfg,
                                 std::uint64_t step) {
  std::vector<double> out(g.begin(), g.end());
  if (cfg.mode == NoiseMode::none || cfg.scale == 0.0) return out;
  Rng rng = make_rng(derive_seed(cfg.seed, step));
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double& v : out) {
    const double xi = normal(rng);
    if (cfg.mode == NoiseMode::additive) {
      v += cfg.scale * xi;
    } else {
      v *= 1.0 + cfg.scale * xi;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

void OnlineMean::add(std::span<const double> x, double weight) {
  if (x.size() != mean_.size()) throw ShapeError("online mean: input length mismatch");
  if (!(weight > 0.0)) throw UsageError("online mean: weight must be positive");
  total_ += weight;
  const double frac = weight / total_;
  for (std::size_t i = 0; i < x.size(); ++i) {
    // Kahan-compensated m += (x - m) * w / W.
    const double step = (x[i] - mean_[i]) * frac - comp_[i];
    const double next = mean_[i] + step;
    comp_[i] = (next - mean_[i]) - step;
    mean_[i] = next;
  }
}

namespace {

GradReport accumulate_fp32(const Objective& obj, std::span<const double> params,
                           std::size_t block_size) {
  const std::size_t n = obj.example_count();
  std::vector<float> mean(obj.param_count(), 0.0f);
  float loss = 0.0f;
  float total = 0.0f;
  std::vector<std::size_t> block;
  for (std::size_t start = 0; start < n; start += block_size) {
    block.clear();
    for (std::size_t i = start; i < std::min(n, start + block_size); ++i) block.push_back(i);
    const GradReport r = obj.grad(params, block);
    total += static_cast<float>(r.count);
    const float frac = static_cast<float>(r.count) / total;
    for (std::size_t i = 0; i < mean.size(); ++i) {
      mean[i] += (static_cast<float>(r.grad[i]) - mean[i]) * frac;
    }
    loss += (static_cast<float>(r.loss) - loss) * frac;
  }
  GradReport out;
  out.grad.assign(mean.begin(), mean.end());
  out.loss = loss;
  out.count = n;
  return out;
}

}  // namespace

GradReport accumulate_blocks(const Objective& obj, std::span<const double> params,
                             std::span<const std::vector<std::size_t>> blocks,
                             std::vector<GradReport>* block_reports) {
  if (blocks.empty()) throw ConfigError("accumulation needs at least one block");
  OnlineMean grad(obj.param_count());
  OnlineMean loss(1);
  if (block_reports) block_reports->clear();
  std::size_t count = 0;
  for (const auto& block : blocks) {
    GradReport r = obj.grad(params, block);
    const auto w = static_cast<double>(r.count);
    grad.add(r.grad, w);
    loss.add(r.loss, w);
    count += r.count;
    if (block_reports) block_reports->push_back(std::move(r));
  }
  GradReport out;
  out.loss = loss.mean()[0];
  out.count = count;
  out.grad = std::move(grad).take();
  return out;
}

GradReport accumulate_full(const Objective& obj, std::span<const double> params,
                           const AccumulationConfig& cfg) {
  if (cfg.block_size == 0) throw ConfigError("accumulation block_size must be >= 1");
  if (cfg.precision == AccumPrecision::fp32) return accumulate_fp32(obj, params, cfg.block_size);
  const auto blocks = contiguous_blocks(all_indices(obj.example_count()), cfg.block_size);
  return accumulate_blocks(obj, params, blocks);
}

}  // namespace fblab
