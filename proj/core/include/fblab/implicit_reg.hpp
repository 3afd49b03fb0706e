// SPDX-License-Identifier: Apache-2.0
#pragma once

// Explicit stand-in for the implicit bias of mini-batch SGD: the mean squared
// norm of block-averaged gradients,
//
//   R(theta) = 1/|blocks| * sum_B || 1/|B| sum_{x in B} grad L(x, theta) ||^2,
//
// added to the loss with coefficient alpha * tau_k / 4 where tau_k is the
// current learning rate. Its gradient needs H_B g_B per block, which is
// approximated by differencing gradients along g_B with step
// eps = eps_numerator / ||g_B||.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fblab/dataset.hpp"
#include "fblab/model.hpp"

namespace fblab {

enum class DiffMode { forward, central, oracle };

std::string to_string(DiffMode mode);
DiffMode diff_mode_from_string(const std::string& name);

struct RegConfig {
  double alpha = 1.0;
  std::size_t block_size = 128;
  double eps_numerator = 0.01;
  DiffMode diff_mode = DiffMode::forward;
  double zero_grad_guard = 1e-12;

  void validate() const;
  bool operator==(const RegConfig&) const = default;
};

struct SamConfig {
  double rho = 0.01;

  void validate() const;
};

struct PenaltyReport {
  double value = 0.0;        // R(theta), unscaled
  std::vector<double> grad;  // gradient of coefficient * R(theta)
  double coefficient = 0.0;  // alpha * tau_k / 4
  std::size_t blocks_used = 0;
  std::size_t blocks_skipped_zero_grad = 0;
};

/// R(theta) over `blocks`. ConfigError on an empty block.
double penalty_value(const Objective& obj, std::span<const double> params,
                     std::span<const std::vector<std::size_t>> blocks);

/// Finite-difference step eps_numerator / ||g||, or nullopt when
/// ||g|| <= zero_grad_guard (the caller treats the block as contributing zero).
std::optional<double> epsilon_for(std::span<const double> g, const RegConfig& cfg);

struct BlockRegGrad {
  std::vector<double> grad;  // approximation of H_B g_B = grad(0.5 ||g_B||^2)
  bool skipped = false;
};

/// Approximates H_B g_B for one block. `block_grad`, when given, must be the
/// block-mean gradient at `params` and saves one gradient evaluation.
/// `params` is never modified; perturbations act on a private copy.
BlockRegGrad reg_grad_block(const Objective& obj, std::span<const double> params, Batch block,
                            const RegConfig& cfg,
                            std::optional<std::span<const double>> block_grad = std::nullopt);

/// Gradient of (alpha * tau_k / 4) * R(theta):
///   (alpha * tau_k / 2) * mean_B reg_grad_block(B).
/// `block_reports`, when given, must hold each block's GradReport at `params`.
PenaltyReport penalty_grad(const Objective& obj, std::span<const double> params,
                           std::span<const std::vector<std::size_t>> blocks, const RegConfig& cfg,
                           double tau_k, std::span<const GradReport> block_reports = {});

/// Gradient at the ascended point theta + (rho / ||g||) g. Falls back to the
/// plain gradient when ||g|| is below the zero guard.
std::vector<double> sam_grad(const Objective& obj, std::span<const double> params, Batch block,
                             const SamConfig& cfg, double zero_grad_guard = 1e-12);

}  // namespace fblab
