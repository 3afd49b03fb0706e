// SPDX-License-Identifier: Apache-2.0
#include "fblab/implicit_reg.hpp"

#include <cmath>

#include "fblab/error.hpp"
#include "fblab/vec.hpp"

namespace fblab {

std::string to_string(DiffMode mode) {
  switch (mode) {
    case DiffMode::forward: return "forward";
    case DiffMode::central: return "central";
    case DiffMode::oracle: return "oracle";
  }
  return "?";
}

DiffMode diff_mode_from_string(const std::string& name) {
  if (name == "forward") return DiffMode::forward;
  if (name == "central") return DiffMode::central;
  if (name == "oracle") return DiffMode::oracle;
  throw ConfigError("unknown diff_mode '" + name + "'");
}

void RegConfig::validate() const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ConfigError("reg alpha must be >= 0");
  if (block_size == 0) throw ConfigError("reg block_size must be >= 1");
  if (!(eps_numerator > 0.0)) throw ConfigError("reg eps_numerator must be > 0");
  if (!(zero_grad_guard > 0.0)) throw ConfigError("reg zero_grad_guard must be > 0");
}

void SamConfig::validate() const {
  if (!(rho > 0.0)) throw ConfigError("sam rho must be > 0");
}

double penalty_value(const Objective& obj, std::span<const double> params,
                     std::span<const std::vector<std::size_t>> blocks) {
  if (blocks.empty()) throw ConfigError("penalty needs at least one block");
  double sum = 0.0;
  for (const auto& block : blocks) {
    if (block.empty()) throw ConfigError("penalty block is empty");
    sum += vec::squared_norm(obj.grad(params, block).grad);
  }
  return sum / static_cast<double>(blocks.size());
}

std::optional<double> epsilon_for(std::span<const double> g, const RegConfig& cfg) {
  const double n = vec::norm(g);
  if (!(n > cfg.zero_grad_guard)) return std::nullopt;
  return cfg.eps_numerator / n;
}

namespace {

std::vector<double> grad_at_offset(const Objective& obj, std::span<const double> params,
                                   Batch block, double step, std::span<const double> dir) {
  std::vector<double> shifted(params.begin(), params.end());
  vec::axpy(step, dir, shifted);
  return obj.grad(shifted, block).grad;
}

}  // namespace

BlockRegGrad reg_grad_block(const Objective& obj, std::span<const double> params, Batch block,
                            const RegConfig& cfg, std::optional<std::span<const double>> block_grad) {
  if (block.empty()) throw ConfigError("regularizer block is empty");
  std::vector<double> owned;
  std::span<const double> g;
  if (block_grad) {
    g = *block_grad;
    if (g.size() != obj.param_count()) throw ShapeError("block gradient size mismatch");
  } else {
    owned = obj.grad(params, block).grad;
    g = owned;
  }

  BlockRegGrad out;
  const auto eps = epsilon_for(g, cfg);
  if (!eps) {
    out.grad.assign(g.size(), 0.0);
    out.skipped = true;
    return out;
  }

  switch (cfg.diff_mode) {
    case DiffMode::forward: {
      out.grad = grad_at_offset(obj, params, block, *eps, g);
      for (std::size_t i = 0; i < g.size(); ++i) out.grad[i] = (out.grad[i] - g[i]) / *eps;
      break;
    }
    case DiffMode::central: {
      out.grad = grad_at_offset(obj, params, block, *eps, g);
      const auto minus = grad_at_offset(obj, params, block, -*eps, g);
      for (std::size_t i = 0; i < g.size(); ++i) {
        out.grad[i] = (out.grad[i] - minus[i]) / (2.0 * *eps);
      }
      break;
    }
    case DiffMode::oracle: {
      out.grad = hessian_oracle(obj, params, block).times(g);
      break;
    }
  }
  return out;
}

PenaltyReport penalty_grad(const Objective& obj, std::span<const double> params,
                           std::span<const std::vector<std::size_t>> blocks, const RegConfig& cfg,
                           double tau_k, std::span<const GradReport> block_reports) {
  if (blocks.empty()) throw ConfigError("penalty needs at least one block");
  if (!block_reports.empty() && block_reports.size() != blocks.size()) {
    throw ShapeError("penalty: one block report per block required");
  }
  PenaltyReport rep;
  rep.coefficient = cfg.alpha * tau_k / 4.0;
  rep.grad.assign(obj.param_count(), 0.0);

  double value_sum = 0.0;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (blocks[b].empty()) throw ConfigError("penalty block is empty");
    std::vector<double> owned;
    std::span<const double> g;
    if (!block_reports.empty()) {
      g = block_reports[b].grad;
    } else {
      owned = obj.grad(params, blocks[b]).grad;
      g = owned;
    }
    value_sum += vec::squared_norm(g);

    if (!epsilon_for(g, cfg)) {
      ++rep.blocks_skipped_zero_grad;
      continue;
    }
    ++rep.blocks_used;
    if (rep.coefficient == 0.0) continue;
    // Fixed block order keeps the reduction deterministic.
    const BlockRegGrad hg = reg_grad_block(obj, params, blocks[b], cfg, g);
    vec::axpy(1.0, hg.grad, rep.grad);
  }
  const double inv = 1.0 / static_cast<double>(blocks.size());
  rep.value = value_sum * inv;
  // d/dtheta ||g_B||^2 = 2 H_B g_B, so coefficient * 2 = alpha * tau_k / 2.
  vec::scale(2.0 * rep.coefficient * inv, rep.grad);
  return rep;
}

std::vector<double> sam_grad(const Objective& obj, std::span<const double> params, Batch block,
                             const SamConfig& cfg, double zero_grad_guard) {
  cfg.validate();
  const std::vector<double> g = obj.grad(params, block).grad;
  const double n = vec::norm(g);
  if (!(n > zero_grad_guard)) return g;
  return grad_at_offset(obj, params, block, cfg.rho / n, g);
}

}  // namespace fblab
