// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "fblab/model.hpp"
#include "fblab/optim.hpp"

namespace fblab {

/// Gradient diversity: sum_i ||grad L(x_i)||^2 / (N^2 ||grad L||^2).
struct DiversityReport {
  double delta_d = 0.0;
  double numerator = 0.0;
  double denominator = 0.0;
};

/// Over every example of `obj`. NumericError when the mean gradient is zero.
DiversityReport gradient_diversity(const Objective& obj, std::span<const double> params);

struct NoiseReport {
  double total_error = 0.0;     // ||g_ref - g_test||
  double relative_error = 0.0;  // total / ||g_ref||; 0 when g_ref is zero
  bool relative_defined = true;
};

NoiseReport noise_report(std::span<const double> g_ref, std::span<const double> g_test);

/// 1-D slice of the full-dataset loss along one random direction.
struct LandscapeProbe {
  std::uint64_t direction_seed = 0;
  std::vector<double> t_grid;
  std::vector<double> losses;
  bool filter_normalized = true;

  double loss_at(double t) const;
};

/// Standard normal direction rescaled so each weight row and each bias
/// segment has the norm of the matching parameter slice (zero where the
/// parameters are zero).
std::vector<double> filter_normalized_direction(const ParamVector& params, std::uint64_t seed);

/// t_grid must contain 0. The objective's layout decides the normalization units.
LandscapeProbe landscape_1d(const Objective& obj, const ParamVector& params, std::uint64_t seed,
                            std::span<const double> t_grid);

/// losses(t) + losses(-t) - 2 losses(0); both +t and -t must be on the grid.
double curvature_proxy(const LandscapeProbe& probe, double t = 0.5);

void write_probe_csv(const LandscapeProbe& probe, const std::filesystem::path& path);

/// Mean pairwise error between `repeats` evaluations of the same accumulation.
NoiseReport repro_error(const Objective& obj, std::span<const double> params, std::size_t repeats,
                        const AccumulationConfig& pipeline);

/// Error of `test` against `reference` accumulation of the same gradient.
NoiseReport compare_pipelines(const Objective& obj, std::span<const double> params,
                              const AccumulationConfig& reference, const AccumulationConfig& test);

}  // namespace fblab
