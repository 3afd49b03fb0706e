// SPDX-License-Identifier: Apache-2.0
#include "fblab/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/os.h>

#include "fblab/error.hpp"
#include "fblab/random.hpp"
#include "fblab/vec.hpp"

namespace fblab {

DiversityReport gradient_diversity(const Objective& obj, std::span<const double> params) {
  const auto idx = all_indices(obj.example_count());
  const auto per_example = obj.per_example_grads(params, idx);
  OnlineMean mean(obj.param_count());
  DiversityReport r;
  for (const auto& g : per_example) {
    r.numerator += vec::squared_norm(g.grad);
    mean.add(g.grad);
  }
  const auto n = static_cast<double>(per_example.size());
  r.denominator = n * n * vec::squared_norm(mean.mean());
  if (!(r.denominator > 0.0)) {
    throw NumericError("gradient diversity undefined: full gradient is zero");
  }
  r.delta_d = r.numerator / r.denominator;
  return r;
}

NoiseReport noise_report(std::span<const double> g_ref, std::span<const double> g_test) {
  NoiseReport r;
  r.total_error = vec::norm(vec::sub(g_ref, g_test));
  const double ref = vec::norm(g_ref);
  r.relative_defined = ref > 0.0;
  r.relative_error = r.relative_defined ? r.total_error / ref : 0.0;
  return r;
}

double LandscapeProbe::loss_at(double t) const {
  for (std::size_t j = 0; j < t_grid.size(); ++j) {
    if (t_grid[j] == t) return losses[j];
  }
  throw UsageError("t = " + std::to_string(t) + " is not on the probe grid");
}

std::vector<double> filter_normalized_direction(const ParamVector& params, std::uint64_t seed) {
  params.validate();
  Rng rng = make_rng(derive_seed(seed, "direction"));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> d(params.size());
  for (double& v : d) v = normal(rng);

  auto rescale = [&](std::size_t offset, std::size_t len) {
    const auto theta = std::span<const double>(params.values).subspan(offset, len);
    const auto dir = std::span<double>(d).subspan(offset, len);
    const double target = vec::norm(theta);
    const double current = vec::norm(dir);
    if (target == 0.0 || current == 0.0) {
      std::fill(dir.begin(), dir.end(), 0.0);
      return;
    }
    vec::scale(target / current, dir);
  };
  for (const auto& s : params.segments) {
    if (s.kind == SegmentKind::weight) {
      for (std::size_t r = 0; r < s.rows; ++r) rescale(s.offset + r * s.cols, s.cols);
    } else {
      rescale(s.offset, s.size());
    }
  }
  return d;
}

LandscapeProbe landscape_1d(const Objective& obj, const ParamVector& params, std::uint64_t seed,
                            std::span<const double> t_grid) {
  if (std::find(t_grid.begin(), t_grid.end(), 0.0) == t_grid.end()) {
    throw UsageError("landscape t_grid must contain 0");
  }
  if (params.size() != obj.param_count()) throw ShapeError("landscape: parameter size mismatch");
  const auto dir = filter_normalized_direction(params, seed);
  const auto idx = all_indices(obj.example_count());
  LandscapeProbe probe;
  probe.direction_seed = seed;
  probe.t_grid.assign(t_grid.begin(), t_grid.end());
  std::vector<double> shifted(params.size());
  for (double t : t_grid) {
    if (t == 0.0) {
      probe.losses.push_back(obj.loss(params.values, idx));
      continue;
    }
    for (std::size_t i = 0; i < shifted.size(); ++i) shifted[i] = params.values[i] + t * dir[i];
    probe.losses.push_back(obj.loss(shifted, idx));
  }
  return probe;
}

double curvature_proxy(const LandscapeProbe& probe, double t) {
  return probe.loss_at(t) + probe.loss_at(-t) - 2.0 * probe.loss_at(0.0);
}

void write_probe_csv(const LandscapeProbe& probe, const std::filesystem::path& path) {
  auto out = fmt::output_file(path.string());
  out.print("t,loss\n");
  for (std::size_t j = 0; j < probe.t_grid.size(); ++j) {
    out.print("{:.17g},{:.17g}\n", probe.t_grid[j], probe.losses[j]);
  }
}

NoiseReport repro_error(const Objective& obj, std::span<const double> params, std::size_t repeats,
                        const AccumulationConfig& pipeline) {
  if (repeats < 2) throw UsageError("repro_error needs at least 2 repeats");
  std::vector<std::vector<double>> grads;
  grads.reserve(repeats);
  for (std::size_t r = 0; r < repeats; ++r) grads.push_back(accumulate_full(obj, params, pipeline).grad);
  NoiseReport mean;
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < repeats; ++a) {
    for (std::size_t b = a + 1; b < repeats; ++b) {
      const NoiseReport r = noise_report(grads[a], grads[b]);
      mean.total_error += r.total_error;
      mean.relative_error += r.relative_error;
      mean.relative_defined = mean.relative_defined && r.relative_defined;
      ++pairs;
    }
  }
  mean.total_error /= static_cast<double>(pairs);
  mean.relative_error /= static_cast<double>(pairs);
  return mean;
}

NoiseReport compare_pipelines(const Objective& obj, std::span<const double> params,
                              const AccumulationConfig& reference, const AccumulationConfig& test) {
  return noise_report(accumulate_full(obj, params, reference).grad,
                      accumulate_full(obj, params, test).grad);
}

}  // namespace fblab
