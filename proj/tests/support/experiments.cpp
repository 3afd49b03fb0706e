// SPDX-License-Identifier: Apache-2.0
#include "experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <memory>

#include "fblab/config.hpp"
#include "fblab/diagnostics.hpp"

namespace fblab::testing {

PresetRun run_preset(const std::string& name, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  TrainConfig cfg = preset(name);
  cfg.run_seed = seed;
  cfg.snapshot_policy = SnapshotPolicy::last;
  const ResolvedData data = resolve_data(cfg.dataset);
  const RunLog log = train(cfg, data.train, data.validation ? &*data.validation : nullptr);

  PresetRun out;
  out.name = name;
  out.seed = seed;
  out.summary = log.summary;
  const ModelSpec spec = resolve_model_spec(cfg, data.train.dim, data.train.classes);
  auto borrowed = std::shared_ptr<const Dataset>(&data.train, [](const Dataset*) {});
  const MlpObjective obj(Mlp(spec), borrowed, cfg.loss);
  const std::vector<double> grid{-0.5, 0.0, 0.5};
  out.curvature = curvature_proxy(landscape_1d(obj, *log.last_params, kProbeDirectionSeed, grid), 0.5);
  out.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

const PresetRun& cached_run(const std::string& name, std::uint64_t seed) {
  static std::map<std::pair<std::string, std::uint64_t>, PresetRun> cache;
  const auto key = std::make_pair(name, seed);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, run_preset(name, seed)).first;
  return it->second;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double sample_std(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace fblab::testing
