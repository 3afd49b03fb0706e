// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <fstream>
#include <iostream>
#include <memory>

#include <fmt/core.h>
#include <nlohmann/json.hpp>

#include "commands.hpp"
#include "fblab/config.hpp"
#include "fblab/diagnostics.hpp"
#include "fblab/error.hpp"
#include "fblab/run_io.hpp"
#include "fblab_cli/cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace fblab::cli {

namespace {

// 21 evenly spaced offsets in [-1, 1] with an exact 0 in the middle.
std::vector<double> default_grid() {
  std::vector<double> t;
  for (int i = -10; i <= 10; ++i) t.push_back(i / 10.0);
  return t;
}

json noise_json(const NoiseReport& r) {
  return {{"total_error", r.total_error},
          {"relative_error", r.relative_defined ? json(r.relative_error) : json(nullptr)}};
}

}  // namespace

int probe_command(const ProbeOptions& opt) {
  if (!opt.landscape && !opt.diversity && !opt.noise) {
    throw UsageError("probe: choose at least one of --landscape, --diversity, --noise");
  }
  const fs::path dir = opt.checkpoint.parent_path();
  const fs::path config_path = opt.config ? *opt.config : dir / "config.json";
  const fs::path out = opt.out ? *opt.out : dir;
  fs::create_directories(out.empty() ? fs::path(".") : out);

  const TrainConfig cfg = load_config(config_path);
  const Checkpoint ckpt = load_checkpoint(opt.checkpoint);
  ResolvedData data = resolve_data(cfg.dataset);
  std::shared_ptr<const Dataset> ds;
  if (opt.split == "validation") {
    if (!data.validation) throw UsageError("probe: the config has no validation data");
    ds = std::make_shared<const Dataset>(std::move(*data.validation));
  } else {
    ds = std::make_shared<const Dataset>(std::move(data.train));
  }
  if (ckpt.spec.layer_widths.front() != ds->dim || ckpt.spec.layer_widths.back() != ds->classes) {
    throw ShapeError("probe: checkpoint model does not match the config's data");
  }
  const MlpObjective obj(Mlp(ckpt.spec), ds, cfg.loss);

  json report;
  report["checkpoint"] = opt.checkpoint.string();
  report["split"] = opt.split;

  if (opt.landscape) {
    const std::vector<double> grid = opt.t_grid.empty() ? default_grid() : opt.t_grid;
    const LandscapeProbe probe = landscape_1d(obj, ckpt.params, opt.direction_seed, grid);
    write_probe_csv(probe, out / "landscape.csv");
    json l{{"direction_seed", opt.direction_seed}, {"points", grid.size()},
           {"csv", (out / "landscape.csv").string()}};
    const bool symmetric = std::find(grid.begin(), grid.end(), 0.5) != grid.end() &&
                           std::find(grid.begin(), grid.end(), -0.5) != grid.end();
    if (symmetric) l["curvature_proxy"] = curvature_proxy(probe, 0.5);
    report["landscape"] = l;
    std::cout << fmt::format("landscape: {} points -> {}\n", grid.size(),
                             (out / "landscape.csv").string());
    if (symmetric) std::cout << fmt::format("  curvature proxy (t=0.5): {:.6g}\n",
                                            l["curvature_proxy"].get<double>());
  }

  if (opt.diversity) {
    const DiversityReport d = gradient_diversity(obj, ckpt.params.values);
    report["diversity"] = {{"delta_d", d.delta_d}, {"numerator", d.numerator},
                           {"denominator", d.denominator}};
    std::cout << fmt::format("gradient diversity: {:.6g}\n", d.delta_d);
  }

  if (opt.noise) {
    const AccumulationConfig fp64{cfg.accumulation_block_size, AccumPrecision::fp64};
    const AccumulationConfig fp32{cfg.accumulation_block_size, AccumPrecision::fp32};
    const NoiseReport repro = repro_error(obj, ckpt.params.values, opt.repeats, fp64);
    const NoiseReport single = compare_pipelines(obj, ckpt.params.values, fp64, fp32);
    report["noise"] = {{"repeats", opt.repeats},
                       {"repro_fp64", noise_json(repro)},
                       {"fp32_vs_fp64", noise_json(single)}};
    std::cout << fmt::format("repro (fp64, {} repeats): total {:.3g}, relative {:.3g}\n",
                             opt.repeats, repro.total_error, repro.relative_error);
    std::cout << fmt::format("fp32 vs fp64: total {:.3g}, relative {:.3g}\n", single.total_error,
                             single.relative_error);
  }

  std::ofstream f(out / "probe.json");
  f << report.dump(2) << '\n';
  if (!f) throw Error("cannot write " + (out / "probe.json").string());
  return kOk;
}

}  // namespace fblab::cli
