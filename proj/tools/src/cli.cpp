// SPDX-License-Identifier: Apache-2.0
#include "fblab_cli/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/chrono.h>
#include <fmt/core.h>

#include "commands.hpp"
#include "fblab/config.hpp"
#include "fblab/dataset.hpp"
#include "fblab/error.hpp"
#include "fblab/run_io.hpp"
#include "fblab/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace fblab::cli {

namespace {

struct TrainOptions {
  std::optional<fs::path> config;
  std::optional<std::string> preset;
  std::optional<std::uint64_t> seed;
  std::optional<fs::path> out;
};

fs::path default_out_dir(const std::string& name, std::uint64_t seed) {
  const char* root = std::getenv("FBLAB_OUT");
  const fs::path base = (root && *root) ? fs::path(root) : fs::path("runs");
  return base / fmt::format("{}-seed{}", name, seed);
}

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(now));
}

void write_json(const json& j, const fs::path& path) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path.string());
  f << j.dump(2) << '\n';
  if (!f) throw Error("failed writing " + path.string());
}

int train_command(const TrainOptions& opt) {
  TrainConfig cfg = opt.config ? load_config(*opt.config) : preset(*opt.preset);
  if (opt.seed) cfg.run_seed = *opt.seed;
  cfg.validate();

  const std::string name = opt.preset ? *opt.preset : opt.config->stem().string();
  const fs::path out = opt.out ? *opt.out : default_out_dir(name, cfg.run_seed);
  fs::create_directories(out);

  const ResolvedData data = resolve_data(cfg.dataset);
  write_config(cfg, out / "config.json");

  CsvLogWriter writer(out / "runlog.csv", out / "validation.csv");
  const TrainObserver observer = writer.observer();
  const RunLog log = train(cfg, data.train, data.validation ? &*data.validation : nullptr, &observer);

  const ModelSpec spec = resolve_model_spec(cfg, data.train.dim, data.train.classes);
  if (log.last_params) save_checkpoint(out / "params.json", spec, *log.last_params);
  if (log.best_params) save_checkpoint(out / "best_params.json", spec, *log.best_params);

  json summary;
  summary["run"] = summary_to_json(log.summary);
  summary["metadata"] = {{"created_utc", utc_now()}, {"name", name}};
  write_json(summary, out / "summary.json");

  const auto& s = log.summary;
  if (s.abort_step) {
    std::cerr << fmt::format("fblab: run aborted at step {}: {}\n", *s.abort_step, s.abort_cause);
    return kRunAborted;
  }
  std::cout << fmt::format("{}: {} steps, final val acc {}, train loss {:.6g} -> {}\n", name,
                           s.steps_completed,
                           s.final_val_acc ? fmt::format("{:.4f}", *s.final_val_acc) : "n/a",
                           s.final_train_loss, out.string());
  return kOk;
}

struct ExpandOptions {
  fs::path in;
  fs::path out;
  std::size_t copies = 1;
  std::string kind = "gaussian_jitter";
  double magnitude = 0.0;
  std::uint64_t seed = 0;
  std::optional<std::size_t> classes;
  std::size_t grid_width = 0;
};

int expand_command(const ExpandOptions& opt) {
  const Dataset ds = load_csv(opt.in, opt.classes);
  AugmentationSpec aug;
  aug.kind = augmentation_kind_from_string(opt.kind);
  aug.magnitude = opt.magnitude;
  aug.seed = opt.seed;
  aug.grid_width = opt.grid_width;
  const Dataset big = expand_fixed(ds, opt.copies, aug);
  write_csv(big, opt.out);
  std::cout << fmt::format("{} -> {} examples written to {}\n", ds.size(), big.size(),
                           opt.out.string());
  return kOk;
}

int list_presets() {
  for (const auto& name : preset_names()) std::cout << name << '\n';
  return kOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"fblab: full-batch training laboratory"};
  app.require_subcommand(1);

  TrainOptions train_opt;
  auto* train_cmd = app.add_subcommand("train", "Train one configuration and write its artifacts");
  auto* config_opt = train_cmd->add_option("--config", train_opt.config, "JSON config file")
                         ->check(CLI::ExistingFile);
  auto* preset_opt = train_cmd->add_option("--preset", train_opt.preset, "Named preset");
  config_opt->excludes(preset_opt);
  preset_opt->excludes(config_opt);
  train_cmd->add_option("--seed", train_opt.seed, "Override run_seed");
  train_cmd->add_option("--out", train_opt.out,
                        "Output directory (default $FBLAB_OUT/<name>-seed<S>)");

  ExpandOptions expand_opt;
  auto* expand_cmd = app.add_subcommand("expand", "Fixed N-fold dataset expansion of a CSV");
  expand_cmd->add_option("--in", expand_opt.in, "Input CSV")->required()->check(CLI::ExistingFile);
  expand_cmd->add_option("--out", expand_opt.out, "Output CSV")->required();
  expand_cmd->add_option("--copies", expand_opt.copies, "Total copies including the original")
      ->required();
  expand_cmd->add_option("--kind", expand_opt.kind, "gaussian_jitter | pixel_shift_flip")
      ->capture_default_str();
  expand_cmd->add_option("--magnitude", expand_opt.magnitude, "Jitter std or max shift")
      ->capture_default_str();
  expand_cmd->add_option("--seed", expand_opt.seed, "Augmentation seed")->capture_default_str();
  expand_cmd->add_option("--classes", expand_opt.classes, "Declared class count");
  expand_cmd->add_option("--grid-width", expand_opt.grid_width,
                         "Feature grid width for pixel_shift_flip (0 = square)");

  ProbeOptions probe_opt;
  auto* probe_cmd = app.add_subcommand("probe", "Diagnostics on a saved checkpoint");
  probe_cmd->add_option("--checkpoint", probe_opt.checkpoint, "Checkpoint JSON sidecar")
      ->required()
      ->check(CLI::ExistingFile);
  probe_cmd->add_option("--config", probe_opt.config,
                        "Run config (default: config.json next to the checkpoint)");
  probe_cmd->add_option("--out", probe_opt.out, "Output directory (default: checkpoint's)");
  probe_cmd->add_option("--split", probe_opt.split, "train | validation")
      ->check(CLI::IsMember({"train", "validation"}))
      ->capture_default_str();
  probe_cmd->add_flag("--landscape", probe_opt.landscape, "1-D filter-normalized loss slice");
  probe_cmd->add_flag("--diversity", probe_opt.diversity, "Gradient diversity");
  probe_cmd->add_flag("--noise", probe_opt.noise, "Accumulation noise and reproducibility");
  probe_cmd->add_option("--direction-seed", probe_opt.direction_seed)->capture_default_str();
  probe_cmd->add_option("--t-grid", probe_opt.t_grid, "Comma separated offsets; must contain 0")
      ->delimiter(',');
  probe_cmd->add_option("--repeats", probe_opt.repeats, "Repeated evaluations for --noise")
      ->check(CLI::Range(2, 1000))
      ->capture_default_str();

  SummarizeOptions sum_opt;
  auto* sum_cmd = app.add_subcommand("summarize", "Mean and sample std across run directories");
  sum_cmd->add_option("runs", sum_opt.runs, "Run directories")->required();
  sum_cmd->add_option("--out", sum_opt.out, "Directory for summary.json")->capture_default_str();

  auto* presets_cmd = app.add_subcommand("presets", "List preset names");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    if (*train_cmd) {
      if (!train_opt.config && !train_opt.preset) {
        std::cerr << "fblab train: one of --config or --preset is required\n";
        return kUsageError;
      }
      return train_command(train_opt);
    }
    if (*expand_cmd) return expand_command(expand_opt);
    if (*probe_cmd) return probe_command(probe_opt);
    if (*sum_cmd) return summarize_command(sum_opt);
    if (*presets_cmd) return list_presets();
  } catch (const ConfigValidationError& e) {
    std::cerr << "fblab: invalid config\n";
    for (const auto& err : e.errors()) std::cerr << "  " << err << '\n';
    return kUsageError;
  } catch (const ConfigError& e) {
    std::cerr << "fblab: " << e.what() << '\n';
    return kUsageError;
  } catch (const UsageError& e) {
    std::cerr << "fblab: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "fblab: " << e.what() << '\n';
    return kRuntimeFailure;
  }
  return kUsageError;
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace fblab::cli
