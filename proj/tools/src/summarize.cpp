// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>

#include <fmt/core.h>

#include "commands.hpp"
#include "fblab/error.hpp"
#include "fblab_cli/cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace fblab::cli {

namespace {

// Both conventions are kept: last-iterate and best-validation accuracy.
const std::vector<std::string>& metric_names() {
  static const std::vector<std::string> names{
      "final_val_acc",   "best_val_acc",     "final_val_loss", "final_train_acc",
      "final_train_loss", "steps_completed", "clipped_steps"};
  return names;
}

json load_run_summary(const fs::path& dir) {
  const fs::path path = dir / "summary.json";
  std::ifstream f(path);
  if (!f) throw LoadError("cannot open " + path.string());
  try {
    json j = json::parse(f);
    if (!j.contains("run") || !j["run"].is_object()) {
      throw LoadError(path.string() + ": missing \"run\" object");
    }
    return j["run"];
  } catch (const json::exception& e) {
    throw LoadError(path.string() + ": " + e.what());
  }
}

}  // namespace

json summarize_runs(std::vector<fs::path> runs) {
  if (runs.empty()) throw UsageError("summarize: no run directories given");
  std::sort(runs.begin(), runs.end());

  std::map<std::string, std::vector<double>> values;
  std::size_t aborted = 0;
  json names = json::array();
  for (const auto& dir : runs) {
    const json run = load_run_summary(dir);
    names.push_back(dir.string());
    if (run.contains("abort_step") && !run["abort_step"].is_null()) ++aborted;
    for (const auto& m : metric_names()) {
      if (run.contains(m) && run[m].is_number()) values[m].push_back(run[m].get<double>());
    }
  }

  json metrics = json::object();
  for (const auto& m : metric_names()) {
    auto it = values.find(m);
    if (it == values.end()) continue;
    std::vector<double> v = it->second;
    std::sort(v.begin(), v.end());  // fixed summation order
    const double n = static_cast<double>(v.size());
    double sum = 0.0;
    for (double x : v) sum += x;
    const double mean = sum / n;
    json entry{{"n", v.size()}, {"mean", mean}, {"std", nullptr}};
    if (v.size() > 1) {
      double ss = 0.0;
      for (double x : v) ss += (x - mean) * (x - mean);
      entry["std"] = std::sqrt(ss / (n - 1.0));
    }
    metrics[m] = entry;
  }
  return json{{"runs", names}, {"count", runs.size()}, {"aborted", aborted}, {"metrics", metrics}};
}

int summarize_command(const SummarizeOptions& opt) {
  const json s = summarize_runs(opt.runs);
  fs::create_directories(opt.out);
  const fs::path path = opt.out / "summary.json";
  std::ofstream f(path);
  f << s.dump(2) << '\n';
  if (!f) throw Error("cannot write " + path.string());

  std::cout << fmt::format("{} runs ({} aborted)\n", s["count"].get<std::size_t>(),
                           s["aborted"].get<std::size_t>());
  for (const auto& [name, m] : s["metrics"].items()) {
    const std::string sd = m["std"].is_null() ? "n/a" : fmt::format("{:.4g}", m["std"].get<double>());
    std::cout << fmt::format("  {:<18} {:.6g} +- {}\n", name, m["mean"].get<double>(), sd);
  }
  return kOk;
}

}  // namespace fblab::cli
