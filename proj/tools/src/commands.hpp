// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace fblab::cli {

struct ProbeOptions {
  std::filesystem::path checkpoint;
  std::optional<std::filesystem::path> config;  // defaults to config.json beside the checkpoint
  std::optional<std::filesystem::path> out;     // defaults to the checkpoint directory
  std::string split = "train";
  bool landscape = false;
  bool diversity = false;
  bool noise = false;
  std::uint64_t direction_seed = 0;
  std::vector<double> t_grid;  // empty selects the default grid
  std::size_t repeats = 3;
};

int probe_command(const ProbeOptions& opt);

struct SummarizeOptions {
  std::vector<std::filesystem::path> runs;
  std::filesystem::path out = ".";
};

int summarize_command(const SummarizeOptions& opt);

}  // namespace fblab::cli
