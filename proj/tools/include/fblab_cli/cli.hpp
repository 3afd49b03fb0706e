// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace fblab::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kRuntimeFailure = 1;
inline constexpr int kUsageError = 2;
inline constexpr int kRunAborted = 3;

/// Entry point shared by the executable and the tests. Never throws.
int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args);  // args[0] is the program name

/// Aggregates the summary.json of each run directory into mean and sample
/// std per metric. Independent of the order of `runs`.
nlohmann::json summarize_runs(std::vector<std::filesystem::path> runs);

}  // namespace fblab::cli
