// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdio>
#include <filesystem>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "fblab/model.hpp"
#include "fblab/train.hpp"

namespace fblab {

inline constexpr const char* kRunlogHeader =
    "step,lr,train_loss,full_loss,grad_norm_pre,grad_norm_post,clipped,penalty_value";
inline constexpr const char* kValidationHeader = "step,val_loss,val_acc";

std::string format_step_row(const StepRecord& r);
std::string format_validation_row(const ValidationRecord& r);

/// Appends rows as they arrive and flushes after each one, so an aborted
/// run still leaves complete lines on disk.
class CsvLogWriter {
 public:
  CsvLogWriter(const std::filesystem::path& runlog, const std::filesystem::path& validation);

  void step(const StepRecord& r);
  void validation(const ValidationRecord& r);
  TrainObserver observer();

 private:
  struct FileCloser {
    void operator()(std::FILE* f) const { std::fclose(f); }
  };
  std::unique_ptr<std::FILE, FileCloser> runlog_;
  std::unique_ptr<std::FILE, FileCloser> validation_;
};

void write_runlog_csv(const RunLog& log, const std::filesystem::path& path);
void write_validation_csv(const RunLog& log, const std::filesystem::path& path);

nlohmann::json summary_to_json(const RunSummary& s);

// Checkpoints: <stem>.bin holds the parameters as little-endian fp64; the
// <stem>.json sidecar carries the format version, ModelSpec and layout.
inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  ModelSpec spec;
  ParamVector params;
};

void save_checkpoint(const std::filesystem::path& json_path, const ModelSpec& spec,
                     const ParamVector& params);
Checkpoint load_checkpoint(const std::filesystem::path& json_path);

nlohmann::json model_spec_to_json(const ModelSpec& spec);
ModelSpec model_spec_from_json(const nlohmann::json& j);

}  // namespace fblab
