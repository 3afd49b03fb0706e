// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fblab/config.hpp"
#include "fblab/model.hpp"

namespace fblab {

struct StepRecord {
  std::uint64_t step = 0;
  double lr = 0.0;
  double train_loss = 0.0;  // mean loss of the examples the step consumed
  double full_loss = 0.0;   // train_loss + weight decay term + scaled penalty
  double grad_norm_pre = 0.0;
  double grad_norm_post = 0.0;
  bool clipped = false;
  double penalty_value = 0.0;
};

struct ValidationRecord {
  std::uint64_t step = 0;
  double val_loss = 0.0;
  double val_acc = 0.0;
};

struct RunSummary {
  std::uint64_t steps_completed = 0;
  std::optional<double> final_val_acc;
  std::optional<double> final_val_loss;
  std::optional<double> best_val_acc;
  std::optional<std::uint64_t> best_step;
  std::optional<double> final_train_acc;
  double final_train_loss = 0.0;
  std::size_t clipped_steps = 0;
  std::optional<std::uint64_t> abort_step;
  std::string abort_cause;
};

struct RunLog {
  std::vector<StepRecord> steps;
  std::vector<ValidationRecord> validation;
  RunSummary summary;
  std::optional<ParamVector> last_params;
  std::optional<ParamVector> best_params;
};

/// Streaming hooks; called as records are produced.
struct TrainObserver {
  std::function<void(const StepRecord&)> on_step;
  std::function<void(const ValidationRecord&)> on_validation;
};

/// Runs cfg.schedule.total_steps updates from `init`. Each step: plan blocks,
/// gradient (full accumulation or one block), + penalty gradient, + noise,
/// clip, momentum update at lr_at(step). A non-finite loss or parameter ends
/// the run with summary.abort_step set instead of throwing.
RunLog train(const TrainConfig& cfg, const Objective& train_obj, const Objective* val_obj,
             ParamVector init, const TrainObserver* observer = nullptr);

/// Convenience overload: builds the MLP named by cfg.model over `train_ds`.
RunLog train(const TrainConfig& cfg, const Dataset& train_ds, const Dataset* val_ds,
             const TrainObserver* observer = nullptr);

}  // namespace fblab
