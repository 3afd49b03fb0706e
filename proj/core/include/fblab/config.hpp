// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "fblab/dataset.hpp"
#include "fblab/error.hpp"
#include "fblab/implicit_reg.hpp"
#include "fblab/model.hpp"
#include "fblab/optim.hpp"

namespace fblab {

struct ModelConfig {
  std::vector<std::size_t> hidden_widths{64, 64};
  Activation activation = Activation::relu;
  Normalization normalization = Normalization::none;
  std::optional<std::uint64_t> init_seed;  // derived from run_seed when unset

  bool operator==(const ModelConfig&) const = default;
};

struct SyntheticSource {
  SyntheticKind kind = SyntheticKind::spirals;
  std::size_t n = 1000;
  std::size_t n_val = 1000;
  std::size_t dim = 2;
  std::size_t classes = 2;
  std::uint64_t seed = 0;
  SyntheticOptions options;

  bool operator==(const SyntheticSource&) const = default;
};

struct FileSource {
  std::string train_path;
  std::optional<std::string> val_path;
  std::optional<std::size_t> classes;

  bool operator==(const FileSource&) const = default;
};

struct ExpansionConfig {
  std::size_t copies = 1;
  AugmentationSpec augmentation;

  bool operator==(const ExpansionConfig&) const = default;
};

struct DatasetConfig {
  std::variant<SyntheticSource, FileSource> source = SyntheticSource{};
  std::optional<ExpansionConfig> expand;

  bool operator==(const DatasetConfig&) const = default;
};

/// What one optimizer step consumes: a single block of the batch plan, or a
/// whole epoch of blocks accumulated into the full-dataset gradient.
enum class UpdateUnit { block, epoch };
enum class SnapshotPolicy { last, best_validation, both };

std::string to_string(UpdateUnit u);
std::string to_string(SnapshotPolicy p);

struct TrainConfig {
  ModelConfig model;
  LossConfig loss;
  Schedule schedule;
  std::optional<ClipConfig> clip = ClipConfig{};
  std::optional<RegConfig> reg;
  NoiseConfig noise;
  MomentumConfig optimizer;
  BatchPlan batch_plan;
  std::optional<UpdateUnit> update_unit;  // epoch for full_batch, block otherwise
  std::size_t accumulation_block_size = 128;
  DatasetConfig dataset;
  std::uint64_t eval_every = 100;
  std::uint64_t run_seed = 0;
  SnapshotPolicy snapshot_policy = SnapshotPolicy::both;

  UpdateUnit resolved_update_unit() const;

  /// Seeds actually used by a run; sub-seeds are mixed with run_seed so a
  /// single --seed varies every stochastic choice except the data itself.
  std::uint64_t effective_init_seed() const;
  std::uint64_t effective_plan_seed() const;
  std::uint64_t effective_noise_seed() const;

  /// Throws ConfigError listing every problem found.
  void validate() const;
  std::vector<std::string> validation_errors() const;

  bool operator==(const TrainConfig&) const = default;
};

/// Validation failure carrying one "json/path: message" entry per problem.
class ConfigValidationError : public ConfigError {
 public:
  explicit ConfigValidationError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
};

TrainConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const TrainConfig& cfg);
TrainConfig load_config(const std::filesystem::path& path);
void write_config(const TrainConfig& cfg, const std::filesystem::path& path);

/// Desk-scale analogs of the full-batch study's experiment rows.
const std::vector<std::string>& preset_names();
TrainConfig preset(const std::string& name);

/// Resolves the MLP for a dataset of the given shape.
ModelSpec resolve_model_spec(const TrainConfig& cfg, std::size_t input_dim, std::size_t classes);

struct ResolvedData {
  Dataset train;
  std::optional<Dataset> validation;
};

/// Builds (or loads) the training and held-out data named by the config.
/// Synthetic held-out data uses an independent seed derived from the data seed.
ResolvedData resolve_data(const DatasetConfig& cfg);

}  // namespace fblab
