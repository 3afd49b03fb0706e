// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fblab {

enum class Provenance { synthetic, file, expanded };

/// Labelled examples stored row-major. Immutable once built.
struct Dataset {
  std::size_t dim = 0;
  std::size_t classes = 0;
  std::vector<double> features;  // size() * dim values
  std::vector<int> labels;
  Provenance provenance = Provenance::synthetic;
  std::uint64_t source_seed = 0;

  std::size_t size() const noexcept { return labels.size(); }
  std::span<const double> row(std::size_t i) const {
    return {features.data() + i * dim, dim};
  }

  /// Throws ConfigError when the layout or any label is inconsistent.
  void validate() const;

  bool operator==(const Dataset&) const = default;
};

/// Indices 0..n-1, the "whole dataset" batch.
std::vector<std::size_t> all_indices(std::size_t n);

enum class SyntheticKind { spirals, gaussians, rings };

std::string to_string(SyntheticKind kind);
SyntheticKind synthetic_kind_from_string(const std::string& name);

/// Generator knobs beyond the shape parameters.
struct SyntheticOptions {
  double noise = 0.05;        // additive feature noise std (spirals, rings)
  double turns = 1.0;         // spiral arm length in full turns
  double cluster_std = 1.0;   // gaussians: within-class std
  double center_scale = 2.0;  // gaussians: std of the random class centers

  bool operator==(const SyntheticOptions&) const = default;
};

/// Balanced synthetic classification data. Class counts differ by at most
/// one; which classes receive the remainder and the example order are both
/// fixed by `seed`. Features beyond the first two dimensions of spirals and
/// rings are independent noise.
Dataset make_synthetic(SyntheticKind kind, std::size_t n, std::size_t dim, std::size_t classes,
                       std::uint64_t seed, const SyntheticOptions& options = {});

/// Reads `f0,...,f{d-1},label` CSV with a header row. When `declared_classes`
/// is set, labels must lie in [0, declared_classes); otherwise the class count
/// is max(label) + 1.
Dataset load_csv(const std::filesystem::path& path,
                 std::optional<std::size_t> declared_classes = std::nullopt);

void write_csv(const Dataset& ds, const std::filesystem::path& path);

enum class AugmentationKind { gaussian_jitter, pixel_shift_flip };

std::string to_string(AugmentationKind kind);
AugmentationKind augmentation_kind_from_string(const std::string& name);

struct AugmentationSpec {
  AugmentationKind kind = AugmentationKind::gaussian_jitter;
  double magnitude = 0.0;  // jitter std, or max shift in grid cells
  std::uint64_t seed = 0;
  std::size_t grid_width = 0;  // pixel_shift_flip only; 0 infers a square grid

  bool operator==(const AugmentationSpec&) const = default;
};

/// Fixed N-fold enlargement: example i*n + j is the i-th augmentation of
/// example j, with i == 0 the identity. Never resampled afterwards.
Dataset expand_fixed(const Dataset& ds, std::size_t copies, const AugmentationSpec& aug);

enum class BatchMode { full_batch, without_replacement, with_replacement, fixed_order };

std::string to_string(BatchMode mode);
BatchMode batch_mode_from_string(const std::string& name);

struct BatchPlan {
  BatchMode mode = BatchMode::full_batch;
  std::size_t batch_size = 128;
  std::uint64_t seed = 0;

  bool operator==(const BatchPlan&) const = default;
};

using IndexBlocks = std::vector<std::vector<std::size_t>>;

/// Blocks visited in `epoch`. A pure function of (plan, n, epoch), so any
/// epoch can be regenerated without replaying earlier ones.
IndexBlocks plan_epoch(const BatchPlan& plan, std::size_t n, std::uint64_t epoch);

/// Number of blocks plan_epoch yields per epoch.
std::size_t blocks_per_epoch(const BatchPlan& plan, std::size_t n);

/// Splits `indices` in order into chunks of `block_size`; the final chunk
/// may be shorter.
IndexBlocks contiguous_blocks(std::span<const std::size_t> indices, std::size_t block_size);

}  // namespace fblab
