// SPDX-License-Identifier: Apache-2.0
#include "fblab/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include <fmt/format.h>
#include <fmt/os.h>

#include "fblab/error.hpp"
#include "fblab/random.hpp"

namespace fblab {

void Dataset::validate() const {
  if (labels.empty()) throw ConfigError("dataset is empty");
  if (dim == 0) throw ConfigError("dataset has zero feature dimension");
  if (features.size() != labels.size() * dim) {
    throw ConfigError("feature matrix has " + std::to_string(features.size()) + " values, expected " +
                      std::to_string(labels.size() * dim));
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= classes) {
      throw ConfigError("label " + std::to_string(labels[i]) + " of example " + std::to_string(i) +
                        " outside [0, " + std::to_string(classes) + ")");
    }
  }
}

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return idx;
}

std::string to_string(SyntheticKind kind) {
  switch (kind) {
    case SyntheticKind::spirals: return "spirals";
    case SyntheticKind::gaussians: return "gaussians";
    case SyntheticKind::rings: return "rings";
  }
  return "?";
}

SyntheticKind synthetic_kind_from_string(const std::string& name) {
  if (name == "spirals") return SyntheticKind::spirals;
  if (name == "gaussians") return SyntheticKind::gaussians;
  if (name == "rings") return SyntheticKind::rings;
  throw ConfigError("unknown synthetic dataset kind '" + name + "'");
}

Dataset make_synthetic(SyntheticKind kind, std::size_t n, std::size_t dim, std::size_t classes,
                       std::uint64_t seed, const SyntheticOptions& options) {
  if (classes < 2) throw ConfigError("synthetic data needs at least 2 classes");
  if (n < classes) throw ConfigError("synthetic data needs n >= classes");
  if (dim < 1) throw ConfigError("synthetic data needs dim >= 1");
  if (kind != SyntheticKind::gaussians && dim < 2) {
    throw ConfigError(to_string(kind) + " needs dim >= 2");
  }
  if (options.noise < 0.0 || options.cluster_std < 0.0 || options.center_scale < 0.0) {
    throw ConfigError("synthetic noise parameters must be nonnegative");
  }

  Rng rng = make_rng(derive_seed(seed, to_string(kind)));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // Balanced labels; the seed picks which classes absorb the remainder.
  std::vector<std::size_t> class_order = all_indices(classes);
  std::shuffle(class_order.begin(), class_order.end(), rng);
  std::vector<int> labels;
  labels.reserve(n);
  for (std::size_t k = 0; k < classes; ++k) {
    const std::size_t c = class_order[k];
    const std::size_t count = n / classes + (k < n % classes ? 1 : 0);
    labels.insert(labels.end(), count, static_cast<int>(c));
  }
  std::shuffle(labels.begin(), labels.end(), rng);

  std::vector<double> centers;
  if (kind == SyntheticKind::gaussians) {
    centers.resize(classes * dim);
    for (double& v : centers) v = options.center_scale * normal(rng);
  }

  Dataset ds;
  ds.dim = dim;
  ds.classes = classes;
  ds.labels = std::move(labels);
  ds.features.assign(n * dim, 0.0);
  ds.provenance = Provenance::synthetic;
  ds.source_seed = seed;

  constexpr double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = static_cast<std::size_t>(ds.labels[i]);
    double* x = ds.features.data() + i * dim;
    switch (kind) {
      case SyntheticKind::spirals: {
        const double t = unit(rng);
        const double angle = two_pi * (options.turns * t + static_cast<double>(c) / classes);
        x[0] = t * std::cos(angle);
        x[1] = t * std::sin(angle);
        break;
      }
      case SyntheticKind::rings: {
        const double angle = two_pi * unit(rng);
        const double radius = static_cast<double>(c + 1) / static_cast<double>(classes);
        x[0] = radius * std::cos(angle);
        x[1] = radius * std::sin(angle);
        break;
      }
      case SyntheticKind::gaussians:
        for (std::size_t d = 0; d < dim; ++d) {
          x[d] = centers[c * dim + d] + options.cluster_std * normal(rng);
        }
        break;
    }
    if (kind != SyntheticKind::gaussians) {
      for (std::size_t d = 0; d < dim; ++d) x[d] += options.noise * normal(rng);
    }
  }
  return ds;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path, std::optional<std::size_t> declared_classes) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open " + path.string());
  auto fail = [&](std::size_t line_no, const std::string& what) {
    throw LoadError(path.string() + ":" + std::to_string(line_no) + ": " + what);
  };

  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw LoadError(path.string() + ": empty file");
  ++line_no;
  const auto header = split_commas(trim(line));
  if (header.size() < 2) fail(line_no, "header needs at least one feature column and a label column");
  const std::size_t dim = header.size() - 1;

  Dataset ds;
  ds.dim = dim;
  ds.provenance = Provenance::file;
  int max_label = -1;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view row = trim(line);
    if (row.empty()) continue;
    const auto cells = split_commas(row);
    if (cells.size() != header.size()) {
      fail(line_no, "expected " + std::to_string(header.size()) + " columns, found " +
                        std::to_string(cells.size()));
    }
    for (std::size_t d = 0; d < dim; ++d) {
      const std::string_view cell = trim(cells[d]);
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc{} || ptr != cell.data() + cell.size() || cell.empty()) {
        fail(line_no, "cannot parse feature '" + std::string(cell) + "'");
      }
      if (!std::isfinite(v)) fail(line_no, "non-finite feature");
      ds.features.push_back(v);
    }
    const std::string_view cell = trim(cells[dim]);
    long label = 0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), label);
    if (ec != std::errc{} || ptr != cell.data() + cell.size() || cell.empty()) {
      fail(line_no, "cannot parse integer label '" + std::string(cell) + "'");
    }
    if (label < 0) fail(line_no, "negative label");
    if (declared_classes && static_cast<std::size_t>(label) >= *declared_classes) {
      fail(line_no, "label " + std::to_string(label) + " out of range for " +
                        std::to_string(*declared_classes) + " classes");
    }
    ds.labels.push_back(static_cast<int>(label));
    max_label = std::max(max_label, static_cast<int>(label));
  }
  if (ds.labels.empty()) throw LoadError(path.string() + ": no data rows");
  ds.classes = declared_classes ? *declared_classes : static_cast<std::size_t>(max_label + 1);
  return ds;
}

void write_csv(const Dataset& ds, const std::filesystem::path& path) {
  ds.validate();
  auto out = fmt::output_file(path.string());
  for (std::size_t d = 0; d < ds.dim; ++d) out.print("f{},", d);
  out.print("label\n");
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (double v : ds.row(i)) out.print("{:.17g},", v);
    out.print("{}\n", ds.labels[i]);
  }
}

// ---------------------------------------------------------------------------
// Fixed expansion

std::string to_string(AugmentationKind kind) {
  return kind == AugmentationKind::gaussian_jitter ? "gaussian_jitter" : "pixel_shift_flip";
}

AugmentationKind augmentation_kind_from_string(const std::string& name) {
  if (name == "gaussian_jitter") return AugmentationKind::gaussian_jitter;
  if (name == "pixel_shift_flip") return AugmentationKind::pixel_shift_flip;
  throw ConfigError("unknown augmentation kind '" + name + "'");
}

namespace {

std::size_t grid_width_for(const AugmentationSpec& aug, std::size_t dim) {
  std::size_t w = aug.grid_width;
  if (w == 0) {
    w = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(dim))));
    if (w * w != dim) {
      throw ConfigError("pixel_shift_flip needs grid_width for non-square dimension " +
                        std::to_string(dim));
    }
  }
  if (dim % w != 0) throw ConfigError("grid_width does not divide the feature dimension");
  return w;
}

}  // namespace

Dataset expand_fixed(const Dataset& ds, std::size_t copies, const AugmentationSpec& aug) {
  ds.validate();
  if (copies < 1) throw ConfigError("expansion factor must be >= 1");
  if (!(aug.magnitude >= 0.0) || !std::isfinite(aug.magnitude)) {
    throw ConfigError("augmentation magnitude must be finite and nonnegative");
  }
  const std::size_t n = ds.size();
  const std::size_t dim = ds.dim;
  std::size_t width = 0;
  if (aug.kind == AugmentationKind::pixel_shift_flip) width = grid_width_for(aug, dim);

  Dataset out;
  out.dim = dim;
  out.classes = ds.classes;
  out.provenance = Provenance::expanded;
  out.source_seed = aug.seed;
  out.features.reserve(copies * n * dim);
  out.labels.reserve(copies * n);
  for (std::size_t i = 0; i < copies; ++i) {
    out.features.insert(out.features.end(), ds.features.begin(), ds.features.end());
    out.labels.insert(out.labels.end(), ds.labels.begin(), ds.labels.end());
  }
  if (aug.magnitude == 0.0) return out;

  std::normal_distribution<double> normal(0.0, 1.0);
  const auto max_shift = static_cast<long>(std::floor(aug.magnitude));
  std::vector<double> scratch(dim);
  for (std::size_t i = 1; i < copies; ++i) {
    Rng rng = make_rng(derive_seed(aug.seed, i));
    for (std::size_t j = 0; j < n; ++j) {
      double* x = out.features.data() + (i * n + j) * dim;
      if (aug.kind == AugmentationKind::gaussian_jitter) {
        for (std::size_t d = 0; d < dim; ++d) x[d] += aug.magnitude * normal(rng);
        continue;
      }
      std::uniform_int_distribution<long> shift(-max_shift, max_shift);
      const long dy = shift(rng);
      const long dx = shift(rng);
      const bool flip = std::bernoulli_distribution(0.5)(rng);
      const auto w = static_cast<long>(width);
      const auto h = static_cast<long>(dim / width);
      const double* src = ds.features.data() + j * dim;
      for (long r = 0; r < h; ++r) {
        for (long c = 0; c < w; ++c) {
          const long sr = r - dy;
          long sc = c - dx;
          if (flip) sc = w - 1 - sc;
          const bool inside = sr >= 0 && sr < h && sc >= 0 && sc < w;
          scratch[static_cast<std::size_t>(r * w + c)] =
              inside ? src[static_cast<std::size_t>(sr * w + sc)] : 0.0;
        }
      }
      std::copy(scratch.begin(), scratch.end(), x);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Batch plans

std::string to_string(BatchMode mode) {
  switch (mode) {
    case BatchMode::full_batch: return "full_batch";
    case BatchMode::without_replacement: return "without_replacement";
    case BatchMode::with_replacement: return "with_replacement";
    case BatchMode::fixed_order: return "fixed_order";
  }
  return "?";
}

BatchMode batch_mode_from_string(const std::string& name) {
  if (name == "full_batch") return BatchMode::full_batch;
  if (name == "without_replacement") return BatchMode::without_replacement;
  if (name == "with_replacement") return BatchMode::with_replacement;
  if (name == "fixed_order") return BatchMode::fixed_order;
  throw ConfigError("unknown batch mode '" + name + "'");
}

std::size_t blocks_per_epoch(const BatchPlan& plan, std::size_t n) {
  if (plan.mode == BatchMode::full_batch) return 1;
  if (plan.batch_size == 0) throw ConfigError("batch_size must be >= 1");
  return (n + plan.batch_size - 1) / plan.batch_size;
}

IndexBlocks contiguous_blocks(std::span<const std::size_t> indices, std::size_t block_size) {
  if (block_size == 0) throw ConfigError("block size must be >= 1");
  IndexBlocks out;
  for (std::size_t start = 0; start < indices.size(); start += block_size) {
    const std::size_t len = std::min(block_size, indices.size() - start);
    out.emplace_back(indices.begin() + static_cast<std::ptrdiff_t>(start),
                     indices.begin() + static_cast<std::ptrdiff_t>(start + len));
  }
  return out;
}

IndexBlocks plan_epoch(const BatchPlan& plan, std::size_t n, std::uint64_t epoch) {
  if (n == 0) throw ConfigError("cannot plan batches over an empty dataset");
  if (plan.mode == BatchMode::full_batch) return {all_indices(n)};
  if (plan.batch_size == 0) throw ConfigError("batch_size must be >= 1");
  if (plan.batch_size > n && plan.mode != BatchMode::with_replacement) {
    throw ConfigError("batch_size " + std::to_string(plan.batch_size) + " exceeds dataset size " +
                      std::to_string(n));
  }

  switch (plan.mode) {
    case BatchMode::without_replacement:
    case BatchMode::fixed_order: {
      const std::uint64_t stream = plan.mode == BatchMode::fixed_order ? 0 : epoch;
      Rng rng = make_rng(derive_seed(plan.seed, stream));
      std::vector<std::size_t> perm = all_indices(n);
      std::shuffle(perm.begin(), perm.end(), rng);
      return contiguous_blocks(perm, plan.batch_size);
    }
    case BatchMode::with_replacement: {
      Rng rng = make_rng(derive_seed(plan.seed, epoch));
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      IndexBlocks out(blocks_per_epoch(plan, n));
      for (auto& block : out) {
        block.resize(plan.batch_size);
        for (auto& i : block) i = pick(rng);
      }
      return out;
    }
    case BatchMode::full_batch: break;
  }
  return {all_indices(n)};
}

}  // namespace fblab
