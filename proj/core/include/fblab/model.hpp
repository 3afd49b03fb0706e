// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fblab/dataset.hpp"

namespace fblab {

enum class Activation { relu, tanh };
enum class Normalization { none, per_example_norm };

std::string to_string(Activation a);
std::string to_string(Normalization n);
Activation activation_from_string(const std::string& name);
Normalization normalization_from_string(const std::string& name);

/// Multi-layer perceptron description. Weights use fan-in scaled uniform
/// initialization U(-1/sqrt(fan_in), 1/sqrt(fan_in)), biases likewise.
struct ModelSpec {
  std::vector<std::size_t> layer_widths;  // input, hidden..., classes
  Activation activation = Activation::relu;
  Normalization normalization = Normalization::none;
  std::uint64_t init_seed = 0;

  void validate() const;
  std::size_t input_dim() const { return layer_widths.front(); }
  std::size_t classes() const { return layer_widths.back(); }
  std::size_t layer_count() const { return layer_widths.size() - 1; }

  bool operator==(const ModelSpec&) const = default;
};

enum class SegmentKind { weight, bias };

/// A contiguous run of the flat parameter vector. Weight segments are
/// rows x cols (row-major, rows = fan-out); bias segments are rows x 1.
struct Segment {
  std::size_t layer = 0;
  SegmentKind kind = SegmentKind::weight;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t offset = 0;

  std::size_t size() const { return rows * cols; }
  bool operator==(const Segment&) const = default;
};

struct ParamVector {
  std::vector<double> values;
  std::vector<Segment> segments;

  std::size_t size() const { return values.size(); }
  std::span<const double> span() const { return values; }
  std::span<double> span() { return values; }
  std::span<const double> segment(const Segment& s) const {
    return std::span<const double>(values).subspan(s.offset, s.size());
  }

  /// Throws ShapeError when segments do not partition `values` in order.
  void validate() const;

  bool operator==(const ParamVector&) const = default;
};

/// Layout of an MLP: per layer a weight segment then a bias segment.
std::vector<Segment> param_layout(const ModelSpec& spec);

/// A single segment covering `n` scalars, for models without layer structure.
std::vector<Segment> flat_layout(std::size_t n);

struct LossConfig {
  double label_smoothing = 0.0;  // in [0, 0.5)

  void validate() const;
  bool operator==(const LossConfig&) const = default;
};

struct GradReport {
  std::vector<double> grad;
  double loss = 0.0;
  std::size_t count = 0;
};

using Batch = std::span<const std::size_t>;

/// A per-example loss over a fixed example set, addressed by index.
/// Every reported loss and gradient is the mean over the requested batch.
/// Implementations are stateless and safe to call concurrently.
class Objective {
 public:
  virtual ~Objective() = default;

  virtual std::size_t param_count() const = 0;
  virtual std::size_t example_count() const = 0;

  virtual double loss(std::span<const double> params, Batch batch) const = 0;
  virtual GradReport grad(std::span<const double> params, Batch batch) const = 0;

  virtual std::vector<GradReport> per_example_grads(std::span<const double> params,
                                                    Batch batch) const;

  /// Fraction of correctly classified examples, if the objective classifies.
  virtual std::optional<double> accuracy(std::span<const double> params, Batch batch) const;

  /// Parameter segmentation used by filter-normalized probes.
  virtual std::vector<Segment> layout() const { return flat_layout(param_count()); }
};

/// Fully connected network with softmax cross-entropy.
class Mlp {
 public:
  explicit Mlp(ModelSpec spec);

  const ModelSpec& spec() const { return spec_; }
  std::size_t param_count() const { return param_count_; }
  const std::vector<Segment>& layout() const { return layout_; }

  ParamVector init() const;

  std::vector<double> logits(std::span<const double> params, std::span<const double> x) const;

  /// Loss of one example; when `grad_accum` is non-empty, adds weight * dLoss/dparams to it.
  double example_loss(std::span<const double> params, std::span<const double> x, int label,
                      const LossConfig& cfg, std::span<double> grad_accum = {},
                      double weight = 1.0) const;

 private:
  struct Workspace;
  ModelSpec spec_;
  std::vector<Segment> layout_;
  std::size_t param_count_ = 0;
};

class MlpObjective final : public Objective {
 public:
  MlpObjective(Mlp model, std::shared_ptr<const Dataset> data, LossConfig cfg = {});

  std::size_t param_count() const override { return model_.param_count(); }
  std::size_t example_count() const override { return data_->size(); }
  double loss(std::span<const double> params, Batch batch) const override;
  GradReport grad(std::span<const double> params, Batch batch) const override;
  std::vector<GradReport> per_example_grads(std::span<const double> params,
                                            Batch batch) const override;
  std::optional<double> accuracy(std::span<const double> params, Batch batch) const override;
  std::vector<Segment> layout() const override { return model_.layout(); }

  const Mlp& model() const { return model_; }
  const Dataset& data() const { return *data_; }

 private:
  void check(std::span<const double> params, Batch batch) const;

  Mlp model_;
  std::shared_ptr<const Dataset> data_;
  LossConfig cfg_;
};

/// Linear least squares, example i contributing 0.5 * (a_i . theta - b_i)^2.
/// Over a batch B the mean loss has gradient A_B^T (A_B theta - b_B) / |B|
/// and constant Hessian A_B^T A_B / |B|.
class QuadraticObjective final : public Objective {
 public:
  QuadraticObjective(std::size_t rows, std::size_t cols, std::vector<double> a,
                     std::vector<double> b);

  std::size_t param_count() const override { return cols_; }
  std::size_t example_count() const override { return rows_; }
  double loss(std::span<const double> params, Batch batch) const override;
  GradReport grad(std::span<const double> params, Batch batch) const override;

  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(a_).subspan(i * cols_, cols_);
  }
  double target(std::size_t i) const { return b_[i]; }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> a_;
  std::vector<double> b_;
};

// Free-function entry points over an MLP and a dataset.
ParamVector init_model(const ModelSpec& spec);
double forward_loss(const ModelSpec& spec, std::span<const double> params, const Dataset& ds,
                    Batch batch, const LossConfig& cfg = {});
GradReport grad_mean(const ModelSpec& spec, std::span<const double> params, const Dataset& ds,
                     Batch batch, const LossConfig& cfg = {});
std::vector<GradReport> grad_per_example(const ModelSpec& spec, std::span<const double> params,
                                         const Dataset& ds, Batch batch,
                                         const LossConfig& cfg = {});

/// Dense symmetric Hessian from central differences of the gradient.
struct HessianMatrix {
  std::size_t n = 0;
  std::vector<double> values;  // row-major, symmetrized
  double max_asymmetry = 0.0;  // max |H - H^T| before symmetrization

  double at(std::size_t i, std::size_t j) const { return values[i * n + j]; }
  std::vector<double> times(std::span<const double> v) const;
};

inline constexpr std::size_t kHessianOracleMaxParams = 512;

/// Reference Hessian for tiny models: row i is
/// (g(theta + h_i e_i) - g(theta - h_i e_i)) / (2 h_i) with h_i = step * (1 + |theta_i|).
/// Refuses (UsageError) above kHessianOracleMaxParams parameters.
HessianMatrix hessian_oracle(const Objective& obj, std::span<const double> params, Batch batch,
                             double step = 1e-5);

}  // namespace fblab
