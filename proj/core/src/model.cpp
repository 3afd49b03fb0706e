// SPDX-License-Identifier: Apache-2.0
#include "fblab/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "fblab/error.hpp"
#include "fblab/random.hpp"
#include "fblab/vec.hpp"

namespace fblab {

namespace {

constexpr double kNormEps = 1e-5;

}  // namespace

std::string to_string(Activation a) { return a == Activation::relu ? "relu" : "tanh"; }

std::string to_string(Normalization n) {
  return n == Normalization::none ? "none" : "per_example_norm";
}

Activation activation_from_string(const std::string& name) {
  if (name == "relu") return Activation::relu;
  if (name == "tanh") return Activation::tanh;
  throw ConfigError("unknown activation '" + name + "'");
}

Normalization normalization_from_string(const std::string& name) {
  if (name == "none") return Normalization::none;
  if (name == "per_example_norm") return Normalization::per_example_norm;
  throw ConfigError("unknown normalization '" + name + "'");
}

void ModelSpec::validate() const {
  if (layer_widths.size() < 2) {
    throw ConfigError("layer_widths needs at least an input and an output width");
  }
  for (std::size_t w : layer_widths) {
    if (w < 1) throw ConfigError("layer widths must be >= 1");
  }
}

void ParamVector::validate() const {
  std::size_t expected = 0;
  for (const auto& s : segments) {
    if (s.offset != expected) throw ShapeError("parameter segments are not contiguous");
    expected += s.size();
  }
  if (expected != values.size()) {
    throw ShapeError("parameter segments cover " + std::to_string(expected) + " of " +
                     std::to_string(values.size()) + " values");
  }
}

std::vector<Segment> param_layout(const ModelSpec& spec) {
  spec.validate();
  std::vector<Segment> out;
  std::size_t offset = 0;
  for (std::size_t l = 0; l < spec.layer_count(); ++l) {
    const std::size_t fan_in = spec.layer_widths[l];
    const std::size_t fan_out = spec.layer_widths[l + 1];
    out.push_back({l, SegmentKind::weight, fan_out, fan_in, offset});
    offset += fan_out * fan_in;
    out.push_back({l, SegmentKind::bias, fan_out, 1, offset});
    offset += fan_out;
  }
  return out;
}

std::vector<Segment> flat_layout(std::size_t n) {
  return {Segment{0, SegmentKind::weight, 1, n, 0}};
}

void LossConfig::validate() const {
  if (!(label_smoothing >= 0.0 && label_smoothing < 0.5)) {
    throw ConfigError("label_smoothing must lie in [0, 0.5)");
  }
}

std::vector<GradReport> Objective::per_example_grads(std::span<const double> params,
                                                     Batch batch) const {
  std::vector<GradReport> out;
  out.reserve(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) out.push_back(grad(params, batch.subspan(i, 1)));
  return out;
}

std::optional<double> Objective::accuracy(std::span<const double>, Batch) const {
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Mlp

struct Mlp::Workspace {
  // Per layer: inputs to the layer (activations), pre-activations, and the
  // normalized pre-activations when per-example normalization is on.
  std::vector<std::vector<double>> act;
  std::vector<std::vector<double>> pre;
  std::vector<std::vector<double>> normed;
  std::vector<double> inv_std;
  std::vector<double> delta;
  std::vector<double> delta_prev;
  std::vector<std::size_t> widths;

  explicit Workspace(const ModelSpec& spec) : widths(spec.layer_widths) {
    const std::size_t layers = spec.layer_count();
    act.resize(layers);
    pre.resize(layers);
    normed.resize(layers);
    inv_std.resize(layers);
    for (std::size_t l = 0; l < layers; ++l) {
      act[l].resize(spec.layer_widths[l]);
      pre[l].resize(spec.layer_widths[l + 1]);
      normed[l].resize(spec.layer_widths[l + 1]);
    }
  }
};

Mlp::Mlp(ModelSpec spec) : spec_(std::move(spec)) {
  layout_ = param_layout(spec_);
  param_count_ = layout_.back().offset + layout_.back().size();
}

ParamVector Mlp::init() const {
  ParamVector p;
  p.segments = layout_;
  p.values.resize(param_count_);
  Rng rng = make_rng(derive_seed(spec_.init_seed, "init"));
  for (const auto& s : layout_) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(spec_.layer_widths[s.layer]));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (std::size_t i = 0; i < s.size(); ++i) p.values[s.offset + i] = dist(rng);
  }
  return p;
}

namespace {

double activate(Activation a, double z) { return a == Activation::relu ? std::max(z, 0.0) : std::tanh(z); }

// Derivative expressed through the pre-activation.
double activate_grad(Activation a, double z) {
  if (a == Activation::relu) return z > 0.0 ? 1.0 : 0.0;
  const double t = std::tanh(z);
  return 1.0 - t * t;
}

}  // namespace

double Mlp::example_loss(std::span<const double> params, std::span<const double> x, int label,
                         const LossConfig& cfg, std::span<double> grad_accum,
                         double weight) const {
  if (params.size() != param_count_) {
    throw ShapeError("expected " + std::to_string(param_count_) + " parameters, got " +
                     std::to_string(params.size()));
  }
  if (x.size() != spec_.input_dim()) {
    throw ShapeError("feature dimension " + std::to_string(x.size()) + " does not match model input " +
                     std::to_string(spec_.input_dim()));
  }
  const std::size_t layers = spec_.layer_count();
  const bool norm = spec_.normalization == Normalization::per_example_norm;
  thread_local std::unique_ptr<Workspace> tls;
  if (!tls || tls->widths != spec_.layer_widths) tls = std::make_unique<Workspace>(spec_);
  Workspace& ws = *tls;
  std::copy(x.begin(), x.end(), ws.act[0].begin());

  for (std::size_t l = 0; l < layers; ++l) {
    const Segment& w = layout_[2 * l];
    const Segment& b = layout_[2 * l + 1];
    const double* wp = params.data() + w.offset;
    const double* bp = params.data() + b.offset;
    const std::vector<double>& in = ws.act[l];
    std::vector<double>& z = ws.pre[l];
    for (std::size_t r = 0; r < w.rows; ++r) {
      double s = bp[r];
      const double* wr = wp + r * w.cols;
      for (std::size_t c = 0; c < w.cols; ++c) s += wr[c] * in[c];
      z[r] = s;
    }
    if (l + 1 == layers) break;
    std::vector<double>& u = ws.normed[l];
    if (norm) {
      double mean = 0.0;
      for (double v : z) mean += v;
      mean /= static_cast<double>(z.size());
      double var = 0.0;
      for (double v : z) var += (v - mean) * (v - mean);
      var /= static_cast<double>(z.size());
      ws.inv_std[l] = 1.0 / std::sqrt(var + kNormEps);
      for (std::size_t r = 0; r < z.size(); ++r) u[r] = (z[r] - mean) * ws.inv_std[l];
    } else {
      u = z;
    }
    std::vector<double>& next = ws.act[l + 1];
    for (std::size_t r = 0; r < u.size(); ++r) next[r] = activate(spec_.activation, u[r]);
  }

  // Softmax cross-entropy with optional label smoothing.
  std::vector<double>& logits = ws.pre[layers - 1];
  const std::size_t k = logits.size();
  if (label < 0 || static_cast<std::size_t>(label) >= k) {
    throw ShapeError("label " + std::to_string(label) + " outside [0, " + std::to_string(k) + ")");
  }
  const double zmax = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double v : logits) sum += std::exp(v - zmax);
  const double log_norm = zmax + std::log(sum);
  const double s = cfg.label_smoothing;
  const double off = s / static_cast<double>(k);
  double loss = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    const double q = (static_cast<int>(c) == label ? 1.0 - s : 0.0) + off;
    if (q != 0.0) loss -= q * (logits[c] - log_norm);
  }
  if (!std::isfinite(loss)) {
    throw NumericError("non-finite loss in forward pass");
  }
  if (grad_accum.empty()) return loss;
  if (grad_accum.size() != param_count_) throw ShapeError("gradient buffer size mismatch");

  std::vector<double>& delta = ws.delta;
  delta.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    const double q = (static_cast<int>(c) == label ? 1.0 - s : 0.0) + off;
    delta[c] = std::exp(logits[c] - log_norm) - q;
  }

  for (std::size_t li = layers; li-- > 0;) {
    const Segment& w = layout_[2 * li];
    const Segment& b = layout_[2 * li + 1];
    const double* wp = params.data() + w.offset;
    double* gw = grad_accum.data() + w.offset;
    double* gb = grad_accum.data() + b.offset;
    const std::vector<double>& in = ws.act[li];
    for (std::size_t r = 0; r < w.rows; ++r) {
      const double d = weight * delta[r];
      gb[r] += d;
      double* gwr = gw + r * w.cols;
      for (std::size_t c = 0; c < w.cols; ++c) gwr[c] += d * in[c];
    }
    if (li == 0) break;

    // Back through the previous layer's activation and normalization.
    std::vector<double>& dprev = ws.delta_prev;
    dprev.assign(w.cols, 0.0);
    for (std::size_t r = 0; r < w.rows; ++r) {
      const double d = delta[r];
      const double* wr = wp + r * w.cols;
      for (std::size_t c = 0; c < w.cols; ++c) dprev[c] += wr[c] * d;
    }
    const std::vector<double>& u = ws.normed[li - 1];
    for (std::size_t c = 0; c < dprev.size(); ++c) dprev[c] *= activate_grad(spec_.activation, u[c]);
    if (norm) {
      const double m = static_cast<double>(u.size());
      double mean_d = 0.0;
      double mean_du = 0.0;
      for (std::size_t c = 0; c < u.size(); ++c) {
        mean_d += dprev[c];
        mean_du += dprev[c] * u[c];
      }
      mean_d /= m;
      mean_du /= m;
      for (std::size_t c = 0; c < u.size(); ++c) {
        dprev[c] = ws.inv_std[li - 1] * (dprev[c] - mean_d - u[c] * mean_du);
      }
    }
    std::swap(delta, dprev);
  }
  return loss;
}

std::vector<double> Mlp::logits(std::span<const double> params, std::span<const double> x) const {
  if (params.size() != param_count_ || x.size() != spec_.input_dim()) {
    throw ShapeError("logits: parameter or feature size mismatch");
  }
  const std::size_t layers = spec_.layer_count();
  std::vector<double> in(x.begin(), x.end());
  for (std::size_t l = 0; l < layers; ++l) {
    const Segment& w = layout_[2 * l];
    const Segment& b = layout_[2 * l + 1];
    std::vector<double> z(w.rows);
    for (std::size_t r = 0; r < w.rows; ++r) {
      double s = params[b.offset + r];
      for (std::size_t c = 0; c < w.cols; ++c) s += params[w.offset + r * w.cols + c] * in[c];
      z[r] = s;
    }
    if (l + 1 == layers) return z;
    if (spec_.normalization == Normalization::per_example_norm) {
      double mean = 0.0;
      for (double v : z) mean += v;
      mean /= static_cast<double>(z.size());
      double var = 0.0;
      for (double v : z) var += (v - mean) * (v - mean);
      var /= static_cast<double>(z.size());
      const double inv = 1.0 / std::sqrt(var + kNormEps);
      for (double& v : z) v = (v - mean) * inv;
    }
    for (double& v : z) v = activate(spec_.activation, v);
    in = std::move(z);
  }
  return in;
}

// ---------------------------------------------------------------------------
// MlpObjective

MlpObjective::MlpObjective(Mlp model, std::shared_ptr<const Dataset> data, LossConfig cfg)
    : model_(std::move(model)), data_(std::move(data)), cfg_(cfg) {
  cfg_.validate();
  if (!data_) throw ConfigError("MlpObjective needs a dataset");
  if (data_->dim != model_.spec().input_dim()) {
    throw ShapeError("dataset dimension " + std::to_string(data_->dim) +
                     " does not match model input " + std::to_string(model_.spec().input_dim()));
  }
  if (data_->classes > model_.spec().classes()) {
    throw ShapeError("dataset has more classes than the model outputs");
  }
}

void MlpObjective::check(std::span<const double> params, Batch batch) const {
  if (batch.empty()) throw ConfigError("empty batch");
  if (params.size() != model_.param_count()) {
    throw ShapeError("expected " + std::to_string(model_.param_count()) + " parameters, got " +
                     std::to_string(params.size()));
  }
  for (std::size_t i : batch) {
    if (i >= data_->size()) throw ShapeError("example index out of range");
  }
}

double MlpObjective::loss(std::span<const double> params, Batch batch) const {
  check(params, batch);
  double sum = 0.0;
  for (std::size_t i : batch) sum += model_.example_loss(params, data_->row(i), data_->labels[i], cfg_);
  return sum / static_cast<double>(batch.size());
}

GradReport MlpObjective::grad(std::span<const double> params, Batch batch) const {
  check(params, batch);
  GradReport r;
  r.grad.assign(model_.param_count(), 0.0);
  r.count = batch.size();
  double sum = 0.0;
  for (std::size_t i : batch) {
    sum += model_.example_loss(params, data_->row(i), data_->labels[i], cfg_, r.grad);
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  vec::scale(inv, r.grad);
  r.loss = sum * inv;
  return r;
}

std::vector<GradReport> MlpObjective::per_example_grads(std::span<const double> params,
                                                        Batch batch) const {
  check(params, batch);
  std::vector<GradReport> out(batch.size());
  for (std::size_t k = 0; k < batch.size(); ++k) {
    const std::size_t i = batch[k];
    out[k].grad.assign(model_.param_count(), 0.0);
    out[k].count = 1;
    out[k].loss = model_.example_loss(params, data_->row(i), data_->labels[i], cfg_, out[k].grad);
  }
  return out;
}

std::optional<double> MlpObjective::accuracy(std::span<const double> params, Batch batch) const {
  check(params, batch);
  std::size_t correct = 0;
  for (std::size_t i : batch) {
    const auto z = model_.logits(params, data_->row(i));
    const auto best = static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
    if (best == data_->labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(batch.size());
}

// ---------------------------------------------------------------------------
// QuadraticObjective

QuadraticObjective::QuadraticObjective(std::size_t rows, std::size_t cols, std::vector<double> a,
                                       std::vector<double> b)
    : rows_(rows), cols_(cols), a_(std::move(a)), b_(std::move(b)) {
  if (rows_ == 0 || cols_ == 0) throw ConfigError("quadratic objective needs a nonempty matrix");
  if (a_.size() != rows_ * cols_ || b_.size() != rows_) {
    throw ShapeError("quadratic objective matrix/target size mismatch");
  }
}

double QuadraticObjective::loss(std::span<const double> params, Batch batch) const {
  if (batch.empty()) throw ConfigError("empty batch");
  if (params.size() != cols_) throw ShapeError("quadratic objective parameter size mismatch");
  double sum = 0.0;
  for (std::size_t i : batch) {
    const double r = vec::dot(row(i), params) - b_[i];
    sum += 0.5 * r * r;
  }
  return sum / static_cast<double>(batch.size());
}

GradReport QuadraticObjective::grad(std::span<const double> params, Batch batch) const {
  if (batch.empty()) throw ConfigError("empty batch");
  if (params.size() != cols_) throw ShapeError("quadratic objective parameter size mismatch");
  GradReport out;
  out.grad.assign(cols_, 0.0);
  out.count = batch.size();
  double sum = 0.0;
  for (std::size_t i : batch) {
    const double r = vec::dot(row(i), params) - b_[i];
    sum += 0.5 * r * r;
    vec::axpy(r, row(i), out.grad);
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  vec::scale(inv, out.grad);
  out.loss = sum * inv;
  return out;
}

// ---------------------------------------------------------------------------
// Free functions

ParamVector init_model(const ModelSpec& spec) { return Mlp(spec).init(); }

namespace {

MlpObjective borrowed_objective(const ModelSpec& spec, const Dataset& ds, const LossConfig& cfg) {
  // Non-owning view; the objective never outlives the caller's dataset.
  return MlpObjective(Mlp(spec), std::shared_ptr<const Dataset>(&ds, [](const Dataset*) {}), cfg);
}

}  // namespace

double forward_loss(const ModelSpec& spec, std::span<const double> params, const Dataset& ds,
                    Batch batch, const LossConfig& cfg) {
  return borrowed_objective(spec, ds, cfg).loss(params, batch);
}

GradReport grad_mean(const ModelSpec& spec, std::span<const double> params, const Dataset& ds,
                     Batch batch, const LossConfig& cfg) {
  return borrowed_objective(spec, ds, cfg).grad(params, batch);
}

std::vector<GradReport> grad_per_example(const ModelSpec& spec, std::span<const double> params,
                                         const Dataset& ds, Batch batch, const LossConfig& cfg) {
  return borrowed_objective(spec, ds, cfg).per_example_grads(params, batch);
}

// ---------------------------------------------------------------------------
// Hessian oracle

std::vector<double> HessianMatrix::times(std::span<const double> v) const {
  if (v.size() != n) throw ShapeError("Hessian-vector size mismatch");
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += values[i * n + j] * v[j];
    out[i] = s;
  }
  return out;
}

HessianMatrix hessian_oracle(const Objective& obj, std::span<const double> params, Batch batch,
                             double step) {
  const std::size_t n = obj.param_count();
  if (n > kHessianOracleMaxParams) {
    throw UsageError("Hessian oracle limited to " + std::to_string(kHessianOracleMaxParams) +
                     " parameters, model has " + std::to_string(n));
  }
  if (params.size() != n) throw ShapeError("Hessian oracle parameter size mismatch");
  HessianMatrix h;
  h.n = n;
  h.values.assign(n * n, 0.0);
  std::vector<double> work(params.begin(), params.end());
  for (std::size_t i = 0; i < n; ++i) {
    const double hi = step * (1.0 + std::fabs(params[i]));
    work[i] = params[i] + hi;
    const auto plus = obj.grad(work, batch).grad;
    work[i] = params[i] - hi;
    const auto minus = obj.grad(work, batch).grad;
    work[i] = params[i];
    for (std::size_t j = 0; j < n; ++j) h.values[i * n + j] = (plus[j] - minus[j]) / (2.0 * hi);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double a = h.values[i * n + j];
      const double b = h.values[j * n + i];
      h.max_asymmetry = std::max(h.max_asymmetry, std::fabs(a - b));
      const double m = 0.5 * (a + b);
      h.values[i * n + j] = m;
      h.values[j * n + i] = m;
    }
  }
  return h;
}

}  // namespace fblab
