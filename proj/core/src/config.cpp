// SPDX-License-Identifier: Apache-2.0
#include "fblab/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "fblab/random.hpp"

namespace fblab {

using nlohmann::json;

std::string to_string(UpdateUnit u) { return u == UpdateUnit::block ? "block" : "epoch"; }

std::string to_string(SnapshotPolicy p) {
  switch (p) {
    case SnapshotPolicy::last: return "last";
    case SnapshotPolicy::best_validation: return "best_validation";
    case SnapshotPolicy::both: return "both";
  }
  return "?";
}

namespace {

UpdateUnit update_unit_from_string(const std::string& s) {
  if (s == "block") return UpdateUnit::block;
  if (s == "epoch") return UpdateUnit::epoch;
  throw ConfigError("unknown update_unit '" + s + "'");
}

SnapshotPolicy snapshot_policy_from_string(const std::string& s) {
  if (s == "last") return SnapshotPolicy::last;
  if (s == "best_validation") return SnapshotPolicy::best_validation;
  if (s == "both") return SnapshotPolicy::both;
  throw ConfigError("unknown snapshot_policy '" + s + "'");
}

std::string join_errors(const std::vector<std::string>& errors) {
  std::string msg = "invalid configuration:";
  for (const auto& e : errors) msg += "\n  " + e;
  return msg;
}

}  // namespace

ConfigValidationError::ConfigValidationError(std::vector<std::string> errors)
    : ConfigError(join_errors(errors)), errors_(std::move(errors)) {}

UpdateUnit TrainConfig::resolved_update_unit() const {
  if (update_unit) return *update_unit;
  return batch_plan.mode == BatchMode::full_batch ? UpdateUnit::epoch : UpdateUnit::block;
}

std::uint64_t TrainConfig::effective_init_seed() const {
  return model.init_seed ? *model.init_seed : derive_seed(run_seed, "model");
}

std::uint64_t TrainConfig::effective_plan_seed() const {
  return derive_seed(derive_seed(run_seed, "plan"), batch_plan.seed);
}

std::uint64_t TrainConfig::effective_noise_seed() const {
  return derive_seed(derive_seed(run_seed, "noise"), noise.seed);
}

std::vector<std::string> TrainConfig::validation_errors() const {
  std::vector<std::string> errors;
  auto check = [&](const std::string& path, const std::function<void()>& fn) {
    try {
      fn();
    } catch (const ConfigError& e) {
      errors.push_back(path + ": " + e.what());
    }
  };
  check("/model", [&] {
    for (std::size_t w : model.hidden_widths) {
      if (w == 0) throw ConfigError("hidden widths must be >= 1");
    }
  });
  check("/loss", [&] { loss.validate(); });
  check("/schedule", [&] { schedule.validate(); });
  if (clip) check("/clip", [&] { clip->validate(); });
  if (reg) check("/reg", [&] { reg->validate(); });
  check("/noise", [&] { noise.validate(); });
  check("/optimizer", [&] { optimizer.validate(); });
  check("/batch_plan", [&] {
    if (batch_plan.mode != BatchMode::full_batch && batch_plan.batch_size == 0) {
      throw ConfigError("batch_size must be >= 1");
    }
  });
  if (accumulation_block_size == 0) {
    errors.push_back("/accumulation_block_size: must be >= 1");
  }
  if (eval_every == 0) errors.push_back("/eval_every: must be >= 1");
  check("/dataset", [&] {
    if (const auto* s = std::get_if<SyntheticSource>(&dataset.source)) {
      if (s->classes < 2) throw ConfigError("classes must be >= 2");
      if (s->n < s->classes) throw ConfigError("n must be >= classes");
      if (s->n_val != 0 && s->n_val < s->classes) throw ConfigError("n_val must be 0 or >= classes");
      if (s->dim == 0) throw ConfigError("dim must be >= 1");
    } else {
      const auto& f = std::get<FileSource>(dataset.source);
      if (f.train_path.empty()) throw ConfigError("train_path is required for file datasets");
    }
    if (dataset.expand && dataset.expand->copies == 0) throw ConfigError("expand.copies must be >= 1");
  });
  return errors;
}

void TrainConfig::validate() const {
  auto errors = validation_errors();
  if (!errors.empty()) throw ConfigValidationError(std::move(errors));
}

// ---------------------------------------------------------------------------
// JSON reading with error collection

namespace {

class Reader {
 public:
  explicit Reader(std::vector<std::string>& errors) : errors_(errors) {}

  void error(const std::string& path, const std::string& msg) { errors_.push_back(path + ": " + msg); }

  // Rejects keys outside `allowed`. Returns false when `j` is not an object.
  bool object(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) {
      error(path.empty() ? "/" : path, "expected an object");
      return false;
    }
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : j.items()) {
      if (!ok.count(key)) error(path + "/" + key, "unknown key");
    }
    return true;
  }

  template <class T>
  void read(const json& j, const char* key, const std::string& path, T& out) {
    if (!j.contains(key)) return;
    const json& v = j.at(key);
    const std::string p = path + "/" + key;
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw std::invalid_argument("expected a boolean");
        out = v.get<bool>();
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) throw std::invalid_argument("expected a number");
        out = v.get<T>();
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) throw std::invalid_argument("expected an integer");
        if (v.is_number_unsigned()) {
          out = static_cast<T>(v.get<std::uint64_t>());
        } else {
          const auto s = v.get<std::int64_t>();
          if (s < 0) throw std::invalid_argument("expected a nonnegative integer");
          out = static_cast<T>(s);
        }
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw std::invalid_argument("expected a string");
        out = v.get<std::string>();
      } else {
        static_assert(sizeof(T) == 0, "unsupported type");
      }
    } catch (const std::exception& e) {
      error(p, e.what());
    }
  }

  template <class E>
  void read_enum(const json& j, const char* key, const std::string& path, E& out,
                 E (*parse)(const std::string&)) {
    if (!j.contains(key)) return;
    std::string s;
    const std::size_t before = errors_.size();
    read(j, key, path, s);
    if (errors_.size() != before) return;
    try {
      out = parse(s);
    } catch (const ConfigError& e) {
      error(path + "/" + key, e.what());
    }
  }

 private:
  std::vector<std::string>& errors_;
};

void read_model(Reader& r, const json& j, ModelConfig& m) {
  const std::string p = "/model";
  if (!r.object(j, p, {"hidden_widths", "activation", "normalization", "init_seed"})) return;
  if (j.contains("hidden_widths")) {
    const json& w = j.at("hidden_widths");
    if (!w.is_array()) {
      r.error(p + "/hidden_widths", "expected an array of positive integers");
    } else {
      m.hidden_widths.clear();
      for (std::size_t i = 0; i < w.size(); ++i) {
        if (!w[i].is_number_integer() || w[i].get<std::int64_t>() < 1) {
          r.error(p + "/hidden_widths/" + std::to_string(i), "expected a positive integer");
        } else {
          m.hidden_widths.push_back(w[i].get<std::size_t>());
        }
      }
    }
  }
  r.read_enum(j, "activation", p, m.activation, &activation_from_string);
  r.read_enum(j, "normalization", p, m.normalization, &normalization_from_string);
  if (j.contains("init_seed") && !j.at("init_seed").is_null()) {
    std::uint64_t s = 0;
    r.read(j, "init_seed", p, s);
    m.init_seed = s;
  }
}

void read_positive(Reader& r, const json& j, const char* key, const std::string& path, double& out) {
  r.read(j, key, path, out);
  if (j.contains(key) && j.at(key).is_number() && !(out > 0.0)) r.error(path + "/" + key, "must be > 0");
}

void read_nonnegative(Reader& r, const json& j, const char* key, const std::string& path,
                      double& out) {
  r.read(j, key, path, out);
  if (j.contains(key) && j.at(key).is_number() && !(out >= 0.0)) {
    r.error(path + "/" + key, "must be >= 0");
  }
}

void read_dataset(Reader& r, const json& j, DatasetConfig& d) {
  const std::string p = "/dataset";
  if (!j.is_object()) {
    r.error(p, "expected an object");
    return;
  }
  std::string source = "synthetic";
  r.read(j, "source", p, source);
  if (source == "synthetic") {
    if (!r.object(j, p, {"source", "kind", "n", "n_val", "dim", "classes", "seed", "noise", "turns",
                         "cluster_std", "center_scale", "expand"})) {
      return;
    }
    SyntheticSource s;
    r.read_enum(j, "kind", p, s.kind, &synthetic_kind_from_string);
    r.read(j, "n", p, s.n);
    r.read(j, "n_val", p, s.n_val);
    r.read(j, "dim", p, s.dim);
    r.read(j, "classes", p, s.classes);
    r.read(j, "seed", p, s.seed);
    read_nonnegative(r, j, "noise", p, s.options.noise);
    read_positive(r, j, "turns", p, s.options.turns);
    read_nonnegative(r, j, "cluster_std", p, s.options.cluster_std);
    read_nonnegative(r, j, "center_scale", p, s.options.center_scale);
    d.source = s;
  } else if (source == "file") {
    if (!r.object(j, p, {"source", "train_path", "val_path", "classes", "expand"})) return;
    FileSource f;
    r.read(j, "train_path", p, f.train_path);
    if (j.contains("val_path") && !j.at("val_path").is_null()) {
      std::string v;
      r.read(j, "val_path", p, v);
      f.val_path = v;
    }
    if (j.contains("classes") && !j.at("classes").is_null()) {
      std::size_t c = 0;
      r.read(j, "classes", p, c);
      f.classes = c;
    }
    d.source = f;
  } else {
    r.error(p + "/source", "expected \"synthetic\" or \"file\"");
  }
  if (j.contains("expand") && !j.at("expand").is_null()) {
    const json& e = j.at("expand");
    const std::string ep = p + "/expand";
    if (r.object(e, ep, {"copies", "kind", "magnitude", "seed", "grid_width"})) {
      ExpansionConfig x;
      r.read(e, "copies", ep, x.copies);
      r.read_enum(e, "kind", ep, x.augmentation.kind, &augmentation_kind_from_string);
      read_nonnegative(r, e, "magnitude", ep, x.augmentation.magnitude);
      r.read(e, "seed", ep, x.augmentation.seed);
      r.read(e, "grid_width", ep, x.augmentation.grid_width);
      d.expand = x;
    }
  }
}

}  // namespace

TrainConfig config_from_json(const json& j) {
  std::vector<std::string> errors;
  Reader r(errors);
  TrainConfig cfg;
  if (!r.object(j, "", {"model", "loss", "schedule", "clip", "reg", "noise", "optimizer",
                        "batch_plan", "update_unit", "accumulation_block_size", "dataset",
                        "eval_every", "run_seed", "snapshot_policy"})) {
    throw ConfigValidationError(std::move(errors));
  }

  if (j.contains("model")) read_model(r, j.at("model"), cfg.model);

  if (j.contains("loss")) {
    const json& l = j.at("loss");
    if (r.object(l, "/loss", {"label_smoothing"})) {
      r.read(l, "label_smoothing", "/loss", cfg.loss.label_smoothing);
    }
  }

  if (j.contains("schedule")) {
    const json& s = j.at("schedule");
    const std::string p = "/schedule";
    if (r.object(s, p, {"peak_lr", "warmup_steps", "anneal_horizon", "total_steps"})) {
      read_positive(r, s, "peak_lr", p, cfg.schedule.peak_lr);
      r.read(s, "warmup_steps", p, cfg.schedule.warmup_steps);
      r.read(s, "anneal_horizon", p, cfg.schedule.anneal_horizon);
      r.read(s, "total_steps", p, cfg.schedule.total_steps);
    }
  }

  if (j.contains("clip")) {
    const json& c = j.at("clip");
    if (c.is_null()) {
      cfg.clip.reset();
    } else if (r.object(c, "/clip", {"max_norm", "fudge"})) {
      ClipConfig cc;
      read_positive(r, c, "max_norm", "/clip", cc.max_norm);
      read_positive(r, c, "fudge", "/clip", cc.fudge);
      cfg.clip = cc;
    }
  }

  if (j.contains("reg")) {
    const json& g = j.at("reg");
    const std::string p = "/reg";
    if (g.is_null()) {
      cfg.reg.reset();
    } else if (r.object(g, p, {"alpha", "block_size", "eps_numerator", "diff_mode", "zero_grad_guard"})) {
      RegConfig rc;
      read_nonnegative(r, g, "alpha", p, rc.alpha);
      r.read(g, "block_size", p, rc.block_size);
      if (g.contains("block_size") && rc.block_size == 0) r.error(p + "/block_size", "must be >= 1");
      read_positive(r, g, "eps_numerator", p, rc.eps_numerator);
      r.read_enum(g, "diff_mode", p, rc.diff_mode, &diff_mode_from_string);
      read_positive(r, g, "zero_grad_guard", p, rc.zero_grad_guard);
      cfg.reg = rc;
    }
  }

  if (j.contains("noise")) {
    const json& n = j.at("noise");
    const std::string p = "/noise";
    if (r.object(n, p, {"mode", "scale", "seed"})) {
      r.read_enum(n, "mode", p, cfg.noise.mode, &noise_mode_from_string);
      read_nonnegative(r, n, "scale", p, cfg.noise.scale);
      r.read(n, "seed", p, cfg.noise.seed);
    }
  }

  if (j.contains("optimizer")) {
    const json& o = j.at("optimizer");
    const std::string p = "/optimizer";
    if (r.object(o, p, {"momentum", "weight_decay", "nesterov"})) {
      r.read(o, "momentum", p, cfg.optimizer.momentum);
      if (o.contains("momentum") && !(cfg.optimizer.momentum >= 0.0 && cfg.optimizer.momentum < 1.0)) {
        r.error(p + "/momentum", "must lie in [0, 1)");
      }
      read_nonnegative(r, o, "weight_decay", p, cfg.optimizer.weight_decay);
      r.read(o, "nesterov", p, cfg.optimizer.nesterov);
    }
  }

  if (j.contains("batch_plan")) {
    const json& b = j.at("batch_plan");
    const std::string p = "/batch_plan";
    if (r.object(b, p, {"mode", "batch_size", "seed"})) {
      r.read_enum(b, "mode", p, cfg.batch_plan.mode, &batch_mode_from_string);
      r.read(b, "batch_size", p, cfg.batch_plan.batch_size);
      if (b.contains("batch_size") && cfg.batch_plan.batch_size == 0) {
        r.error(p + "/batch_size", "must be >= 1");
      }
      r.read(b, "seed", p, cfg.batch_plan.seed);
    }
  }

  if (j.contains("update_unit") && !j.at("update_unit").is_null()) {
    UpdateUnit u = UpdateUnit::epoch;
    r.read_enum(j, "update_unit", "", u, &update_unit_from_string);
    cfg.update_unit = u;
  }
  r.read(j, "accumulation_block_size", "", cfg.accumulation_block_size);
  if (j.contains("dataset")) read_dataset(r, j.at("dataset"), cfg.dataset);
  r.read(j, "eval_every", "", cfg.eval_every);
  r.read(j, "run_seed", "", cfg.run_seed);
  r.read_enum(j, "snapshot_policy", "", cfg.snapshot_policy, &snapshot_policy_from_string);

  if (errors.empty()) {
    for (auto& e : cfg.validation_errors()) errors.push_back(std::move(e));
  }
  if (!errors.empty()) throw ConfigValidationError(std::move(errors));
  return cfg;
}

json config_to_json(const TrainConfig& cfg) {
  json j;
  j["model"] = {{"hidden_widths", cfg.model.hidden_widths},
                {"activation", to_string(cfg.model.activation)},
                {"normalization", to_string(cfg.model.normalization)},
                {"init_seed", cfg.model.init_seed ? json(*cfg.model.init_seed) : json(nullptr)}};
  j["loss"] = {{"label_smoothing", cfg.loss.label_smoothing}};
  j["schedule"] = {{"peak_lr", cfg.schedule.peak_lr},
                   {"warmup_steps", cfg.schedule.warmup_steps},
                   {"anneal_horizon", cfg.schedule.anneal_horizon},
                   {"total_steps", cfg.schedule.total_steps}};
  j["clip"] = cfg.clip ? json{{"max_norm", cfg.clip->max_norm}, {"fudge", cfg.clip->fudge}}
                       : json(nullptr);
  j["reg"] = cfg.reg ? json{{"alpha", cfg.reg->alpha},
                            {"block_size", cfg.reg->block_size},
                            {"eps_numerator", cfg.reg->eps_numerator},
                            {"diff_mode", to_string(cfg.reg->diff_mode)},
                            {"zero_grad_guard", cfg.reg->zero_grad_guard}}
                     : json(nullptr);
  j["noise"] = {{"mode", to_string(cfg.noise.mode)},
                {"scale", cfg.noise.scale},
                {"seed", cfg.noise.seed}};
  j["optimizer"] = {{"momentum", cfg.optimizer.momentum},
                    {"weight_decay", cfg.optimizer.weight_decay},
                    {"nesterov", cfg.optimizer.nesterov}};
  j["batch_plan"] = {{"mode", to_string(cfg.batch_plan.mode)},
                     {"batch_size", cfg.batch_plan.batch_size},
                     {"seed", cfg.batch_plan.seed}};
  j["update_unit"] = cfg.update_unit ? json(to_string(*cfg.update_unit)) : json(nullptr);
  j["accumulation_block_size"] = cfg.accumulation_block_size;

  json d;
  if (const auto* s = std::get_if<SyntheticSource>(&cfg.dataset.source)) {
    d = {{"source", "synthetic"},      {"kind", to_string(s->kind)},
         {"n", s->n},                  {"n_val", s->n_val},
         {"dim", s->dim},              {"classes", s->classes},
         {"seed", s->seed},            {"noise", s->options.noise},
         {"turns", s->options.turns},  {"cluster_std", s->options.cluster_std},
         {"center_scale", s->options.center_scale}};
  } else {
    const auto& f = std::get<FileSource>(cfg.dataset.source);
    d = {{"source", "file"},
         {"train_path", f.train_path},
         {"val_path", f.val_path ? json(*f.val_path) : json(nullptr)},
         {"classes", f.classes ? json(*f.classes) : json(nullptr)}};
  }
  if (cfg.dataset.expand) {
    const auto& e = *cfg.dataset.expand;
    d["expand"] = {{"copies", e.copies},
                   {"kind", to_string(e.augmentation.kind)},
                   {"magnitude", e.augmentation.magnitude},
                   {"seed", e.augmentation.seed},
                   {"grid_width", e.augmentation.grid_width}};
  } else {
    d["expand"] = nullptr;
  }
  j["dataset"] = d;
  j["eval_every"] = cfg.eval_every;
  j["run_seed"] = cfg.run_seed;
  j["snapshot_policy"] = to_string(cfg.snapshot_policy);
  return j;
}

TrainConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigValidationError({"/: " + std::string(e.what())});
  }
  return config_from_json(j);
}

void write_config(const TrainConfig& cfg, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << config_to_json(cfg).dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Presets

namespace {

// Desk-scale budgets: 1000 training examples, SGD batch 128 -> 8 blocks per
// epoch. Mini-batch runs take 60 epochs; full-batch runs 60 steps (same data
// passes) or 600 steps (10x longer), each step being one epoch.
constexpr std::size_t kSgdBatch = 128;
constexpr std::uint64_t kEpochs = 60;
constexpr std::uint64_t kBlocksPerEpoch = 8;
constexpr std::uint64_t kLongSteps = 600;
// Shared by the SGD baseline and fb_base, which reuses the SGD hyperparameters.
constexpr double kSgdPeakLr = 0.4;

TrainConfig base_config() {
  TrainConfig c;
  c.dataset.source = SyntheticSource{};
  c.eval_every = 20;
  c.clip.reset();
  return c;
}

TrainConfig sgd_preset() {
  TrainConfig c = base_config();
  c.batch_plan = {BatchMode::without_replacement, kSgdBatch, 0};
  const std::uint64_t total = kEpochs * kBlocksPerEpoch;
  // Warmup over the first epoch, then cosine to zero by the end of training.
  c.schedule = {kSgdPeakLr, kBlocksPerEpoch, total - kBlocksPerEpoch, total};
  c.eval_every = kBlocksPerEpoch * 5;
  return c;
}

TrainConfig fb_base_preset() {
  TrainConfig c = base_config();
  c.batch_plan = {BatchMode::full_batch, kSgdBatch, 0};
  c.schedule = {kSgdPeakLr, 1, kEpochs - 1, kEpochs};
  c.eval_every = 5;
  return c;
}

TrainConfig fb_long_preset() {
  TrainConfig c = base_config();
  c.batch_plan = {BatchMode::full_batch, kSgdBatch, 0};
  // Same proportions as 400 warmup / 4000 horizon / 3000 total.
  c.schedule = {0.4, kLongSteps * 400 / 3000, kLongSteps * 4000 / 3000, kLongSteps};
  c.eval_every = 20;
  return c;
}

RegConfig default_reg() {
  RegConfig r;
  r.alpha = 1.0;
  r.block_size = 128;
  return r;
}

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {
      "baseline_sgd", "sgd_regularized", "fb_base",    "fb_long",           "fb_clip",
      "fb_reg",       "fb_strong",       "fb_practice", "fb_noise_additive", "fb_noise_multiplicative"};
  return names;
}

TrainConfig preset(const std::string& name) {
  if (name == "baseline_sgd") return sgd_preset();
  if (name == "sgd_regularized") {
    TrainConfig c = sgd_preset();
    c.reg = preset("fb_strong").reg;
    return c;
  }
  if (name == "fb_base") return fb_base_preset();
  if (name == "fb_long") return fb_long_preset();
  if (name == "fb_clip") {
    TrainConfig c = fb_long_preset();
    c.clip = ClipConfig{0.25, 1e-6};
    return c;
  }
  if (name == "fb_reg") {
    TrainConfig c = preset("fb_clip");
    c.reg = default_reg();
    return c;
  }
  if (name == "fb_strong") {
    TrainConfig c = preset("fb_reg");
    c.reg->block_size /= 4;
    c.schedule.peak_lr *= 2.0;
    return c;
  }
  if (name == "fb_practice") {
    TrainConfig c = preset("fb_strong");
    c.batch_plan = {BatchMode::without_replacement, c.reg->block_size, 0};
    c.update_unit = UpdateUnit::epoch;
    return c;
  }
  if (name == "fb_noise_additive" || name == "fb_noise_multiplicative") {
    TrainConfig c = fb_base_preset();
    c.noise.mode = name == "fb_noise_additive" ? NoiseMode::additive : NoiseMode::multiplicative;
    c.noise.scale = 0.01;
    return c;
  }
  throw ConfigError("unknown preset '" + name + "'");
}

ModelSpec resolve_model_spec(const TrainConfig& cfg, std::size_t input_dim, std::size_t classes) {
  ModelSpec spec;
  spec.layer_widths.push_back(input_dim);
  for (std::size_t w : cfg.model.hidden_widths) spec.layer_widths.push_back(w);
  spec.layer_widths.push_back(classes);
  spec.activation = cfg.model.activation;
  spec.normalization = cfg.model.normalization;
  spec.init_seed = cfg.effective_init_seed();
  spec.validate();
  return spec;
}

ResolvedData resolve_data(const DatasetConfig& cfg) {
  ResolvedData out;
  if (const auto* s = std::get_if<SyntheticSource>(&cfg.source)) {
    out.train = make_synthetic(s->kind, s->n, s->dim, s->classes, s->seed, s->options);
    if (s->n_val > 0) {
      out.validation = make_synthetic(s->kind, s->n_val, s->dim, s->classes,
                                      derive_seed(s->seed, "validation"), s->options);
    }
  } else {
    const auto& f = std::get<FileSource>(cfg.source);
    out.train = load_csv(f.train_path, f.classes);
    if (f.val_path) {
      out.validation = load_csv(*f.val_path, out.train.classes);
      if (out.validation->dim != out.train.dim) {
        throw ConfigError("validation file has a different feature dimension");
      }
    }
  }
  if (cfg.expand) out.train = expand_fixed(out.train, cfg.expand->copies, cfg.expand->augmentation);
  return out;
}

}  // namespace fblab
