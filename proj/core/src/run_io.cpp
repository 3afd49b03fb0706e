// SPDX-License-Identifier: Apache-2.0
#include "fblab/run_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include <fmt/format.h>

#include "fblab/error.hpp"

namespace fblab {

using nlohmann::json;

std::string format_step_row(const StepRecord& r) {
  return fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{},{:.17g}", r.step, r.lr,
                     r.train_loss, r.full_loss, r.grad_norm_pre, r.grad_norm_post,
                     r.clipped ? 1 : 0, r.penalty_value);
}

std::string format_validation_row(const ValidationRecord& r) {
  return fmt::format("{},{:.17g},{:.17g}", r.step, r.val_loss, r.val_acc);
}

namespace {

std::FILE* open_for_write(const std::filesystem::path& p) {
  std::FILE* f = std::fopen(p.string().c_str(), "wb");
  if (!f) throw Error("cannot write " + p.string());
  return f;
}

}  // namespace

CsvLogWriter::CsvLogWriter(const std::filesystem::path& runlog,
                           const std::filesystem::path& validation)
    : runlog_(open_for_write(runlog)), validation_(open_for_write(validation)) {
  fmt::print(runlog_.get(), "{}\n", kRunlogHeader);
  fmt::print(validation_.get(), "{}\n", kValidationHeader);
  std::fflush(runlog_.get());
  std::fflush(validation_.get());
}

void CsvLogWriter::step(const StepRecord& r) {
  fmt::print(runlog_.get(), "{}\n", format_step_row(r));
  std::fflush(runlog_.get());
}

void CsvLogWriter::validation(const ValidationRecord& r) {
  fmt::print(validation_.get(), "{}\n", format_validation_row(r));
  std::fflush(validation_.get());
}

TrainObserver CsvLogWriter::observer() {
  TrainObserver o;
  o.on_step = [this](const StepRecord& r) { step(r); };
  o.on_validation = [this](const ValidationRecord& r) { validation(r); };
  return o;
}

void write_runlog_csv(const RunLog& log, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << kRunlogHeader << '\n';
  for (const auto& r : log.steps) out << format_step_row(r) << '\n';
}

void write_validation_csv(const RunLog& log, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << kValidationHeader << '\n';
  for (const auto& r : log.validation) out << format_validation_row(r) << '\n';
}

namespace {

template <class T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace

json summary_to_json(const RunSummary& s) {
  return json{{"steps_completed", s.steps_completed},
              {"final_val_acc", opt(s.final_val_acc)},
              {"final_val_loss", opt(s.final_val_loss)},
              {"best_val_acc", opt(s.best_val_acc)},
              {"best_step", opt(s.best_step)},
              {"final_train_acc", opt(s.final_train_acc)},
              {"final_train_loss", std::isfinite(s.final_train_loss) ? json(s.final_train_loss)
                                                                      : json(nullptr)},
              {"clipped_steps", s.clipped_steps},
              {"abort_step", opt(s.abort_step)},
              {"abort_cause", s.abort_cause}};
}

// ---------------------------------------------------------------------------

json model_spec_to_json(const ModelSpec& spec) {
  return json{{"layer_widths", spec.layer_widths},
              {"activation", to_string(spec.activation)},
              {"normalization", to_string(spec.normalization)},
              {"init_seed", spec.init_seed}};
}

ModelSpec model_spec_from_json(const json& j) {
  try {
    ModelSpec s;
    s.layer_widths = j.at("layer_widths").get<std::vector<std::size_t>>();
    s.activation = activation_from_string(j.at("activation").get<std::string>());
    s.normalization = normalization_from_string(j.at("normalization").get<std::string>());
    s.init_seed = j.at("init_seed").get<std::uint64_t>();
    s.validate();
    return s;
  } catch (const json::exception& e) {
    throw LoadError(std::string("malformed model spec: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& json_path, const ModelSpec& spec,
                     const ParamVector& params) {
  params.validate();
  std::filesystem::path bin_path = json_path;
  bin_path.replace_extension(".bin");
  {
    std::ofstream bin(bin_path, std::ios::binary);
    if (!bin) throw Error("cannot write " + bin_path.string());
    for (double v : params.values) {
      auto bits = std::bit_cast<std::uint64_t>(v);
      unsigned char bytes[8];
      for (int b = 0; b < 8; ++b) bytes[b] = static_cast<unsigned char>(bits >> (8 * b));
      bin.write(reinterpret_cast<const char*>(bytes), 8);
    }
  }
  json segs = json::array();
  for (const auto& s : params.segments) {
    segs.push_back({{"layer", s.layer},
                    {"kind", s.kind == SegmentKind::weight ? "weight" : "bias"},
                    {"rows", s.rows},
                    {"cols", s.cols},
                    {"offset", s.offset}});
  }
  json sidecar = {{"format", "fblab-checkpoint"},
                  {"format_version", kCheckpointVersion},
                  {"encoding", "float64-le"},
                  {"param_count", params.size()},
                  {"values_file", bin_path.filename().string()},
                  {"model", model_spec_to_json(spec)},
                  {"segments", segs}};
  std::ofstream out(json_path);
  if (!out) throw Error("cannot write " + json_path.string());
  out << sidecar.dump(2) << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& json_path) {
  std::ifstream in(json_path);
  if (!in) throw LoadError("cannot open checkpoint " + json_path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw LoadError("checkpoint sidecar is not JSON: " + std::string(e.what()));
  }
  if (j.value("format", "") != "fblab-checkpoint") throw LoadError("not an fblab checkpoint");
  if (j.value("format_version", 0) != kCheckpointVersion) {
    throw LoadError("unsupported checkpoint version");
  }
  Checkpoint c;
  c.spec = model_spec_from_json(j.at("model"));
  c.params.segments = param_layout(c.spec);
  const auto count = j.at("param_count").get<std::size_t>();
  const std::filesystem::path bin_path =
      json_path.parent_path() / j.at("values_file").get<std::string>();
  std::ifstream bin(bin_path, std::ios::binary);
  if (!bin) throw LoadError("cannot open " + bin_path.string());
  c.params.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    unsigned char bytes[8];
    if (!bin.read(reinterpret_cast<char*>(bytes), 8)) throw LoadError("checkpoint values truncated");
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[b]) << (8 * b);
    c.params.values[i] = std::bit_cast<double>(bits);
  }
  if (bin.peek() != std::char_traits<char>::eof()) throw LoadError("checkpoint has trailing bytes");
  c.params.validate();
  return c;
}

}  // namespace fblab
