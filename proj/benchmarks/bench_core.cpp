// SPDX-License-Identifier: Apache-2.0
#include <memory>

#include <benchmark/benchmark.h>

#include "fblab/config.hpp"
#include "fblab/implicit_reg.hpp"
#include "fblab/optim.hpp"
#include "fblab/train.hpp"

namespace {

using namespace fblab;

// Default desk model: 2 -> 64 -> 64 -> 2 on 1000 spiral points.
struct Setup {
  std::shared_ptr<const Dataset> data =
      std::make_shared<Dataset>(make_synthetic(SyntheticKind::spirals, 1000, 2, 2, 0));
  ModelSpec spec = resolve_model_spec(TrainConfig{}, 2, 2);
  MlpObjective obj{Mlp(spec), data};
  ParamVector params = Mlp(spec).init();
  std::vector<std::size_t> all = all_indices(1000);
};

const Setup& setup() {
  static const Setup s;
  return s;
}

void BM_BlockGrad(benchmark::State& state) {
  const auto& s = setup();
  const std::vector<std::size_t> block(s.all.begin(), s.all.begin() + state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(s.obj.grad(s.params.values, block));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BlockGrad)->Arg(32)->Arg(128)->Arg(1000);

void BM_AccumulateFull(benchmark::State& state) {
  const auto& s = setup();
  const AccumulationConfig cfg{128, state.range(0) ? AccumPrecision::fp32 : AccumPrecision::fp64};
  for (auto _ : state) benchmark::DoNotOptimize(accumulate_full(s.obj, s.params.values, cfg));
}
BENCHMARK(BM_AccumulateFull)->Arg(0)->Arg(1);

void BM_RegGradBlock(benchmark::State& state) {
  const auto& s = setup();
  const std::vector<std::size_t> block(s.all.begin(), s.all.begin() + 128);
  RegConfig cfg;
  cfg.diff_mode = state.range(0) ? DiffMode::central : DiffMode::forward;
  for (auto _ : state) benchmark::DoNotOptimize(reg_grad_block(s.obj, s.params.values, block, cfg));
}
BENCHMARK(BM_RegGradBlock)->Arg(0)->Arg(1);

void BM_PenaltyGradFull(benchmark::State& state) {
  const auto& s = setup();
  const IndexBlocks blocks = contiguous_blocks(s.all, static_cast<std::size_t>(state.range(0)));
  const RegConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(penalty_grad(s.obj, s.params.values, blocks, cfg, 0.4));
}
BENCHMARK(BM_PenaltyGradFull)->Arg(128)->Arg(32);

void BM_HessianOracle(benchmark::State& state) {
  ModelSpec spec;
  spec.layer_widths = {2, static_cast<std::size_t>(state.range(0)), 2};
  const auto data = std::make_shared<Dataset>(make_synthetic(SyntheticKind::spirals, 64, 2, 2, 1));
  const MlpObjective obj(Mlp(spec), data);
  const ParamVector p = Mlp(spec).init();
  const auto all = all_indices(64);
  for (auto _ : state) benchmark::DoNotOptimize(hessian_oracle(obj, p.values, all));
  state.counters["params"] = static_cast<double>(p.size());
}
BENCHMARK(BM_HessianOracle)->Arg(4)->Arg(16)->Arg(64);

void BM_TrainFbBase(benchmark::State& state) {
  const TrainConfig cfg = preset("fb_base");
  const ResolvedData data = resolve_data(cfg.dataset);
  for (auto _ : state) benchmark::DoNotOptimize(train(cfg, data.train, nullptr));
}
BENCHMARK(BM_TrainFbBase)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
