// SPDX-License-Identifier: Apache-2.0
#include "fblab/train.hpp"

#include <cmath>
#include <memory>

#include "fblab/error.hpp"
#include "fblab/implicit_reg.hpp"
#include "fblab/optim.hpp"
#include "fblab/vec.hpp"

namespace fblab {

namespace {

struct StepGradient {
  GradReport grad;
  IndexBlocks penalty_blocks;
  std::vector<GradReport> penalty_reports;  // empty unless reusable
};

// Gradient of one step plus the blocks its penalty is computed over.
StepGradient step_gradient(const TrainConfig& cfg, const BatchPlan& plan, UpdateUnit unit,
                           const Objective& obj, std::span<const double> params,
                           std::uint64_t k, const IndexBlocks& fixed_blocks) {
  const std::size_t n = obj.example_count();
  StepGradient out;
  if (unit == UpdateUnit::epoch) {
    IndexBlocks blocks =
        plan.mode == BatchMode::full_batch ? fixed_blocks : plan_epoch(plan, n, k);
    std::vector<GradReport> reports;
    out.grad = accumulate_blocks(obj, params, blocks, cfg.reg ? &reports : nullptr);
    if (cfg.reg) {
      out.penalty_blocks = std::move(blocks);
      out.penalty_reports = std::move(reports);
    }
    return out;
  }
  const std::size_t per_epoch = blocks_per_epoch(plan, n);
  const IndexBlocks epoch_blocks = plan_epoch(plan, n, k / per_epoch);
  const auto& block = epoch_blocks[k % per_epoch];
  out.grad = obj.grad(params, block);
  if (cfg.reg) out.penalty_blocks = contiguous_blocks(block, cfg.reg->block_size);
  return out;
}

}  // namespace

RunLog train(const TrainConfig& cfg, const Objective& train_obj, const Objective* val_obj,
             ParamVector init, const TrainObserver* observer) {
  cfg.validate();
  if (init.size() != train_obj.param_count()) {
    throw ShapeError("initial parameters do not match the training objective");
  }
  if (val_obj && val_obj->param_count() != train_obj.param_count()) {
    throw ShapeError("validation objective has a different parameter count");
  }

  const std::size_t n = train_obj.example_count();
  const UpdateUnit unit = cfg.resolved_update_unit();
  BatchPlan plan = cfg.batch_plan;
  plan.seed = cfg.effective_plan_seed();
  NoiseConfig noise = cfg.noise;
  noise.seed = cfg.effective_noise_seed();

  // Full-batch accumulation uses fixed, never-shuffled blocks; with the
  // penalty enabled these are also the penalty blocks.
  const std::size_t fixed_size = cfg.reg ? cfg.reg->block_size : cfg.accumulation_block_size;
  const IndexBlocks fixed_blocks = contiguous_blocks(all_indices(n), fixed_size);

  RunLog log;
  ParamVector params = std::move(init);
  MomentumState state(params.size());
  const auto val_idx = val_obj ? all_indices(val_obj->example_count()) : std::vector<std::size_t>{};
  const bool keep_best = cfg.snapshot_policy != SnapshotPolicy::last;

  auto abort = [&](std::uint64_t step, std::string cause) {
    log.summary.abort_step = step;
    log.summary.abort_cause = std::move(cause);
  };

  for (std::uint64_t k = 0; k < cfg.schedule.total_steps; ++k) {
    const std::uint64_t step = k + 1;
    const double lr = lr_at(step, cfg.schedule);
    StepRecord rec;
    rec.step = step;
    rec.lr = lr;

    std::vector<double> direction;
    try {
      StepGradient sg = step_gradient(cfg, plan, unit, train_obj, params.values, k, fixed_blocks);
      rec.train_loss = sg.grad.loss;
      direction = std::move(sg.grad.grad);
      double penalty_term = 0.0;
      if (cfg.reg) {
        const PenaltyReport pen = penalty_grad(train_obj, params.values, sg.penalty_blocks,
                                               *cfg.reg, lr, sg.penalty_reports);
        vec::axpy(1.0, pen.grad, direction);
        rec.penalty_value = pen.value;
        penalty_term = pen.coefficient * pen.value;
      }
      rec.full_loss = rec.train_loss +
                      0.5 * cfg.optimizer.weight_decay * vec::squared_norm(params.values) +
                      penalty_term;
    } catch (const NumericError& e) {
      abort(step, e.what());
      break;
    }
    if (!std::isfinite(rec.train_loss) || !vec::all_finite(direction)) {
      abort(step, "non-finite loss or gradient");
      break;
    }

    direction = inject_noise(direction, noise, step);
    rec.grad_norm_pre = vec::norm(direction);
    rec.grad_norm_post = rec.grad_norm_pre;
    if (cfg.clip) {
      ClipResult c = clip_global(direction, *cfg.clip);
      rec.clipped = c.clipped;
      direction = std::move(c.grad);
      rec.grad_norm_post = vec::norm(direction);
    }
    nesterov_update(params.values, state, direction, lr, cfg.optimizer);

    log.steps.push_back(rec);
    log.summary.steps_completed = step;
    if (rec.clipped) ++log.summary.clipped_steps;
    if (observer && observer->on_step) observer->on_step(rec);

    if (!vec::all_finite(params.values)) {
      abort(step, "non-finite parameters after update");
      break;
    }

    const bool eval_now = step % cfg.eval_every == 0 || step == cfg.schedule.total_steps;
    if (val_obj && eval_now) {
      ValidationRecord v;
      v.step = step;
      try {
        v.val_loss = val_obj->loss(params.values, val_idx);
        v.val_acc = val_obj->accuracy(params.values, val_idx).value_or(std::nan(""));
      } catch (const NumericError& e) {
        abort(step, e.what());
        break;
      }
      log.validation.push_back(v);
      if (observer && observer->on_validation) observer->on_validation(v);
      if (!log.summary.best_val_acc || v.val_acc > *log.summary.best_val_acc) {
        log.summary.best_val_acc = v.val_acc;
        log.summary.best_step = step;
        if (keep_best) log.best_params = params;
      }
    }
  }

  if (!log.validation.empty()) {
    log.summary.final_val_acc = log.validation.back().val_acc;
    log.summary.final_val_loss = log.validation.back().val_loss;
  }
  const auto train_idx = all_indices(n);
  try {
    log.summary.final_train_loss = train_obj.loss(params.values, train_idx);
    log.summary.final_train_acc = train_obj.accuracy(params.values, train_idx);
  } catch (const NumericError&) {
    log.summary.final_train_loss = std::nan("");
  }
  if (cfg.snapshot_policy != SnapshotPolicy::best_validation || !log.best_params) {
    log.last_params = std::move(params);
  }
  return log;
}

RunLog train(const TrainConfig& cfg, const Dataset& train_ds, const Dataset* val_ds,
             const TrainObserver* observer) {
  const ModelSpec spec = resolve_model_spec(cfg, train_ds.dim, train_ds.classes);
  Mlp model(spec);
  auto borrowed = [](const Dataset& ds) {
    return std::shared_ptr<const Dataset>(&ds, [](const Dataset*) {});
  };
  MlpObjective train_obj(model, borrowed(train_ds), cfg.loss);
  std::unique_ptr<MlpObjective> val_obj;
  if (val_ds) val_obj = std::make_unique<MlpObjective>(model, borrowed(*val_ds), cfg.loss);
  return train(cfg, train_obj, val_obj.get(), model.init(), observer);
}

}  // namespace fblab
