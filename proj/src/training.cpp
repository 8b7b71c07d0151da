#include "multimodn/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "multimodn/errors.hpp"
#include "multimodn/losses.hpp"
#include "multimodn/rng.hpp"

namespace mmn {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// decoder index -> dataset task index, matched by task id.
std::vector<std::size_t> decoder_task_map(const MultiModNModel& model,
                                          const DatasetManifest& manifest) {
  std::vector<std::size_t> map;
  map.reserve(model.decoders().size());
  for (const auto& d : model.decoders()) {
    map.push_back(manifest.task_index(d.task_id));
  }
  return map;
}

double pair_weight(const LossOptions& options, std::size_t decoder_index) {
  if (options.task_weights.empty()) return 1.0;
  return options.task_weights.at(decoder_index);
}

bool pair_included(const LossOptions& options, std::size_t step_index,
                   std::size_t n_steps) {
  if (options.final_state_only) return step_index + 1 == n_steps;
  if (step_index == 0) return options.include_step0;
  return true;
}

}  // namespace

SampleLoss compute_sample_loss(const MultiModNModel& model,
                               const MultiModSample& sample,
                               const EncodingPlan& plan, DropoutPlan& dropout,
                               const LossOptions& options) {
  const StateTrajectory traj = forward_sequence(model, sample, plan, dropout);

  SampleLoss out;
  double weight_sum = 0.0;
  double weighted_loss = 0.0;
  for (std::size_t p = 0; p < traj.steps.size(); ++p) {
    if (!pair_included(options, p, traj.steps.size())) continue;
    const std::size_t t = traj.steps[p].timestep;
    for (std::size_t k = 0; k < model.decoders().size(); ++k) {
      const Decoder& decoder = model.decoders()[k];
      const TargetValue& target = sample.targets.at(k);
      if (!target.valid_at(t)) continue;
      StackCache cache;
      const std::vector<double> logits = stack_forward_logits(
          decoder.stack, traj.steps[p].state, dropout, cache);
      const TaskLoss tl =
          task_loss_from_logits(decoder.kind, logits, target.at_timestep(t));
      out.pairs.push_back({p, t, k, tl.loss});
      const double w = pair_weight(options, k);
      weighted_loss += w * tl.loss;
      weight_sum += w;
    }
  }
  if (out.pairs.empty()) {
    throw ContractError("no valid (state, task) pair for sample");
  }
  out.total = weighted_loss / weight_sum;
  return out;
}

namespace {

struct StackGradWorkspace {
  std::vector<LayerGrads> layers;

  explicit StackGradWorkspace(const MlpStack& stack) {
    for (const auto& l : stack.layers) {
      layers.push_back({Matrix(l.out_dim(), l.in_dim()),
                        std::vector<double>(l.out_dim(), 0.0)});
    }
  }
  void zero() {
    for (auto& lg : layers) {
      std::fill(lg.weights.values().begin(), lg.weights.values().end(), 0.0);
      std::fill(lg.bias.begin(), lg.bias.end(), 0.0);
    }
  }
};

void add_into_slot(ParamGradients& grads, std::size_t& slot,
                   const std::vector<double>& values) {
  auto& dest = grads.slot(slot++);
  for (std::size_t i = 0; i < values.size(); ++i) dest[i] += values[i];
}

// Caution: compute_sample_loss above is the reference forward; this
// training path must stay loss-identical to it (covered by tests).
struct SampleBackwardContext {
  const MultiModNModel& model;
  const std::vector<std::size_t>& task_map;
  const LossOptions& options;
  std::vector<StackGradWorkspace>& encoder_grads;
  std::vector<StackGradWorkspace>& decoder_grads;
  std::vector<double>& initial_state_grad;
};

double sample_loss_and_backward(SampleBackwardContext& ctx,
                                const MultiModSample& sample,
                                const EncodingPlan& plan,
                                DropoutPlan& dropout) {
  const MultiModNModel& model = ctx.model;
  TrajectoryCaches caches;
  const StateTrajectory traj =
      forward_sequence(model, sample, plan, dropout, &caches);

  struct DecodedPair {
    std::size_t step;
    std::size_t decoder;
    StackCache cache;
    TaskLoss loss;
  };
  std::vector<DecodedPair> pairs;
  double weight_sum = 0.0;
  double weighted_loss = 0.0;
  for (std::size_t p = 0; p < traj.steps.size(); ++p) {
    if (!pair_included(ctx.options, p, traj.steps.size())) continue;
    const std::size_t t = traj.steps[p].timestep;
    for (std::size_t k = 0; k < model.decoders().size(); ++k) {
      const Decoder& decoder = model.decoders()[k];
      const TargetValue& target = sample.targets.at(ctx.task_map[k]);
      if (!target.valid_at(t)) continue;
      DecodedPair pair;
      pair.step = p;
      pair.decoder = k;
      const std::vector<double> logits = stack_forward_logits(
          decoder.stack, traj.steps[p].state, dropout, pair.cache);
      pair.loss =
          task_loss_from_logits(decoder.kind, logits, target.at_timestep(t));
      weighted_loss += pair_weight(ctx.options, k) * pair.loss.loss;
      weight_sum += pair_weight(ctx.options, k);
      pairs.push_back(std::move(pair));
    }
  }
  if (pairs.empty()) {
    throw ContractError("no valid (state, task) pair for sample");
  }

  // d(sample loss)/d(state) accumulators per trajectory step.
  std::vector<std::vector<double>> state_grads(
      traj.steps.size(), std::vector<double>(model.state_size(), 0.0));
  for (auto& pair : pairs) {
    const double coeff = pair_weight(ctx.options, pair.decoder) / weight_sum;
    std::vector<double> scaled = pair.loss.grad_logits;
    for (double& g : scaled) g *= coeff;
    const std::vector<double> grad_state = stack_backward_from_logits(
        model.decoders()[pair.decoder].stack, pair.cache, scaled,
        ctx.decoder_grads[pair.decoder].layers);
    for (std::size_t i = 0; i < grad_state.size(); ++i) {
      state_grads[pair.step][i] += grad_state[i];
    }
  }

  // Back through the encoder chain; skipped steps are not recorded, so the
  // identity pass-through of a skip needs no special casing here.
  for (std::size_t p = traj.steps.size(); p-- > 1;) {
    const std::size_t idx = *traj.steps[p].encoder_index;
    const std::vector<double> grad_joint =
        stack_backward(model.encoders()[idx].stack,
                       caches.encoder_caches[p - 1], state_grads[p],
                       ctx.encoder_grads[idx].layers);
    for (std::size_t i = 0; i < model.state_size(); ++i) {
      state_grads[p - 1][i] += grad_joint[i];
    }
  }
  for (std::size_t i = 0; i < model.state_size(); ++i) {
    ctx.initial_state_grad[i] += state_grads[0][i];
  }
  return weighted_loss / weight_sum;
}

}  // namespace

double compute_batch_grads(MultiModNModel& model, const Dataset& dataset,
                           std::span<const std::size_t> batch,
                           DropoutPlan& dropout, ParamGradients& grads,
                           const LossOptions& options,
                           RandomStream* order_rng) {
  if (batch.empty()) throw ContractError("compute_batch_grads: empty batch");
  if (!grads.shapes_match(model.parameters())) {
    grads = ParamGradients::zeros_like(model.parameters());
  } else {
    grads.zero();
  }

  const std::vector<std::size_t> task_map =
      decoder_task_map(model, dataset.manifest);
  std::vector<StackGradWorkspace> encoder_grads;
  for (const auto& e : model.encoders()) {
    encoder_grads.emplace_back(e.stack);
  }
  std::vector<StackGradWorkspace> decoder_grads;
  for (const auto& d : model.decoders()) {
    decoder_grads.emplace_back(d.stack);
  }
  std::vector<double> initial_state_grad(model.state_size(), 0.0);

  SampleBackwardContext ctx{model,         task_map,      options,
                            encoder_grads, decoder_grads, initial_state_grad};

  const EncodingPlan base_plan = EncodingPlan::full(model);
  double total = 0.0;
  for (std::size_t i : batch) {
    EncodingPlan plan = base_plan;
    if (order_rng != nullptr) order_rng->shuffle(plan.encoder_order);
    total += sample_loss_and_backward(ctx, dataset.samples.at(i), plan,
                                      dropout);
  }

  // Flatten into the slot order of model.parameters().
  std::size_t slot = 0;
  if (model.arch().train_initial_state) {
    add_into_slot(grads, slot, initial_state_grad);
  }
  for (std::size_t e = 0; e < model.encoders().size(); ++e) {
    for (auto& lg : encoder_grads[e].layers) {
      add_into_slot(grads, slot, lg.weights.values());
      add_into_slot(grads, slot, lg.bias);
    }
  }
  for (std::size_t d = 0; d < model.decoders().size(); ++d) {
    for (auto& lg : decoder_grads[d].layers) {
      add_into_slot(grads, slot, lg.weights.values());
      add_into_slot(grads, slot, lg.bias);
    }
  }
  grads.scale(1.0 / static_cast<double>(batch.size()));
  return total / static_cast<double>(batch.size());
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

struct TaskPredictionSet {
  TaskKind kind = TaskKind::kBinary;
  std::size_t classes = 2;
  std::vector<double> scalars;
  std::vector<std::vector<double>> probs;  // multiclass
  std::vector<int> labels;
  std::vector<double> targets;
};

std::size_t rep_timestep(const EvalOptions& options, std::size_t timesteps) {
  const std::size_t last = timesteps == 0 ? 0 : timesteps - 1;
  if (!options.representative_timestep.has_value()) return last;
  if (*options.representative_timestep >= timesteps) {
    throw ContractError("representative timestep out of range");
  }
  return *options.representative_timestep;
}

/// Collects one task's predictions over a dataset given a state/prediction
/// callback: predict(sample, timestep) -> Prediction.
template <typename PredictFn>
TaskPredictionSet collect_task_predictions(const Dataset& dataset,
                                           std::size_t task_index,
                                           TaskKind kind, std::size_t classes,
                                           const EvalOptions& options,
                                           PredictFn&& predict) {
  TaskPredictionSet set;
  set.kind = kind;
  set.classes = classes;
  for (const auto& sample : dataset.samples) {
    const TargetValue& target = sample.targets.at(task_index);
    const std::size_t timesteps = sample.data.size();
    if (options.average_over_timesteps && target.per_timestep) {
      if (kind == TaskKind::kRegression) {
        // Pool per-timestep squared errors.
        for (std::size_t t = 0; t < timesteps; ++t) {
          if (!target.valid_at(t)) continue;
          set.scalars.push_back(predict(sample, t).scalar());
          set.targets.push_back(target.at_timestep(t));
        }
      } else {
        double acc = 0.0;
        std::size_t n = 0;
        std::size_t last_valid = 0;
        for (std::size_t t = 0; t < timesteps; ++t) {
          if (!target.valid_at(t)) continue;
          acc += predict(sample, t).scalar();
          last_valid = t;
          ++n;
        }
        if (n == 0) continue;
        set.scalars.push_back(acc / static_cast<double>(n));
        set.labels.push_back(
            static_cast<int>(std::lround(target.at_timestep(last_valid))));
      }
      continue;
    }
    const std::size_t rt = rep_timestep(options, timesteps);
    if (!target.valid_at(rt)) continue;
    const Prediction p = predict(sample, rt);
    set.scalars.push_back(p.scalar());
    if (kind == TaskKind::kRegression) {
      set.targets.push_back(target.at_timestep(rt));
    } else {
      set.labels.push_back(
          static_cast<int>(std::lround(target.at_timestep(rt))));
      if (kind == TaskKind::kMulticlass) set.probs.push_back(p.values);
    }
  }
  return set;
}

void report_task_metrics(MetricsReport& report, const std::string& task_name,
                         const TaskPredictionSet& set,
                         const EvalOptions& options) {
  switch (set.kind) {
    case TaskKind::kBinary: {
      try {
        report.set(task_name, "auroc", auroc(set.scalars, set.labels));
      } catch (const UndefinedMetricError&) {
        // single-class slice: reported absent, not 0.5
      }
      std::vector<int> hard(set.scalars.size());
      for (std::size_t i = 0; i < hard.size(); ++i) {
        hard[i] = set.scalars[i] >= options.threshold ? 1 : 0;
      }
      try {
        report.set(task_name, "bac", balanced_accuracy(hard, set.labels));
      } catch (const UndefinedMetricError&) {
      }
      break;
    }
    case TaskKind::kMulticlass: {
      std::vector<double> per_class_auroc;
      bool defined = true;
      for (std::size_t c = 0; c < set.classes && defined; ++c) {
        std::vector<double> scores;
        std::vector<int> ovr;
        for (std::size_t i = 0; i < set.probs.size(); ++i) {
          scores.push_back(set.probs[i][c]);
          ovr.push_back(set.labels[i] == static_cast<int>(c) ? 1 : 0);
        }
        try {
          per_class_auroc.push_back(auroc(scores, ovr));
        } catch (const UndefinedMetricError&) {
          defined = false;
        }
      }
      if (defined && !per_class_auroc.empty()) {
        report.set(task_name, "auroc", macro_over_tasks(per_class_auroc));
      }
      std::vector<int> argmax(set.probs.size());
      for (std::size_t i = 0; i < set.probs.size(); ++i) {
        argmax[i] = static_cast<int>(
            std::max_element(set.probs[i].begin(), set.probs[i].end()) -
            set.probs[i].begin());
      }
      try {
        report.set(task_name, "bac",
                   balanced_accuracy_multiclass(argmax, set.labels,
                                                set.classes));
      } catch (const UndefinedMetricError&) {
      }
      break;
    }
    case TaskKind::kRegression:
      if (!set.scalars.empty()) {
        report.set(task_name, "mse", mse(set.scalars, set.targets));
      }
      break;
  }
}

}  // namespace

MetricsReport evaluate(const MultiModNModel& model, const Dataset& dataset,
                       const EvalOptions& options) {
  MetricsReport report;
  const std::vector<std::size_t> task_map =
      decoder_task_map(model, dataset.manifest);
  const EncodingPlan plan = EncodingPlan::full(model);
  for (std::size_t k = 0; k < model.decoders().size(); ++k) {
    const Decoder& decoder = model.decoders()[k];
    auto predict = [&](const MultiModSample& sample, std::size_t t) {
      DropoutPlan eval_mode = DropoutPlan::eval();
      const StateTrajectory traj =
          forward_sequence(model, sample, plan, eval_mode);
      return decode(decoder, traj.state_at_end_of(t));
    };
    const TaskPredictionSet set = collect_task_predictions(
        dataset, task_map[k], decoder.kind, decoder.classes, options, predict);
    report_task_metrics(report, decoder.task_id, set, options);
  }
  return report;
}

MetricsReport evaluate_pfusion(const PFusionModel& model,
                               const Dataset& dataset,
                               const EvalOptions& options) {
  MetricsReport report;
  const std::size_t task_index =
      dataset.manifest.task_index(model.task().task_id);
  auto predict = [&](const MultiModSample& sample, std::size_t t) {
    return pfusion_forward(model, sample, t);
  };
  const TaskPredictionSet set = collect_task_predictions(
      dataset, task_index, model.task().kind, model.task().classes, options,
      predict);
  report_task_metrics(report, model.task().task_id, set, options);
  return report;
}

TaskScores collect_scores(const MultiModNModel& model, const Dataset& dataset,
                          std::size_t decoder_index,
                          const EvalOptions& options) {
  const Decoder& decoder = model.decoders().at(decoder_index);
  const std::size_t task_index =
      dataset.manifest.task_index(decoder.task_id);
  const EncodingPlan plan = EncodingPlan::full(model);
  auto predict = [&](const MultiModSample& sample, std::size_t t) {
    DropoutPlan eval_mode = DropoutPlan::eval();
    const StateTrajectory traj =
        forward_sequence(model, sample, plan, eval_mode);
    return decode(decoder, traj.state_at_end_of(t));
  };
  const TaskPredictionSet set = collect_task_predictions(
      dataset, task_index, decoder.kind, decoder.classes, options, predict);
  return {set.scalars, set.labels, set.targets};
}

TaskScores collect_scores_pfusion(const PFusionModel& model,
                                  const Dataset& dataset,
                                  const EvalOptions& options) {
  const std::size_t task_index =
      dataset.manifest.task_index(model.task().task_id);
  auto predict = [&](const MultiModSample& sample, std::size_t t) {
    return pfusion_forward(model, sample, t);
  };
  const TaskPredictionSet set = collect_task_predictions(
      dataset, task_index, model.task().kind, model.task().classes, options,
      predict);
  return {set.scalars, set.labels, set.targets};
}

// ---------------------------------------------------------------------------
// Per-state metric log

namespace {

/// Predictions at every state slot of the canonical schedule: slot 0 is the
/// prior, then one slot per (timestep, scheduled encoder). A skipped
/// modality leaves the state unchanged but still owns its slot, so slots
/// align across samples with different presence patterns.
std::vector<std::vector<Prediction>> slot_predictions(
    const MultiModNModel& model, const MultiModSample& sample) {
  std::vector<std::vector<Prediction>> out;
  std::vector<double> state = model.initial_state();
  DropoutPlan eval_mode = DropoutPlan::eval();
  auto decode_all = [&](const std::vector<double>& s) {
    std::vector<Prediction> row;
    for (const auto& d : model.decoders()) row.push_back(decode(d, s));
    return row;
  };
  out.push_back(decode_all(state));
  for (std::size_t t = 0; t < sample.data.size(); ++t) {
    for (std::size_t m = 0; m < model.encoders().size(); ++m) {
      if (sample.modality_present(t, m)) {
        state = encode_step(model.encoders()[m], state, *sample.data[t][m],
                            eval_mode);
      }
      out.push_back(decode_all(state));
    }
  }
  return out;
}

std::vector<std::vector<double>> per_state_metrics_multimodn(
    const MultiModNModel& model, const Dataset& dataset,
    const std::vector<std::size_t>& task_map) {
  const std::size_t slots =
      1 + dataset.manifest.timesteps * model.encoders().size();
  const std::size_t n_tasks = model.decoders().size();
  // scores[slot][task][sample]
  std::vector<std::vector<std::vector<double>>> scores(
      slots, std::vector<std::vector<double>>(n_tasks));
  std::vector<std::vector<std::vector<int>>> labels(
      slots, std::vector<std::vector<int>>(n_tasks));
  std::vector<std::vector<std::vector<double>>> targets(
      slots, std::vector<std::vector<double>>(n_tasks));

  for (const auto& sample : dataset.samples) {
    const auto preds = slot_predictions(model, sample);
    for (std::size_t slot = 0; slot < preds.size() && slot < slots; ++slot) {
      const std::size_t t =
          slot == 0 ? 0 : (slot - 1) / model.encoders().size();
      for (std::size_t k = 0; k < n_tasks; ++k) {
        const TargetValue& target = sample.targets.at(task_map[k]);
        if (!target.valid_at(t)) continue;
        scores[slot][k].push_back(preds[slot][k].scalar());
        if (model.decoders()[k].kind == TaskKind::kRegression) {
          targets[slot][k].push_back(target.at_timestep(t));
        } else {
          labels[slot][k].push_back(
              static_cast<int>(std::lround(target.at_timestep(t))));
        }
      }
    }
  }

  std::vector<std::vector<double>> grid(slots,
                                        std::vector<double>(n_tasks, kNaN));
  for (std::size_t slot = 0; slot < slots; ++slot) {
    for (std::size_t k = 0; k < n_tasks; ++k) {
      if (scores[slot][k].empty()) continue;
      try {
        if (model.decoders()[k].kind == TaskKind::kRegression) {
          grid[slot][k] = mse(scores[slot][k], targets[slot][k]);
        } else {
          grid[slot][k] = auroc(scores[slot][k], labels[slot][k]);
        }
      } catch (const UndefinedMetricError&) {
      }
    }
  }
  return grid;
}

}  // namespace

// ---------------------------------------------------------------------------
// Trainable adapters

MultiModNTrainable::MultiModNTrainable(MultiModNModel& model,
                                       LossOptions loss_options,
                                       EvalOptions eval_options)
    : model_(model),
      loss_options_(std::move(loss_options)),
      eval_options_(eval_options) {}

std::vector<TensorRef> MultiModNTrainable::parameters() {
  return model_.parameters();
}

double MultiModNTrainable::batch_grads(const Dataset& dataset,
                                       std::span<const std::size_t> batch,
                                       DropoutPlan& dropout,
                                       RandomStream* order_rng,
                                       ParamGradients& grads) {
  return compute_batch_grads(model_, dataset, batch, dropout, grads,
                             loss_options_, order_rng);
}

double MultiModNTrainable::mean_loss(const Dataset& dataset) {
  DropoutPlan eval_mode = DropoutPlan::eval();
  const EncodingPlan plan = EncodingPlan::full(model_);
  const std::vector<std::size_t> task_map =
      decoder_task_map(model_, dataset.manifest);
  // compute_sample_loss indexes targets by decoder order; remap applies only
  // when the model predicts a task subset.
  double total = 0.0;
  for (const auto& sample : dataset.samples) {
    MultiModSample view = sample;
    std::vector<TargetValue> remapped;
    for (std::size_t k = 0; k < task_map.size(); ++k) {
      remapped.push_back(sample.targets.at(task_map[k]));
    }
    view.targets = std::move(remapped);
    total +=
        compute_sample_loss(model_, view, plan, eval_mode, loss_options_)
            .total;
  }
  return total / static_cast<double>(dataset.size());
}

MetricsReport MultiModNTrainable::evaluate_on(const Dataset& dataset) {
  return evaluate(model_, dataset, eval_options_);
}

std::vector<std::vector<double>> MultiModNTrainable::per_state_metrics(
    const Dataset& dataset) {
  return per_state_metrics_multimodn(
      model_, dataset, decoder_task_map(model_, dataset.manifest));
}

std::vector<std::string> MultiModNTrainable::task_names() {
  std::vector<std::string> names;
  for (const auto& d : model_.decoders()) names.push_back(d.task_id);
  return names;
}

std::vector<double> MultiModNTrainable::save_values() {
  return model_.save_values();
}

void MultiModNTrainable::restore_values(const std::vector<double>& values) {
  model_.restore_values(values);
}

PFusionTrainable::PFusionTrainable(PFusionModel& model,
                                   std::size_t task_index,
                                   EvalOptions eval_options)
    : model_(model), task_index_(task_index), eval_options_(eval_options) {}

std::size_t PFusionTrainable::eval_timestep(const Dataset& dataset) const {
  return rep_timestep(eval_options_, dataset.manifest.timesteps);
}

std::vector<TensorRef> PFusionTrainable::parameters() {
  return model_.parameters();
}

double PFusionTrainable::batch_grads(const Dataset& dataset,
                                     std::span<const std::size_t> batch,
                                     DropoutPlan& dropout, RandomStream*,
                                     ParamGradients& grads) {
  if (!grads.shapes_match(model_.parameters())) {
    grads = ParamGradients::zeros_like(model_.parameters());
  }
  return pfusion_loss_and_grads(model_, dataset, batch, task_index_,
                                eval_timestep(dataset), dropout, grads);
}

double PFusionTrainable::mean_loss(const Dataset& dataset) {
  DropoutPlan eval_mode = DropoutPlan::eval();
  const std::size_t t = eval_timestep(dataset);
  double total = 0.0;
  std::size_t counted = 0;
  for (const auto& sample : dataset.samples) {
    const TargetValue& target = sample.targets.at(task_index_);
    if (!target.valid_at(t)) continue;
    StackCache cache;
    const std::vector<double> logits =
        stack_forward_logits(model_.decoder_stack(),
                             pfusion_concat(model_, sample, t), eval_mode,
                             cache);
    total += task_loss_from_logits(model_.task().kind, logits,
                                   target.at_timestep(t))
                 .loss;
    ++counted;
  }
  if (counted == 0) throw ContractError("pfusion: no valid targets");
  return total / static_cast<double>(counted);
}

MetricsReport PFusionTrainable::evaluate_on(const Dataset& dataset) {
  return evaluate_pfusion(model_, dataset, eval_options_);
}

std::vector<std::vector<double>> PFusionTrainable::per_state_metrics(
    const Dataset& dataset) {
  const MetricsReport report = evaluate_on(dataset);
  const std::string& task = model_.task().task_id;
  const std::string metric =
      model_.task().kind == TaskKind::kRegression ? "mse" : "auroc";
  std::vector<std::vector<double>> grid(1, std::vector<double>(1, kNaN));
  if (report.has(task, metric)) grid[0][0] = report.at(task, metric).estimate;
  return grid;
}

std::vector<std::string> PFusionTrainable::task_names() {
  return {model_.task().task_id};
}

std::vector<double> PFusionTrainable::save_values() {
  return model_.save_values();
}

void PFusionTrainable::restore_values(const std::vector<double>& values) {
  model_.restore_values(values);
}

// ---------------------------------------------------------------------------
// Fit

void TrainingConfig::validate() const {
  if (epochs == 0) throw ContractError("epochs must be >= 1");
  if (batch_size == 0) throw ContractError("batch_size must be >= 1");
  if (state_size == 0 || hidden_size == 0) {
    throw ContractError("state/hidden sizes must be >= 1");
  }
  if (dropout_rate < 0.0 || dropout_rate >= 1.0) {
    throw ContractError("dropout rate must be in [0,1)");
  }
  if (clip_norm <= 0.0) throw ContractError("clip_norm must be positive");
  if (learning_rate < 0.0) {
    throw ContractError("learning_rate must be >= 0");
  }
}

namespace {

double metric_from_report(const MetricsReport& report,
                          const BestMetricSpec& spec, const std::string& task,
                          double val_loss) {
  if (spec.metric == "loss") return val_loss;
  if (!report.has(task, spec.metric)) return kNaN;
  return report.at(task, spec.metric).estimate;
}

bool is_better(double candidate, double best, bool higher_better) {
  if (std::isnan(candidate)) return false;
  if (std::isnan(best)) return true;
  return higher_better ? candidate > best : candidate < best;
}

}  // namespace

FitReport fit(TrainableModel& model, const Dataset& train, const Dataset& val,
              const TrainingConfig& config) {
  config.validate();
  if (train.size() == 0 || val.size() == 0) {
    throw ContractError("fit: empty train or val set");
  }
  const auto t_start = std::chrono::steady_clock::now();

  std::vector<TensorRef> params = model.parameters();
  ParamGradients grads = ParamGradients::zeros_like(params);
  AdamState adam = AdamState::init(params, config.learning_rate);

  RandomStream shuffle_rng(derive_seed(config.seed, 0xF17));
  DropoutPlan dropout(config.dropout_rate, DropoutMode::kTrain,
                      derive_seed(config.seed, 0xD20));
  RandomStream order_rng(derive_seed(config.seed, 0x0DD));
  RandomStream* order = config.randomize_encoder_order ? &order_rng : nullptr;

  const std::vector<std::string> tasks = model.task_names();
  const std::string best_task =
      config.best_model_metric.task.empty() ? tasks.front()
                                            : config.best_model_metric.task;
  const bool higher_better = config.best_model_metric.higher_is_better();

  std::vector<std::size_t> indices(train.size());
  std::iota(indices.begin(), indices.end(), 0);

  FitReport report;
  report.task_names = tasks;
  double best_value = kNaN;
  std::vector<double> best_snapshot = model.save_values();
  std::size_t best_epoch = 0;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle_rng.shuffle(indices);
    double loss_sum = 0.0;
    std::size_t seen = 0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < indices.size();
         start += config.batch_size, ++batch_index) {
      const std::size_t len =
          std::min(config.batch_size, indices.size() - start);
      const std::span<const std::size_t> batch(indices.data() + start, len);
      const double loss =
          model.batch_grads(train, batch, dropout, order, grads);
      if (!std::isfinite(loss)) {
        throw NumericError("NaN loss at epoch " + std::to_string(epoch) +
                           ", batch " + std::to_string(batch_index));
      }
      grads = clip_by_global_norm(std::move(grads), config.clip_norm);
      adam_step(params, grads, adam);
      loss_sum += loss * static_cast<double>(len);
      seen += len;
    }

    EpochRecord rec;
    rec.train_loss = loss_sum / static_cast<double>(seen);
    rec.val_loss = model.mean_loss(val);
    const MetricsReport val_report = model.evaluate_on(val);
    rec.val_metric = metric_from_report(val_report, config.best_model_metric,
                                        best_task, rec.val_loss);
    report.epochs.push_back(rec);
    report.state_metric_log.push_back(model.per_state_metrics(val));

    if (is_better(rec.val_metric, best_value, higher_better)) {
      best_value = rec.val_metric;
      best_epoch = epoch;
      best_snapshot = model.save_values();
    }
  }

  model.restore_values(best_snapshot);
  report.best_epoch = best_epoch;
  report.best_metric_value = best_value;
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  return report;
}

FitReport fit(MultiModNModel& model, const Dataset& train, const Dataset& val,
              const TrainingConfig& config) {
  LossOptions loss_options;
  loss_options.include_step0 = config.include_step0_loss;
  loss_options.final_state_only = config.final_state_only;
  MultiModNTrainable adapter(model, loss_options, config.eval);
  return fit(adapter, train, val, config);
}

FitReport fit(PFusionModel& model, std::size_t task_index,
              const Dataset& train, const Dataset& val,
              const TrainingConfig& config) {
  PFusionTrainable adapter(model, task_index, config.eval);
  return fit(adapter, train, val, config);
}

// ---------------------------------------------------------------------------
// FitReport export

std::string FitReport::to_json() const {
  nlohmann::ordered_json j;
  j["task_names"] = task_names;
  j["best_epoch"] = best_epoch;
  j["best_metric_value"] = best_metric_value;
  j["epochs"] = nlohmann::ordered_json::array();
  for (const auto& e : epochs) {
    j["epochs"].push_back({{"train_loss", e.train_loss},
                           {"val_loss", e.val_loss},
                           {"val_metric", e.val_metric}});
  }
  j["state_metric_log"] = nlohmann::ordered_json::array();
  for (const auto& per_epoch : state_metric_log) {
    nlohmann::ordered_json je = nlohmann::ordered_json::array();
    for (const auto& row : per_epoch) {
      nlohmann::ordered_json jr = nlohmann::ordered_json::array();
      for (double v : row) {
        if (std::isnan(v)) {
          jr.push_back(nullptr);
        } else {
          jr.push_back(v);
        }
      }
      je.push_back(jr);
    }
    j["state_metric_log"].push_back(je);
  }
  return j.dump(2);
}

std::string FitReport::history_csv() const {
  std::ostringstream out;
  out << "epoch,train_loss,val_loss,val_metric\n";
  for (std::size_t e = 0; e < epochs.size(); ++e) {
    out << e << "," << epochs[e].train_loss << "," << epochs[e].val_loss
        << "," << epochs[e].val_metric << "\n";
  }
  return out.str();
}

std::string FitReport::state_metrics_csv() const {
  std::ostringstream out;
  out << "epoch,state_index";
  for (const auto& t : task_names) out << "," << t;
  out << "\n";
  for (std::size_t e = 0; e < state_metric_log.size(); ++e) {
    for (std::size_t s = 0; s < state_metric_log[e].size(); ++s) {
      out << e << "," << s;
      for (double v : state_metric_log[e][s]) {
        out << ",";
        if (!std::isnan(v)) out << v;
      }
      out << "\n";
    }
  }
  return out.str();
}

}  // namespace mmn
