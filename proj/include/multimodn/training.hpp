#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "multimodn/data.hpp"
#include "multimodn/metrics.hpp"
#include "multimodn/model.hpp"
#include "multimodn/params.hpp"
#include "multimodn/pfusion.hpp"

namespace mmn {

struct LossOptions {
  bool include_step0 = true;
  // Ablation: apply task losses at the final state only instead of at every
  // recorded state.
  bool final_state_only = false;
  // Optional per-decoder loss weights; empty = all 1.
  std::vector<double> task_weights;
};

struct PairLoss {
  std::size_t step_index = 0;  // trajectory step
  std::size_t timestep = 0;
  std::size_t decoder_index = 0;
  double loss = 0.0;
};

struct SampleLoss {
  double total = 0.0;  // weighted mean over pairs
  std::vector<PairLoss> pairs;
};

/// Decoder losses at every recorded state (deep supervision), averaged over
/// the included (state, task) pairs. Steps whose target is not valid at
/// their timestep are excluded; the step-0 prior is included per options.
SampleLoss compute_sample_loss(const MultiModNModel& model,
                               const MultiModSample& sample,
                               const EncodingPlan& plan, DropoutPlan& dropout,
                               const LossOptions& options = {});

/// Mean sample loss over the batch with exact gradients, accumulating every
/// decoder's gradient at every state back through the encoder chain.
/// Skipped encoders receive zero parameter gradient. `order_rng`, when
/// given, shuffles the encoding order per sample (training-time order
/// randomization).
double compute_batch_grads(MultiModNModel& model, const Dataset& dataset,
                           std::span<const std::size_t> batch,
                           DropoutPlan& dropout, ParamGradients& grads,
                           const LossOptions& options = {},
                           RandomStream* order_rng = nullptr);

// ---------------------------------------------------------------------------
// Evaluation

struct EvalOptions {
  /// Timestep whose end-of-step state is decoded for per-timestep targets;
  /// default is the last timestep.
  std::optional<std::size_t> representative_timestep;
  /// Pool predictions over all valid timesteps instead (regression: pooled
  /// squared error; binary: mean probability as the score).
  bool average_over_timesteps = false;
  double threshold = 0.5;
};

/// Per-task AUROC + BAC (binary), macro AUROC/BAC (multiclass), MSE
/// (regression). Tasks whose metric is undefined on the slice (single
/// class) are reported absent.
MetricsReport evaluate(const MultiModNModel& model, const Dataset& dataset,
                       const EvalOptions& options = {});
MetricsReport evaluate_pfusion(const PFusionModel& model,
                               const Dataset& dataset,
                               const EvalOptions& options = {});

/// Scalar scores of one task over a dataset (probability / P(class 1) /
/// regression value), with the matching binary labels when the task is
/// binary. Used for cross-arm AUROC comparisons.
struct TaskScores {
  std::vector<double> scores;
  std::vector<int> labels;
  std::vector<double> targets;  // regression
};

TaskScores collect_scores(const MultiModNModel& model, const Dataset& dataset,
                          std::size_t decoder_index,
                          const EvalOptions& options = {});
TaskScores collect_scores_pfusion(const PFusionModel& model,
                                  const Dataset& dataset,
                                  const EvalOptions& options = {});

// ---------------------------------------------------------------------------
// Fit loop

struct BestMetricSpec {
  std::string task;    // empty = first decoder's task
  std::string metric = "auroc";  // auroc | bac | mse | loss

  bool higher_is_better() const { return metric == "auroc" || metric == "bac"; }
};

struct TrainingConfig {
  std::size_t epochs = 50;
  std::size_t batch_size = 64;
  double learning_rate = 1e-3;
  double clip_norm = 1.0;
  double dropout_rate = 0.1;
  std::size_t hidden_size = 32;
  std::size_t state_size = 20;
  BestMetricSpec best_model_metric;
  bool include_step0_loss = true;
  bool final_state_only = false;
  bool randomize_encoder_order = false;
  std::uint64_t seed = 7;
  EvalOptions eval;

  void validate() const;
};

struct EpochRecord {
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_metric = 0.0;
};

struct FitReport {
  std::vector<EpochRecord> epochs;
  /// state_metric_log[epoch][state_slot][task]: per-state validation metric
  /// (AUROC for classification, MSE for regression); NaN when undefined.
  std::vector<std::vector<std::vector<double>>> state_metric_log;
  std::vector<std::string> task_names;
  std::size_t best_epoch = 0;
  double best_metric_value = 0.0;
  double wall_seconds = 0.0;

  /// Deterministic content (excludes wall-clock).
  std::string to_json() const;
  std::string history_csv() const;       // one row per epoch
  std::string state_metrics_csv() const; // flattened, state-index column
};

/// Model-agnostic view of a trainable arm; used so MultiModN and the
/// P-Fusion baseline share one optimizer loop.
class TrainableModel {
 public:
  virtual ~TrainableModel() = default;
  virtual std::vector<TensorRef> parameters() = 0;
  virtual double batch_grads(const Dataset& dataset,
                             std::span<const std::size_t> batch,
                             DropoutPlan& dropout, RandomStream* order_rng,
                             ParamGradients& grads) = 0;
  virtual double mean_loss(const Dataset& dataset) = 0;  // eval mode
  virtual MetricsReport evaluate_on(const Dataset& dataset) = 0;
  /// Validation metrics at every state slot (prior + each scheduled encoder
  /// application); [slot][task].
  virtual std::vector<std::vector<double>> per_state_metrics(
      const Dataset& dataset) = 0;
  virtual std::vector<std::string> task_names() = 0;
  virtual std::vector<double> save_values() = 0;
  virtual void restore_values(const std::vector<double>& values) = 0;
};

class MultiModNTrainable : public TrainableModel {
 public:
  MultiModNTrainable(MultiModNModel& model, LossOptions loss_options,
                     EvalOptions eval_options);
  std::vector<TensorRef> parameters() override;
  double batch_grads(const Dataset& dataset,
                     std::span<const std::size_t> batch, DropoutPlan& dropout,
                     RandomStream* order_rng, ParamGradients& grads) override;
  double mean_loss(const Dataset& dataset) override;
  MetricsReport evaluate_on(const Dataset& dataset) override;
  std::vector<std::vector<double>> per_state_metrics(
      const Dataset& dataset) override;
  std::vector<std::string> task_names() override;
  std::vector<double> save_values() override;
  void restore_values(const std::vector<double>& values) override;

 private:
  MultiModNModel& model_;
  LossOptions loss_options_;
  EvalOptions eval_options_;
};

class PFusionTrainable : public TrainableModel {
 public:
  PFusionTrainable(PFusionModel& model, std::size_t task_index,
                   EvalOptions eval_options);
  std::vector<TensorRef> parameters() override;
  double batch_grads(const Dataset& dataset,
                     std::span<const std::size_t> batch, DropoutPlan& dropout,
                     RandomStream* order_rng, ParamGradients& grads) override;
  double mean_loss(const Dataset& dataset) override;
  MetricsReport evaluate_on(const Dataset& dataset) override;
  std::vector<std::vector<double>> per_state_metrics(
      const Dataset& dataset) override;
  std::vector<std::string> task_names() override;
  std::vector<double> save_values() override;
  void restore_values(const std::vector<double>& values) override;

 private:
  std::size_t eval_timestep(const Dataset& dataset) const;
  PFusionModel& model_;
  std::size_t task_index_;
  EvalOptions eval_options_;
};

/// Seeded minibatch Adam with global-norm clipping; retains the parameter
/// snapshot with the best validation metric and restores it at the end.
/// Aborts with NumericError on a NaN loss, naming the batch.
FitReport fit(TrainableModel& model, const Dataset& train, const Dataset& val,
              const TrainingConfig& config);

FitReport fit(MultiModNModel& model, const Dataset& train, const Dataset& val,
              const TrainingConfig& config);
FitReport fit(PFusionModel& model, std::size_t task_index,
              const Dataset& train, const Dataset& val,
              const TrainingConfig& config);

}  // namespace mmn
