#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "multimodn/data.hpp"
#include "multimodn/dense.hpp"
#include "multimodn/params.hpp"

namespace mmn {

/// Modality-specific encoder: maps concat(previous state, modality features)
/// to the next state through two hidden ReLU layers and a state-output layer.
struct Encoder {
  std::string modality_id;
  std::size_t input_dim = 0;
  MlpStack stack;
};

/// Task-specific decoder: maps any state to one task's prediction.
/// binary -> sigmoid scalar, multiclass(k) -> softmax simplex,
/// regression -> identity scalar.
struct Decoder {
  std::string task_id;
  TaskKind kind = TaskKind::kBinary;
  std::size_t classes = 2;  // multiclass only
  MlpStack stack;

  std::size_t output_dim() const {
    return kind == TaskKind::kMulticlass ? classes : 1;
  }
};

struct EncoderSpec {
  std::string modality_id;
  std::size_t input_dim = 0;
};

struct DecoderSpec {
  std::string task_id;
  TaskKind kind = TaskKind::kBinary;
  std::size_t classes = 2;
};

struct ArchitectureSpec {
  std::size_t state_size = 20;
  std::size_t hidden_size = 32;
  std::vector<EncoderSpec> encoders;
  std::vector<DecoderSpec> decoders;
  Activation state_activation = Activation::kRelu;
  bool train_initial_state = true;

  /// Encoders from the manifest's modalities, decoders from its tasks.
  static ArchitectureSpec from_manifest(const DatasetManifest& manifest,
                                        std::size_t state_size,
                                        std::size_t hidden_size);
  /// Same, but a single decoder for one task.
  static ArchitectureSpec from_manifest_single_task(
      const DatasetManifest& manifest, std::size_t task,
      std::size_t state_size, std::size_t hidden_size);
};

/// Sequential modular multimodal network: a trainable initial state, ordered
/// modality encoders that update it, and task decoders that can query any
/// intermediate state. Missing modalities are skipped, leaving the state
/// untouched and the encoder untrained.
class MultiModNModel {
 public:
  MultiModNModel() = default;

  const ArchitectureSpec& arch() const { return arch_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t state_size() const { return arch_.state_size; }
  const std::vector<double>& initial_state() const { return initial_state_; }
  std::vector<double>& initial_state() { return initial_state_; }
  const std::vector<Encoder>& encoders() const { return encoders_; }
  std::vector<Encoder>& encoders() { return encoders_; }
  const std::vector<Decoder>& decoders() const { return decoders_; }
  std::vector<Decoder>& decoders() { return decoders_; }

  std::size_t encoder_index(const std::string& modality_id) const;
  std::size_t decoder_index(const std::string& task_id) const;

  /// Trainable tensors in declaration order: initial state (unless frozen),
  /// then encoder layers, then decoder layers.
  std::vector<TensorRef> parameters();
  /// All tensors including a frozen initial state (serialization order).
  std::vector<TensorRef> all_tensors();

  std::size_t parameter_count();

  /// Snapshot/restore of all tensor values (best-model checkpointing).
  std::vector<double> save_values();
  void restore_values(const std::vector<double>& values);

  friend MultiModNModel init_model(const ArchitectureSpec& arch,
                                   std::uint64_t seed);

 private:
  ArchitectureSpec arch_;
  std::uint64_t seed_ = 0;
  std::vector<double> initial_state_;
  std::vector<Encoder> encoders_;
  std::vector<Decoder> decoders_;
};

/// Deterministic initialization: layer weights uniform in
/// +-sqrt(6/(fan_in+fan_out)), biases zero, initial state uniform(-0.1, 0.1).
MultiModNModel init_model(const ArchitectureSpec& arch, std::uint64_t seed);

/// One encoder application. Returns the updated state (same size).
std::vector<double> encode_step(const Encoder& encoder,
                                std::span<const double> state,
                                std::span<const double> x,
                                DropoutPlan& dropout);

/// One task prediction from a state. binary: {p}; multiclass: simplex;
/// regression: {value}.
struct Prediction {
  TaskKind kind = TaskKind::kBinary;
  std::vector<double> values;

  /// Scalar view: probability for binary, P(class 1) for multiclass, raw
  /// value for regression.
  double scalar() const;
};

Prediction decode(const Decoder& decoder, std::span<const double> state);

/// Which encoders to run per timestep, in order. Defaults to every encoder
/// in model order; a sample's encoding_sequence overrides it per timestep.
struct EncodingPlan {
  std::vector<std::size_t> encoder_order;

  static EncodingPlan full(const MultiModNModel& model);
  static EncodingPlan of_modalities(const MultiModNModel& model,
                                    const std::vector<std::string>& ids);
};

/// One recorded state: the initial entry (encoder_index empty) or the output
/// of an encoder application.
struct TrajectoryStep {
  std::size_t timestep = 0;
  std::optional<std::size_t> encoder_index;
  std::vector<double> state;
};

/// A modality that was scheduled but missing; the state passed through
/// unchanged and the encoder stays untrained.
struct SkipRecord {
  std::size_t timestep = 0;
  std::size_t encoder_index = 0;
};

struct StateTrajectory {
  std::vector<TrajectoryStep> steps;  // steps[0] is the initial state
  std::vector<SkipRecord> skips;

  const std::vector<double>& final_state() const {
    return steps.back().state;
  }
  /// Last recorded state at or before the end of `timestep`.
  const std::vector<double>& state_at_end_of(std::size_t timestep) const;
};

/// Per-encoded-step forward caches for backpropagation; parallel to
/// trajectory.steps[1..].
struct TrajectoryCaches {
  std::vector<StackCache> encoder_caches;
};

/// Runs the encoder sequence over all timesteps of a sample. The state
/// carries across timesteps; missing modalities are skipped and recorded.
StateTrajectory forward_sequence(const MultiModNModel& model,
                                 const MultiModSample& sample,
                                 const EncodingPlan& plan,
                                 DropoutPlan& dropout,
                                 TrajectoryCaches* caches = nullptr);

/// Every decoder applied to every recorded state.
/// grid[step][task] = prediction.
using PredictionGrid = std::vector<std::vector<Prediction>>;

PredictionGrid predict_trajectory(const MultiModNModel& model,
                                  const StateTrajectory& trajectory);

/// Inference-mode prediction from the final state of a sample.
std::vector<Prediction> predict_final(const MultiModNModel& model,
                                      const MultiModSample& sample);

}  // namespace mmn
