#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "multimodn/matrix.hpp"
#include "multimodn/rng.hpp"

namespace mmn {

enum class Activation { kRelu, kSigmoid, kSoftmax, kIdentity };

std::string activation_name(Activation a);
Activation activation_from_name(const std::string& name);

/// Numerically stable softmax (max-subtraction). Output sums to 1.
std::vector<double> softmax(std::span<const double> logits);

enum class DropoutMode { kTrain, kEval };

/// Inverted-dropout plan: keep with probability 1-rate, scale kept units by
/// 1/(1-rate) so eval mode is an identity transform. The plan owns its mask
/// stream; reconstructing a plan from the same seed replays the masks.
class DropoutPlan {
 public:
  DropoutPlan() : DropoutPlan(0.0, DropoutMode::kEval, 0) {}
  DropoutPlan(double rate, DropoutMode mode, std::uint64_t seed);

  double rate() const { return rate_; }
  DropoutMode mode() const { return mode_; }
  bool active() const { return mode_ == DropoutMode::kTrain && rate_ > 0.0; }

  /// Draws a fresh mask; entries are 0 or 1/(1-rate).
  std::vector<double> draw_mask(std::size_t n);

  static DropoutPlan eval() { return DropoutPlan(); }

 private:
  double rate_;
  DropoutMode mode_;
  RandomStream stream_;
};

/// One fully connected layer: out = activation(W x + b), optionally followed
/// by inverted dropout in train mode.
struct DenseLayer {
  Matrix weights;            // out x in
  std::vector<double> bias;  // out
  Activation activation = Activation::kIdentity;

  DenseLayer() = default;
  DenseLayer(std::size_t out_dim, std::size_t in_dim, Activation act)
      : weights(out_dim, in_dim), bias(out_dim, 0.0), activation(act) {}

  std::size_t in_dim() const { return weights.cols(); }
  std::size_t out_dim() const { return weights.rows(); }
};

/// Everything dense_backward needs from the matching forward call.
struct DenseCache {
  std::vector<double> input;
  std::vector<double> pre_activation;
  std::vector<double> activation_output;  // before dropout
  std::vector<double> dropout_mask;       // empty when dropout inactive
};

struct LayerGrads {
  Matrix weights;  // same shape as layer.weights
  std::vector<double> bias;
};

/// Forward pass through one layer. `dropout` applies to this layer's output
/// (callers pass an eval plan for prediction/state-output layers).
std::vector<double> dense_forward(const DenseLayer& layer,
                                  std::span<const double> input,
                                  DropoutPlan& dropout, DenseCache& cache);

/// Chain-rule derivatives of the cached forward computation.
/// grad_output is d(loss)/d(layer output, post-dropout).
std::vector<double> dense_backward(const DenseLayer& layer,
                                   const DenseCache& cache,
                                   std::span<const double> grad_output,
                                   LayerGrads& grads);

/// Variant that takes d(loss)/d(pre-activation) directly; used by the
/// from-logits losses which fold the output activation into the loss.
std::vector<double> dense_backward_from_preactivation(
    const DenseLayer& layer, const DenseCache& cache,
    std::span<const double> grad_pre_activation, LayerGrads& grads);

/// The fixed stack used by every encoder/decoder: two hidden ReLU layers and
/// one output layer. Dropout applies to the hidden activations only.
struct MlpStack {
  std::vector<DenseLayer> layers;

  MlpStack() = default;
  MlpStack(std::size_t in_dim, std::size_t hidden_dim, std::size_t out_dim,
           Activation output_activation);

  std::size_t in_dim() const { return layers.front().in_dim(); }
  std::size_t out_dim() const { return layers.back().out_dim(); }
  std::size_t parameter_count() const;
};

struct StackCache {
  std::vector<DenseCache> layer_caches;
};

std::vector<double> stack_forward(const MlpStack& stack,
                                  std::span<const double> input,
                                  DropoutPlan& dropout, StackCache& cache);

/// Forward without cache (inference path).
std::vector<double> stack_forward(const MlpStack& stack,
                                  std::span<const double> input);

/// Returns the final layer's pre-activation (logits) alongside the cache;
/// used by the training losses.
std::vector<double> stack_forward_logits(const MlpStack& stack,
                                         std::span<const double> input,
                                         DropoutPlan& dropout,
                                         StackCache& cache);

/// Backward from d(loss)/d(stack output). `grads` must hold one LayerGrads
/// per layer, shapes matching; gradients are accumulated (+=).
std::vector<double> stack_backward(const MlpStack& stack,
                                   const StackCache& cache,
                                   std::span<const double> grad_output,
                                   std::span<LayerGrads> grads);

/// Backward from d(loss)/d(final pre-activation).
std::vector<double> stack_backward_from_logits(
    const MlpStack& stack, const StackCache& cache,
    std::span<const double> grad_logits, std::span<LayerGrads> grads);

}  // namespace mmn
