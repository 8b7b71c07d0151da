#include "multimodn/dense.hpp"

#include <algorithm>
#include <cmath>

#include "multimodn/errors.hpp"

namespace mmn {

std::string activation_name(Activation a) {
  switch (a) {
    case Activation::kRelu: return "relu";
    case Activation::kSigmoid: return "sigmoid";
    case Activation::kSoftmax: return "softmax";
    case Activation::kIdentity: return "identity";
  }
  return "?";
}

Activation activation_from_name(const std::string& name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "sigmoid") return Activation::kSigmoid;
  if (name == "softmax") return Activation::kSoftmax;
  if (name == "identity") return Activation::kIdentity;
  throw FormatError("unknown activation: " + name);
}

std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) throw ContractError("softmax: empty input");
  const double max = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - max);
    sum += out[i];
  }
  for (double& x : out) x /= sum;
  return out;
}

DropoutPlan::DropoutPlan(double rate, DropoutMode mode, std::uint64_t seed)
    : rate_(rate), mode_(mode), stream_(seed) {
  if (rate < 0.0 || rate >= 1.0) {
    throw ContractError("dropout rate must be in [0,1), got " +
                        std::to_string(rate));
  }
}

std::vector<double> DropoutPlan::draw_mask(std::size_t n) {
  std::vector<double> mask(n);
  const double keep_scale = 1.0 / (1.0 - rate_);
  for (std::size_t i = 0; i < n; ++i) {
    mask[i] = stream_.uniform() < rate_ ? 0.0 : keep_scale;
  }
  return mask;
}

namespace {

void apply_activation(Activation act, std::vector<double>& v) {
  switch (act) {
    case Activation::kRelu:
      for (double& x : v) x = x > 0.0 ? x : 0.0;
      break;
    case Activation::kSigmoid:
      for (double& x : v) x = 1.0 / (1.0 + std::exp(-x));
      break;
    case Activation::kSoftmax:
      v = softmax(v);
      break;
    case Activation::kIdentity:
      break;
  }
}

// d(loss)/d(pre-activation) from d(loss)/d(activation output).
std::vector<double> activation_backward(Activation act,
                                        const DenseCache& cache,
                                        std::span<const double> grad_act) {
  std::vector<double> grad_pre(grad_act.begin(), grad_act.end());
  switch (act) {
    case Activation::kRelu:
      for (std::size_t i = 0; i < grad_pre.size(); ++i) {
        if (cache.pre_activation[i] <= 0.0) grad_pre[i] = 0.0;
      }
      break;
    case Activation::kSigmoid:
      for (std::size_t i = 0; i < grad_pre.size(); ++i) {
        const double a = cache.activation_output[i];
        grad_pre[i] *= a * (1.0 - a);
      }
      break;
    case Activation::kSoftmax: {
      const auto& a = cache.activation_output;
      const double g_dot_a = dot(grad_act, a);
      for (std::size_t i = 0; i < grad_pre.size(); ++i) {
        grad_pre[i] = a[i] * (grad_act[i] - g_dot_a);
      }
      break;
    }
    case Activation::kIdentity:
      break;
  }
  return grad_pre;
}

}  // namespace

std::vector<double> dense_forward(const DenseLayer& layer,
                                  std::span<const double> input,
                                  DropoutPlan& dropout, DenseCache& cache) {
  if (input.size() != layer.in_dim()) {
    throw ShapeError("dense_forward: input length " +
                     std::to_string(input.size()) + " vs layer " +
                     std::to_string(layer.out_dim()) + "x" +
                     std::to_string(layer.in_dim()));
  }
  cache.input.assign(input.begin(), input.end());
  cache.pre_activation = layer.weights.matvec(input);
  for (std::size_t i = 0; i < cache.pre_activation.size(); ++i) {
    cache.pre_activation[i] += layer.bias[i];
  }
  cache.activation_output = cache.pre_activation;
  apply_activation(layer.activation, cache.activation_output);

  std::vector<double> out = cache.activation_output;
  if (dropout.active()) {
    cache.dropout_mask = dropout.draw_mask(out.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= cache.dropout_mask[i];
  } else {
    cache.dropout_mask.clear();
  }
  return out;
}

std::vector<double> dense_backward(const DenseLayer& layer,
                                   const DenseCache& cache,
                                   std::span<const double> grad_output,
                                   LayerGrads& grads) {
  if (grad_output.size() != layer.out_dim() ||
      cache.input.size() != layer.in_dim()) {
    throw ContractError("dense_backward: cache/layer mismatch (grad length " +
                        std::to_string(grad_output.size()) + ", cache input " +
                        std::to_string(cache.input.size()) + ", layer " +
                        std::to_string(layer.out_dim()) + "x" +
                        std::to_string(layer.in_dim()) + ")");
  }
  std::vector<double> grad_act(grad_output.begin(), grad_output.end());
  if (!cache.dropout_mask.empty()) {
    for (std::size_t i = 0; i < grad_act.size(); ++i) {
      grad_act[i] *= cache.dropout_mask[i];
    }
  }
  const std::vector<double> grad_pre =
      activation_backward(layer.activation, cache, grad_act);
  return dense_backward_from_preactivation(layer, cache, grad_pre, grads);
}

std::vector<double> dense_backward_from_preactivation(
    const DenseLayer& layer, const DenseCache& cache,
    std::span<const double> grad_pre, LayerGrads& grads) {
  if (grads.weights.rows() != layer.out_dim() ||
      grads.weights.cols() != layer.in_dim()) {
    throw ContractError("dense_backward: gradient buffer shape mismatch");
  }
  grads.weights.add_outer(grad_pre, cache.input);
  for (std::size_t i = 0; i < grad_pre.size(); ++i) {
    grads.bias[i] += grad_pre[i];
  }
  return layer.weights.matvec_transposed(grad_pre);
}

MlpStack::MlpStack(std::size_t in_dim, std::size_t hidden_dim,
                   std::size_t out_dim, Activation output_activation) {
  layers.emplace_back(hidden_dim, in_dim, Activation::kRelu);
  layers.emplace_back(hidden_dim, hidden_dim, Activation::kRelu);
  layers.emplace_back(out_dim, hidden_dim, output_activation);
}

std::size_t MlpStack::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weights.size() + l.bias.size();
  return n;
}

std::vector<double> stack_forward(const MlpStack& stack,
                                  std::span<const double> input,
                                  DropoutPlan& dropout, StackCache& cache) {
  cache.layer_caches.assign(stack.layers.size(), DenseCache{});
  DropoutPlan no_dropout = DropoutPlan::eval();
  std::vector<double> x(input.begin(), input.end());
  for (std::size_t i = 0; i < stack.layers.size(); ++i) {
    const bool hidden = i + 1 < stack.layers.size();
    x = dense_forward(stack.layers[i], x, hidden ? dropout : no_dropout,
                      cache.layer_caches[i]);
  }
  return x;
}

std::vector<double> stack_forward(const MlpStack& stack,
                                  std::span<const double> input) {
  DropoutPlan no_dropout = DropoutPlan::eval();
  StackCache cache;
  return stack_forward(stack, input, no_dropout, cache);
}

std::vector<double> stack_forward_logits(const MlpStack& stack,
                                         std::span<const double> input,
                                         DropoutPlan& dropout,
                                         StackCache& cache) {
  stack_forward(stack, input, dropout, cache);
  return cache.layer_caches.back().pre_activation;
}

namespace {

std::vector<double> stack_backward_impl(const MlpStack& stack,
                                        const StackCache& cache,
                                        std::span<const double> grad_top,
                                        bool top_is_preactivation,
                                        std::span<LayerGrads> grads) {
  if (cache.layer_caches.size() != stack.layers.size() ||
      grads.size() != stack.layers.size()) {
    throw ContractError("stack_backward: cache/gradient arity mismatch");
  }
  std::vector<double> g(grad_top.begin(), grad_top.end());
  for (std::size_t i = stack.layers.size(); i-- > 0;) {
    const bool top = i + 1 == stack.layers.size();
    if (top && top_is_preactivation) {
      g = dense_backward_from_preactivation(stack.layers[i],
                                            cache.layer_caches[i], g, grads[i]);
    } else {
      g = dense_backward(stack.layers[i], cache.layer_caches[i], g, grads[i]);
    }
  }
  return g;
}

}  // namespace

std::vector<double> stack_backward(const MlpStack& stack,
                                   const StackCache& cache,
                                   std::span<const double> grad_output,
                                   std::span<LayerGrads> grads) {
  return stack_backward_impl(stack, cache, grad_output, false, grads);
}

std::vector<double> stack_backward_from_logits(
    const MlpStack& stack, const StackCache& cache,
    std::span<const double> grad_logits, std::span<LayerGrads> grads) {
  return stack_backward_impl(stack, cache, grad_logits, true, grads);
}

}  // namespace mmn
