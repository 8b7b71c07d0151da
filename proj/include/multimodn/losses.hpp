#pragma once

#include <span>
#include <vector>

#include "multimodn/data.hpp"

namespace mmn {

/// Per-prediction loss computed from final-layer pre-activations, with its
/// gradient. Working from logits keeps the cross-entropy losses stable
/// (log-sum-exp / softplus forms, no log(0)).
struct TaskLoss {
  double loss = 0.0;
  std::vector<double> grad_logits;
};

/// binary: logits = {z}, target in {0,1}, loss = softplus(z) - z*target.
/// multiclass: logits length k, target = class index, categorical CE.
/// regression: logits = {prediction}, squared error.
TaskLoss task_loss_from_logits(TaskKind kind, std::span<const double> logits,
                               double target);

double sigmoid(double z);

}  // namespace mmn
