#include "multimodn/losses.hpp"

#include <algorithm>
#include <cmath>

#include "multimodn/errors.hpp"

namespace mmn {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

namespace {

// log(1 + e^x) without overflow.
double softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

}  // namespace

TaskLoss task_loss_from_logits(TaskKind kind, std::span<const double> logits,
                               double target) {
  TaskLoss out;
  switch (kind) {
    case TaskKind::kBinary: {
      if (logits.size() != 1) {
        throw ContractError("binary loss expects a single logit");
      }
      const double z = logits[0];
      out.loss = softplus(z) - z * target;
      out.grad_logits = {sigmoid(z) - target};
      break;
    }
    case TaskKind::kMulticlass: {
      const auto target_class = static_cast<std::size_t>(target);
      if (target_class >= logits.size()) {
        throw ContractError("class index " + std::to_string(target_class) +
                            " out of range for " +
                            std::to_string(logits.size()) + " logits");
      }
      const double max = *std::max_element(logits.begin(), logits.end());
      double sum = 0.0;
      for (double z : logits) sum += std::exp(z - max);
      const double lse = max + std::log(sum);
      out.loss = lse - logits[target_class];
      out.grad_logits.resize(logits.size());
      for (std::size_t i = 0; i < logits.size(); ++i) {
        out.grad_logits[i] = std::exp(logits[i] - lse);
      }
      out.grad_logits[target_class] -= 1.0;
      break;
    }
    case TaskKind::kRegression: {
      if (logits.size() != 1) {
        throw ContractError("regression loss expects a single output");
      }
      const double diff = logits[0] - target;
      out.loss = diff * diff;
      out.grad_logits = {2.0 * diff};
      break;
    }
  }
  return out;
}

}  // namespace mmn
