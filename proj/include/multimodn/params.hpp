#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace mmn {

/// Named view over one parameter tensor's storage (a weight matrix flattened
/// row-major, a bias vector, or the initial state). Models expose their
/// trainable tensors as a vector<TensorRef> in declaration order; that order
/// defines gradient slots, optimizer slots, and serialization layout.
struct TensorRef {
  std::string name;
  std::span<double> values;
};

/// Per-tensor gradient buffers mirroring a parameter list.
class ParamGradients {
 public:
  ParamGradients() = default;

  static ParamGradients zeros_like(const std::vector<TensorRef>& params);

  std::size_t slot_count() const { return slots_.size(); }
  const std::string& name(std::size_t i) const { return names_[i]; }
  std::vector<double>& slot(std::size_t i) { return slots_[i]; }
  const std::vector<double>& slot(std::size_t i) const { return slots_[i]; }

  void zero();
  void scale(double factor);
  /// this += other * factor. Shapes must match.
  void accumulate(const ParamGradients& other, double factor = 1.0);
  double global_norm() const;
  /// Throws NumericError naming the offending tensor if any entry is not
  /// finite.
  void check_finite() const;

  bool shapes_match(const std::vector<TensorRef>& params) const;

 private:
  std::vector<std::string> names_;
  std::vector<std::vector<double>> slots_;
};

/// Scales all gradients by max_norm/g when the global L2 norm g exceeds
/// max_norm; otherwise returns them unchanged. Idempotent.
ParamGradients clip_by_global_norm(ParamGradients grads, double max_norm);

/// Adam with bias correction. One state per trained model.
struct AdamState {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  long t = 0;
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;

  static AdamState init(const std::vector<TensorRef>& params,
                        double learning_rate);
};

/// In-place parameter update; increments state.t exactly once.
void adam_step(std::vector<TensorRef>& params, const ParamGradients& grads,
               AdamState& state);

/// Central-difference gradient estimate of a scalar function of the
/// parameters. The gradient-check oracle: it only evaluates `f`, never the
/// analytic backward path.
ParamGradients finite_diff_grad(const std::function<double()>& f,
                                std::vector<TensorRef>& params, double eps);

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_tensor;
  std::size_t worst_index = 0;
};

/// Worst-case relative error between analytic and finite-difference
/// gradients. Entries where both magnitudes fall below `abs_floor` are
/// compared absolutely (saturation guard).
GradCheckResult compare_grads(const ParamGradients& analytic,
                              const ParamGradients& numeric,
                              double abs_floor = 1e-7);

}  // namespace mmn
