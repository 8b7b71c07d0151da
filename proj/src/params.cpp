#include "multimodn/params.hpp"

#include <algorithm>
#include <cmath>

#include "multimodn/errors.hpp"
#include "multimodn/matrix.hpp"

namespace mmn {

ParamGradients ParamGradients::zeros_like(
    const std::vector<TensorRef>& params) {
  ParamGradients g;
  g.names_.reserve(params.size());
  g.slots_.reserve(params.size());
  for (const auto& p : params) {
    g.names_.push_back(p.name);
    g.slots_.emplace_back(p.values.size(), 0.0);
  }
  return g;
}

void ParamGradients::zero() {
  for (auto& s : slots_) std::fill(s.begin(), s.end(), 0.0);
}

void ParamGradients::scale(double factor) {
  for (auto& s : slots_) {
    for (double& x : s) x *= factor;
  }
}

void ParamGradients::accumulate(const ParamGradients& other, double factor) {
  if (other.slots_.size() != slots_.size()) {
    throw ContractError("gradient accumulate: slot count mismatch");
  }
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    if (other.slots_[i].size() != slots_[i].size()) {
      throw ContractError("gradient accumulate: shape mismatch at " +
                          names_[i]);
    }
    for (std::size_t j = 0; j < slots_[i].size(); ++j) {
      slots_[i][j] += factor * other.slots_[i][j];
    }
  }
}

double ParamGradients::global_norm() const {
  double acc = 0.0;
  for (const auto& s : slots_) acc += l2_norm_squared(s);
  return std::sqrt(acc);
}

void ParamGradients::check_finite() const {
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    if (!all_finite(slots_[i])) {
      throw NumericError("non-finite gradient in " + names_[i]);
    }
  }
}

bool ParamGradients::shapes_match(
    const std::vector<TensorRef>& params) const {
  if (params.size() != slots_.size()) return false;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].values.size() != slots_[i].size()) return false;
  }
  return true;
}

ParamGradients clip_by_global_norm(ParamGradients grads, double max_norm) {
  if (max_norm <= 0.0) {
    throw ContractError("clip_by_global_norm: max_norm must be positive");
  }
  grads.check_finite();
  const double norm = grads.global_norm();
  if (norm > max_norm) grads.scale(max_norm / norm);
  return grads;
}

AdamState AdamState::init(const std::vector<TensorRef>& params,
                          double learning_rate) {
  AdamState s;
  s.learning_rate = learning_rate;
  for (const auto& p : params) {
    s.first_moment.emplace_back(p.values.size(), 0.0);
    s.second_moment.emplace_back(p.values.size(), 0.0);
  }
  return s;
}

void adam_step(std::vector<TensorRef>& params, const ParamGradients& grads,
               AdamState& state) {
  if (!grads.shapes_match(params) ||
      state.first_moment.size() != params.size()) {
    throw ContractError("adam_step: parameter/gradient/state shape mismatch");
  }
  state.t += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, state.t);
  const double bc2 = 1.0 - std::pow(state.beta2, state.t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& m = state.first_moment[i];
    auto& v = state.second_moment[i];
    const auto& g = grads.slot(i);
    auto values = params[i].values;
    for (std::size_t j = 0; j < values.size(); ++j) {
      m[j] = state.beta1 * m[j] + (1.0 - state.beta1) * g[j];
      v[j] = state.beta2 * v[j] + (1.0 - state.beta2) * g[j] * g[j];
      const double m_hat = m[j] / bc1;
      const double v_hat = v[j] / bc2;
      values[j] -= state.learning_rate * m_hat /
                   (std::sqrt(v_hat) + state.epsilon);
    }
  }
}

ParamGradients finite_diff_grad(const std::function<double()>& f,
                                std::vector<TensorRef>& params, double eps) {
  if (eps <= 0.0) throw ContractError("finite_diff_grad: eps must be > 0");
  ParamGradients out = ParamGradients::zeros_like(params);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto values = params[i].values;
    for (std::size_t j = 0; j < values.size(); ++j) {
      const double saved = values[j];
      values[j] = saved + eps;
      const double f_plus = f();
      values[j] = saved - eps;
      const double f_minus = f();
      values[j] = saved;
      out.slot(i)[j] = (f_plus - f_minus) / (2.0 * eps);
    }
  }
  return out;
}

GradCheckResult compare_grads(const ParamGradients& analytic,
                              const ParamGradients& numeric,
                              double abs_floor) {
  if (analytic.slot_count() != numeric.slot_count()) {
    throw ContractError("compare_grads: slot count mismatch");
  }
  GradCheckResult result;
  for (std::size_t i = 0; i < analytic.slot_count(); ++i) {
    const auto& a = analytic.slot(i);
    const auto& n = numeric.slot(i);
    if (a.size() != n.size()) {
      throw ContractError("compare_grads: shape mismatch at " +
                          analytic.name(i));
    }
    for (std::size_t j = 0; j < a.size(); ++j) {
      const double denom = std::max(std::abs(a[j]), std::abs(n[j]));
      if (denom < abs_floor) continue;  // both effectively zero
      const double rel = std::abs(a[j] - n[j]) / denom;
      if (rel > result.max_rel_error) {
        result.max_rel_error = rel;
        result.worst_tensor = analytic.name(i);
        result.worst_index = j;
      }
    }
  }
  return result;
}

}  // namespace mmn
