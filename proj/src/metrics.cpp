#include "multimodn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "multimodn/errors.hpp"

namespace mmn {

double auroc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw ContractError("auroc: scores/labels length mismatch");
  }
  std::size_t n_pos = 0, n_neg = 0;
  for (int y : labels) (y == 1 ? n_pos : n_neg) += 1;
  if (n_pos == 0 || n_neg == 0) {
    throw UndefinedMetricError("auroc undefined: only one class present");
  }

  // Sort once, then count concordant pairs and ties per tie-group; all
  // integer arithmetic until the final division, so this matches the
  // O(n^2) pair-counting definition bit for bit.
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });

  double wins = 0.0, ties = 0.0;
  std::size_t neg_below = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    std::size_t group_pos = 0, group_neg = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] == 1 ? group_pos : group_neg) += 1;
      ++j;
    }
    wins += static_cast<double>(group_pos) * static_cast<double>(neg_below);
    ties += static_cast<double>(group_pos) * static_cast<double>(group_neg);
    neg_below += group_neg;
    i = j;
  }
  return (wins + 0.5 * ties) /
         (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double balanced_accuracy(std::span<const int> predictions,
                         std::span<const int> labels) {
  if (predictions.size() != labels.size()) {
    throw ContractError("balanced_accuracy: length mismatch");
  }
  std::size_t tp = 0, fn = 0, tn = 0, fp = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 1) {
      (predictions[i] == 1 ? tp : fn) += 1;
    } else {
      (predictions[i] == 0 ? tn : fp) += 1;
    }
  }
  if (tp + fn == 0 || tn + fp == 0) {
    throw UndefinedMetricError(
        "balanced_accuracy undefined: only one class present");
  }
  const double sensitivity =
      static_cast<double>(tp) / static_cast<double>(tp + fn);
  const double specificity =
      static_cast<double>(tn) / static_cast<double>(tn + fp);
  return 0.5 * (sensitivity + specificity);
}

double balanced_accuracy_multiclass(std::span<const int> predictions,
                                    std::span<const int> labels,
                                    std::size_t classes) {
  if (predictions.size() != labels.size()) {
    throw ContractError("balanced_accuracy: length mismatch");
  }
  double recall_sum = 0.0;
  for (std::size_t c = 0; c < classes; ++c) {
    std::size_t support = 0, hit = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == static_cast<int>(c)) {
        ++support;
        if (predictions[i] == labels[i]) ++hit;
      }
    }
    if (support == 0) {
      throw UndefinedMetricError("balanced_accuracy undefined: class " +
                                 std::to_string(c) + " absent");
    }
    recall_sum += static_cast<double>(hit) / static_cast<double>(support);
  }
  return recall_sum / static_cast<double>(classes);
}

double mse(std::span<const double> predictions,
           std::span<const double> targets) {
  if (predictions.size() != targets.size()) {
    throw ContractError("mse: lengths " + std::to_string(predictions.size()) +
                        " vs " + std::to_string(targets.size()));
  }
  if (predictions.empty()) throw ContractError("mse: empty input");
  double acc = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double d = predictions[i] - targets[i];
    acc += d * d;
  }
  return acc / static_cast<double>(predictions.size());
}

ConfidenceInterval ci95(std::span<const double> values) {
  if (values.size() < 2) {
    throw ContractError("ci95 needs >= 2 values");
  }
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  const double half = 1.96 * sd / std::sqrt(n);
  return {mean, mean - half, mean + half};
}

double macro_over_tasks(std::span<const double> per_task_values) {
  if (per_task_values.empty()) {
    throw ContractError("macro_over_tasks: empty input");
  }
  double acc = 0.0;
  for (double v : per_task_values) acc += v;
  return acc / static_cast<double>(per_task_values.size());
}

void MetricsReport::set(const std::string& task, const std::string& metric,
                        double estimate) {
  MetricValue mv;
  mv.estimate = estimate;
  mv.values = {estimate};
  per_task[task][metric] = std::move(mv);
}

void MetricsReport::set_aggregated(const std::string& task,
                                   const std::string& metric,
                                   const std::vector<double>& values) {
  MetricValue mv;
  mv.values = values;
  if (values.size() >= 2) {
    const ConfidenceInterval ci = ci95(values);
    mv.estimate = ci.mean;
    mv.ci = ci;
  } else if (values.size() == 1) {
    mv.estimate = values.front();
  }
  per_task[task][metric] = std::move(mv);
}

const MetricValue& MetricsReport::at(const std::string& task,
                                     const std::string& metric) const {
  return per_task.at(task).at(metric);
}

bool MetricsReport::has(const std::string& task,
                        const std::string& metric) const {
  auto it = per_task.find(task);
  return it != per_task.end() && it->second.count(metric) > 0;
}

std::string MetricsReport::to_json() const {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [task, metrics] : per_task) {
    for (const auto& [name, mv] : metrics) {
      nlohmann::ordered_json jm;
      jm["estimate"] = mv.estimate;
      if (mv.ci.has_value()) {
        jm["ci95"] = {mv.ci->low, mv.ci->high};
      }
      jm["values"] = mv.values;
      j[task][name] = jm;
    }
  }
  return j.dump(2);
}

std::string MetricsReport::to_csv() const {
  std::vector<std::string> tasks;
  std::vector<std::string> metric_names;
  for (const auto& [task, metrics] : per_task) {
    tasks.push_back(task);
    for (const auto& [name, mv] : metrics) {
      if (std::find(metric_names.begin(), metric_names.end(), name) ==
          metric_names.end()) {
        metric_names.push_back(name);
      }
    }
  }
  std::ostringstream out;
  out << "metric";
  for (const auto& t : tasks) out << "," << t;
  out << "\n";
  for (const auto& name : metric_names) {
    out << name;
    for (const auto& t : tasks) {
      out << ",";
      if (has(t, name)) {
        const MetricValue& mv = at(t, name);
        out << mv.estimate;
        if (mv.ci.has_value()) {
          out << " +- " << (mv.ci->high - mv.ci->low) / 2.0;
        }
      }
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace mmn
