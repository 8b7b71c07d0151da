#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mmn {

/// Mann-Whitney AUROC: fraction of (positive, negative) pairs ranked
/// correctly, ties counting 1/2. Throws UndefinedMetricError unless both
/// classes are present.
double auroc(std::span<const double> scores, std::span<const int> labels);

/// (sensitivity + specificity) / 2 over hard 0/1 predictions.
double balanced_accuracy(std::span<const int> predictions,
                         std::span<const int> labels);

/// Macro balanced accuracy for multiclass: mean per-class recall.
double balanced_accuracy_multiclass(std::span<const int> predictions,
                                    std::span<const int> labels,
                                    std::size_t classes);

double mse(std::span<const double> predictions,
           std::span<const double> targets);

struct ConfidenceInterval {
  double mean = 0.0;
  double low = 0.0;
  double high = 0.0;
};

/// Normal-approximation 95% CI over fold/seed estimates:
/// mean +- 1.96 * sd / sqrt(n), sample standard deviation.
ConfidenceInterval ci95(std::span<const double> values);

double macro_over_tasks(std::span<const double> per_task_values);

/// One metric entry: point estimate, optional CI, and the per-fold/seed
/// values it was aggregated from.
struct MetricValue {
  double estimate = 0.0;
  std::optional<ConfidenceInterval> ci;
  std::vector<double> values;
};

/// name -> metric, per task.
struct MetricsReport {
  std::map<std::string, std::map<std::string, MetricValue>> per_task;

  void set(const std::string& task, const std::string& metric,
           double estimate);
  /// Aggregates fold/seed values into estimate + CI.
  void set_aggregated(const std::string& task, const std::string& metric,
                      const std::vector<double>& values);
  const MetricValue& at(const std::string& task,
                        const std::string& metric) const;
  bool has(const std::string& task, const std::string& metric) const;

  std::string to_json() const;
  /// Task columns, metric rows, cells "estimate +- half-width".
  std::string to_csv() const;
};

}  // namespace mmn
