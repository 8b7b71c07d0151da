#pragma once

#include <string>
#include <vector>

#include "multimodn/data.hpp"
#include "multimodn/model.hpp"

namespace mmn {

enum class ImcAggregation { kMeanSigned, kMeanAbsolute };

std::string imc_aggregation_name(ImcAggregation a);
ImcAggregation imc_aggregation_from_name(const std::string& name);

/// Importance scores: for each modality, its encoder is deployed alone from
/// the initial state and the prediction shift against the prior is averaged
/// over the samples carrying that modality. modality x task grid; rows for
/// modalities absent in every sample are NaN with population 0.
struct ImportanceMatrix {
  std::vector<std::string> modality_names;
  std::vector<std::string> task_names;
  std::vector<std::vector<double>> scores;  // M x T
  std::vector<std::size_t> population;      // samples contributing per row
  ImcAggregation aggregation = ImcAggregation::kMeanSigned;
};

/// Dropout is disabled throughout; binary/multiclass use positive-class
/// probability, regression the raw prediction. For multi-timestep samples
/// the modality vector from its first present timestep is used.
ImportanceMatrix importance_scores(const MultiModNModel& model,
                                   const Dataset& dataset,
                                   ImcAggregation aggregation);

/// Cumulative predictions of one sample: row 0 is the prior, then one row
/// per encoded (non-skipped) modality in sequence.
struct CumulativeGrid {
  std::vector<std::string> step_labels;  // "prior", then encoded steps
  std::vector<std::string> task_names;
  std::vector<std::vector<double>> values;  // (encoded steps + 1) x T
};

CumulativeGrid cumulative_predictions(const MultiModNModel& model,
                                      const MultiModSample& sample);

std::string heatmap_csv(const ImportanceMatrix& matrix);
std::string heatmap_csv(const CumulativeGrid& grid);
void export_heatmap(const ImportanceMatrix& matrix, const std::string& path);
void export_heatmap(const CumulativeGrid& grid, const std::string& path);

}  // namespace mmn
