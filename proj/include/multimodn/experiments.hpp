#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "multimodn/data.hpp"
#include "multimodn/metrics.hpp"
#include "multimodn/missingness.hpp"
#include "multimodn/model.hpp"
#include "multimodn/training.hpp"

namespace mmn {

/// One aggregated measurement in an experiment grid.
struct ResultRow {
  std::string arm;             // "multimodn" | "multimodn-single" | "pfusion"
  std::string mode;            // missingness mode or experiment tag
  double rate = 0.0;
  std::string test_condition;  // "clean" | "same" | "flipped" | subset label
  std::string task;
  std::string metric;
  double value = 0.0;
  std::optional<ConfidenceInterval> ci;
  std::vector<double> fold_values;
};

struct CellFailure {
  std::string cell;
  std::string reason;
};

struct ExperimentResult {
  std::vector<ResultRow> rows;
  std::vector<CellFailure> failures;
  std::string config_hash;

  const ResultRow* find(const std::string& arm, const std::string& mode,
                        double rate, const std::string& condition,
                        const std::string& task,
                        const std::string& metric) const;
  std::string to_json() const;
  /// Long format: arm,mode,rate,test_condition,task,metric,value,ci_low,ci_high
  std::string to_csv() const;
};

/// MNAR/MAR robustness grid: for each (mode, rate) both arms are trained on
/// injected data per fold and evaluated on clean, same-pattern, and (MNAR
/// only) label-flipped test sets. Both arms share fold splits, injected
/// datasets, and training hyperparameters.
struct MnarGridConfig {
  SynthSpec synth;
  TrainingConfig training;
  std::string modality;  // modality to erase
  std::vector<double> rates = {0.0, 0.1, 0.5, 0.8};
  std::vector<MissingnessMode> modes = {MissingnessMode::kMnar};
  int target_class = 1;
  std::string task;  // binary study task; empty = stratification task
  std::uint64_t seed = 7;
  std::size_t jobs = 1;
};

ExperimentResult run_mnar_grid(const MnarGridConfig& config);

/// Single-task vs multi-task parity: per-task single-task MultiModN models,
/// one multi-task MultiModN, and per-task P-Fusion models, trained over
/// n_seeds seeds on one fold split; per-task metrics with CIs.
struct ParityConfig {
  SynthSpec synth;
  TrainingConfig training;
  std::size_t n_seeds = 5;
  std::uint64_t seed = 7;
};

ExperimentResult run_parity(const ParityConfig& config);

/// Evaluates one trained model under each modality-presence subset (the
/// complement is masked as missing); no retraining.
ExperimentResult run_inference_combinations(
    const MultiModNModel& model, const Dataset& dataset,
    const std::vector<std::vector<std::string>>& subsets,
    const EvalOptions& options = {});

// Config file I/O (JSON).
TrainingConfig training_config_from_json(const std::string& json_text);
std::string training_config_to_json(const TrainingConfig& config);
MnarGridConfig mnar_config_from_json_file(const std::string& path);
ParityConfig parity_config_from_json_file(const std::string& path);

/// FNV-1a hash of a canonical config serialization.
std::string config_hash(const std::string& canonical);

}  // namespace mmn
