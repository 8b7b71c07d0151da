#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "multimodn/matrix.hpp"

namespace mmn {

enum class TaskKind { kBinary, kMulticlass, kRegression };

std::string task_kind_name(TaskKind k);
TaskKind task_kind_from_name(const std::string& name);

struct TaskSpec {
  std::string name;
  TaskKind kind = TaskKind::kBinary;
  std::size_t classes = 2;  // multiclass only
  std::size_t column = 0;   // CSV column
  bool per_timestep = false;
};

struct ModalitySpec {
  std::string name;
  std::size_t dim = 0;
  std::size_t col_start = 0;  // CSV feature span [col_start, col_end)
  std::size_t col_end = 0;
  // Loads missing cells of this modality as literal zeros instead of marking
  // the modality missing (for sources where absence is a meaningful zero).
  bool treat_missing_as_zero = false;
};

struct DatasetManifest {
  std::vector<ModalitySpec> modalities;
  std::vector<TaskSpec> tasks;
  std::size_t timesteps = 1;
  std::size_t stratify_task = 0;

  std::size_t modality_index(const std::string& name) const;
  std::size_t task_index(const std::string& name) const;
  void validate() const;
};

/// One task's target. Static targets hold a single value valid at every
/// step; per-timestep targets hold one value per timestep, NaN where the
/// target is not defined (e.g. the final-step dropout label).
struct TargetValue {
  bool per_timestep = false;
  std::vector<double> values;

  double at_timestep(std::size_t t) const {
    return per_timestep ? values.at(t) : values.front();
  }
  bool valid_at(std::size_t t) const;
};

/// Appendix-style sample: per-timestep, per-modality optional feature
/// vectors plus per-task targets and an optional per-timestep encoder order.
struct MultiModSample {
  // data[t][m]: features of modality m at timestep t; nullopt = missing.
  std::vector<std::vector<std::optional<std::vector<double>>>> data;
  std::vector<TargetValue> targets;
  // encoding_sequence[t]: modality indices to encode at timestep t, in order.
  std::optional<std::vector<std::vector<std::size_t>>> encoding_sequence;

  bool modality_present(std::size_t t, std::size_t m) const {
    return data[t][m].has_value();
  }
};

struct Dataset {
  DatasetManifest manifest;
  std::vector<MultiModSample> samples;
  std::string provenance;

  std::size_t size() const { return samples.size(); }
  Dataset subset(const std::vector<std::size_t>& indices) const;
  /// Stratification label of a sample (value of the stratify task, which
  /// must be a static binary/multiclass target).
  int stratify_label(std::size_t sample_index) const;
};

// ---------------------------------------------------------------------------
// Synthetic generation

struct SynthModalitySpec {
  std::string name;
  std::size_t dim = 16;
  std::uint64_t mixing_seed = 0;  // 0 = derive from master seed
  // false = pure-noise modality, statistically independent of all targets.
  bool signal = true;
};

struct SynthTaskSpec {
  std::string name;
  TaskKind kind = TaskKind::kBinary;  // binary or regression
  std::uint64_t projection_seed = 0;  // 0 = derive from master seed
};

struct SynthSpec {
  std::size_t n_samples = 2000;
  std::size_t latent_dim = 8;
  std::vector<SynthModalitySpec> modalities = {{"mod_a", 16, 0, true},
                                               {"mod_b", 16, 0, true}};
  double noise_scale = 0.5;
  std::vector<SynthTaskSpec> tasks = {{"t1", TaskKind::kBinary, 0},
                                      {"t2", TaskKind::kBinary, 0},
                                      {"t3", TaskKind::kRegression, 0}};
  std::size_t timesteps = 1;
  std::uint64_t seed = 7;

  void validate() const;
};

/// Mixing matrices and target projections behind a synthetic dataset;
/// exposed so tests can probe identifiability against ground truth.
struct SynthGroundTruth {
  std::vector<Matrix> mixing;  // per modality, dim x latent_dim (zero if noise)
  std::vector<std::vector<double>> task_directions;  // per task, latent_dim
  std::vector<std::vector<double>> latents;          // per sample, latent_dim
};

/// Latent-factor generator: z ~ N(0, I); modality features A_m z + noise;
/// binary label = 1(w.z > 0); regression target = v.z min-max rescaled to
/// [0, 1]. Deterministic per seed.
Dataset generate_synthetic(const SynthSpec& spec,
                           SynthGroundTruth* ground_truth = nullptr);

SynthSpec synth_spec_from_json_file(const std::string& path);
std::string synth_spec_to_json(const SynthSpec& spec);

// ---------------------------------------------------------------------------
// CSV + manifest I/O

Dataset load_dataset(const std::string& manifest_path,
                     const std::string& data_path);
void save_dataset(const Dataset& dataset, const std::string& manifest_path,
                  const std::string& data_path);

// ---------------------------------------------------------------------------
// Normalization

struct FeatureRange {
  double min = 0.0;
  double max = 0.0;
  bool constant = false;
};

struct NormalizationRanges {
  // ranges[m][j]: range of feature j of modality m.
  std::vector<std::vector<FeatureRange>> ranges;
  // Names of features that were constant (mapped to 0).
  std::vector<std::string> constant_features;
};

/// Min/max per feature over the present values of the given samples (all
/// samples when `indices` is empty).
NormalizationRanges compute_minmax_ranges(
    const Dataset& dataset, const std::vector<std::size_t>& indices = {});

/// Applies recorded ranges: (x - min) / (max - min), clipped to [0, 1];
/// constant features map to 0; missing entries stay missing.
Dataset apply_minmax(const Dataset& dataset, const NormalizationRanges& ranges);

std::pair<Dataset, NormalizationRanges> minmax_normalize(
    const Dataset& dataset);

// ---------------------------------------------------------------------------
// Folds

struct FoldSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

/// 80-10-10 stratified K-fold: the dataset is dealt into `shards`
/// label-stratified shards (canonically 10); fold i in {0,2,...} takes shard
/// i as test, shard i+1 as val, the rest as train, yielding shards/2 folds
/// with disjoint test shards.
std::vector<FoldSplit> stratified_kfold(const Dataset& dataset,
                                        std::size_t shards, std::uint64_t seed);

}  // namespace mmn
