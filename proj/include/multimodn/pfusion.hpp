#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "multimodn/data.hpp"
#include "multimodn/dense.hpp"
#include "multimodn/model.hpp"
#include "multimodn/params.hpp"

namespace mmn {

/// Monolithic parallel-fusion baseline: per-modality embeddings concatenated
/// in fixed order (missing modalities padded with zeros) and fed once to a
/// single-task MLP decoder.
class PFusionModel {
 public:
  PFusionModel() = default;

  const std::vector<EncoderSpec>& modalities() const { return modalities_; }
  const DecoderSpec& task() const { return task_; }
  std::size_t hidden_size() const { return hidden_size_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t input_dim() const;

  MlpStack& decoder_stack() { return stack_; }
  const MlpStack& decoder_stack() const { return stack_; }

  std::vector<TensorRef> parameters();
  std::vector<double> save_values();
  void restore_values(const std::vector<double>& values);

  friend PFusionModel init_pfusion(const std::vector<EncoderSpec>& modalities,
                                   const DecoderSpec& task,
                                   std::size_t hidden_size,
                                   std::uint64_t seed);

 private:
  std::vector<EncoderSpec> modalities_;  // ordered, name + dim
  DecoderSpec task_;
  std::size_t hidden_size_ = 0;
  std::uint64_t seed_ = 0;
  MlpStack stack_;
};

PFusionModel init_pfusion(const std::vector<EncoderSpec>& modalities,
                          const DecoderSpec& task, std::size_t hidden_size,
                          std::uint64_t seed);

PFusionModel init_pfusion_from_manifest(const DatasetManifest& manifest,
                                        std::size_t task,
                                        std::size_t hidden_size,
                                        std::uint64_t seed);

/// Concatenation of the sample's modalities at one timestep, missing spans
/// replaced by the zero pad vector.
std::vector<double> pfusion_concat(const PFusionModel& model,
                                   const MultiModSample& sample,
                                   std::size_t timestep);

Prediction pfusion_forward(const PFusionModel& model,
                           const MultiModSample& sample,
                           std::size_t timestep);

/// Mean task loss over the batch and its exact gradients. Samples whose
/// target is invalid at the evaluation timestep are excluded.
double pfusion_loss_and_grads(PFusionModel& model, const Dataset& dataset,
                              std::span<const std::size_t> batch,
                              std::size_t task_index, std::size_t timestep,
                              DropoutPlan& dropout, ParamGradients& grads);

}  // namespace mmn
