#include "multimodn/pfusion.hpp"

#include <cmath>

#include "multimodn/errors.hpp"
#include "multimodn/losses.hpp"
#include "multimodn/rng.hpp"

namespace mmn {

std::size_t PFusionModel::input_dim() const {
  std::size_t n = 0;
  for (const auto& m : modalities_) n += m.input_dim;
  return n;
}

std::vector<TensorRef> PFusionModel::parameters() {
  std::vector<TensorRef> out;
  for (std::size_t l = 0; l < stack_.layers.size(); ++l) {
    DenseLayer& layer = stack_.layers[l];
    const std::string prefix = "decoder.layer" + std::to_string(l);
    out.push_back({prefix + ".weight", layer.weights.values()});
    out.push_back({prefix + ".bias", layer.bias});
  }
  return out;
}

std::vector<double> PFusionModel::save_values() {
  std::vector<double> out;
  for (const auto& t : parameters()) {
    out.insert(out.end(), t.values.begin(), t.values.end());
  }
  return out;
}

void PFusionModel::restore_values(const std::vector<double>& values) {
  std::size_t pos = 0;
  for (auto& t : parameters()) {
    if (pos + t.values.size() > values.size()) {
      throw ContractError("restore_values: snapshot too short");
    }
    std::copy(values.begin() + pos, values.begin() + pos + t.values.size(),
              t.values.begin());
    pos += t.values.size();
  }
  if (pos != values.size()) {
    throw ContractError("restore_values: snapshot size mismatch");
  }
}

PFusionModel init_pfusion(const std::vector<EncoderSpec>& modalities,
                          const DecoderSpec& task, std::size_t hidden_size,
                          std::uint64_t seed) {
  if (modalities.empty()) throw ContractError("pfusion needs >= 1 modality");
  if (hidden_size == 0) throw ContractError("hidden_size must be >= 1");
  PFusionModel model;
  model.modalities_ = modalities;
  model.task_ = task;
  model.hidden_size_ = hidden_size;
  model.seed_ = seed;

  Activation out_act = Activation::kIdentity;
  if (task.kind == TaskKind::kBinary) out_act = Activation::kSigmoid;
  if (task.kind == TaskKind::kMulticlass) out_act = Activation::kSoftmax;
  const std::size_t out_dim =
      task.kind == TaskKind::kMulticlass ? task.classes : 1;
  model.stack_ = MlpStack(model.input_dim(), hidden_size, out_dim, out_act);

  RandomStream rng(derive_seed(seed, 3000));
  for (auto& layer : model.stack_.layers) {
    const double bound = std::sqrt(
        6.0 / static_cast<double>(layer.in_dim() + layer.out_dim()));
    for (double& w : layer.weights.values()) w = rng.uniform(-bound, bound);
  }
  return model;
}

PFusionModel init_pfusion_from_manifest(const DatasetManifest& manifest,
                                        std::size_t task,
                                        std::size_t hidden_size,
                                        std::uint64_t seed) {
  std::vector<EncoderSpec> mods;
  for (const auto& m : manifest.modalities) mods.push_back({m.name, m.dim});
  const TaskSpec& t = manifest.tasks.at(task);
  return init_pfusion(mods, {t.name, t.kind, t.classes}, hidden_size, seed);
}

std::vector<double> pfusion_concat(const PFusionModel& model,
                                   const MultiModSample& sample,
                                   std::size_t timestep) {
  if (timestep >= sample.data.size()) {
    throw ContractError("pfusion: timestep " + std::to_string(timestep) +
                        " out of range");
  }
  std::vector<double> joint;
  joint.reserve(model.input_dim());
  const auto& step = sample.data[timestep];
  if (step.size() != model.modalities().size()) {
    throw ShapeError("pfusion: sample has " + std::to_string(step.size()) +
                     " modalities, model expects " +
                     std::to_string(model.modalities().size()));
  }
  for (std::size_t m = 0; m < step.size(); ++m) {
    const std::size_t dim = model.modalities()[m].input_dim;
    if (step[m].has_value()) {
      if (step[m]->size() != dim) {
        throw ShapeError("pfusion: modality " +
                         model.modalities()[m].modality_id + " has length " +
                         std::to_string(step[m]->size()) + ", expected " +
                         std::to_string(dim));
      }
      joint.insert(joint.end(), step[m]->begin(), step[m]->end());
    } else {
      joint.insert(joint.end(), dim, 0.0);  // neutral pad
    }
  }
  return joint;
}

Prediction pfusion_forward(const PFusionModel& model,
                           const MultiModSample& sample,
                           std::size_t timestep) {
  Prediction p;
  p.kind = model.task().kind;
  p.values = stack_forward(model.decoder_stack(),
                           pfusion_concat(model, sample, timestep));
  return p;
}

double pfusion_loss_and_grads(PFusionModel& model, const Dataset& dataset,
                              std::span<const std::size_t> batch,
                              std::size_t task_index, std::size_t timestep,
                              DropoutPlan& dropout, ParamGradients& grads) {
  if (batch.empty()) throw ContractError("pfusion: empty batch");
  grads.zero();

  std::vector<LayerGrads> layer_grads;
  for (const auto& layer : model.decoder_stack().layers) {
    layer_grads.push_back(
        {Matrix(layer.out_dim(), layer.in_dim()),
         std::vector<double>(layer.out_dim(), 0.0)});
  }

  double total = 0.0;
  std::size_t counted = 0;
  for (std::size_t i : batch) {
    const MultiModSample& sample = dataset.samples.at(i);
    const TargetValue& target = sample.targets.at(task_index);
    if (!target.valid_at(timestep)) continue;

    const std::vector<double> joint = pfusion_concat(model, sample, timestep);
    StackCache cache;
    const std::vector<double> logits =
        stack_forward_logits(model.decoder_stack(), joint, dropout, cache);
    const TaskLoss tl = task_loss_from_logits(model.task().kind, logits,
                                              target.at_timestep(timestep));
    total += tl.loss;
    for (auto& lg : layer_grads) {
      lg.weights.values().assign(lg.weights.size(), 0.0);
      std::fill(lg.bias.begin(), lg.bias.end(), 0.0);
    }
    stack_backward_from_logits(model.decoder_stack(), cache, tl.grad_logits,
                               layer_grads);
    for (std::size_t l = 0; l < layer_grads.size(); ++l) {
      auto& w_slot = grads.slot(2 * l);
      const auto& w = layer_grads[l].weights.values();
      for (std::size_t j = 0; j < w.size(); ++j) w_slot[j] += w[j];
      auto& b_slot = grads.slot(2 * l + 1);
      for (std::size_t j = 0; j < layer_grads[l].bias.size(); ++j) {
        b_slot[j] += layer_grads[l].bias[j];
      }
    }
    ++counted;
  }
  if (counted == 0) {
    throw ContractError("pfusion: no sample in batch has a valid target");
  }
  grads.scale(1.0 / static_cast<double>(counted));
  return total / static_cast<double>(counted);
}

}  // namespace mmn
