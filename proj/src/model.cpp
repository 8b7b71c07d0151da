#include "multimodn/model.hpp"

#include <cmath>

#include "multimodn/errors.hpp"
#include "multimodn/rng.hpp"

namespace mmn {

ArchitectureSpec ArchitectureSpec::from_manifest(
    const DatasetManifest& manifest, std::size_t state_size,
    std::size_t hidden_size) {
  ArchitectureSpec arch;
  arch.state_size = state_size;
  arch.hidden_size = hidden_size;
  for (const auto& m : manifest.modalities) {
    arch.encoders.push_back({m.name, m.dim});
  }
  for (const auto& t : manifest.tasks) {
    arch.decoders.push_back({t.name, t.kind, t.classes});
  }
  return arch;
}

ArchitectureSpec ArchitectureSpec::from_manifest_single_task(
    const DatasetManifest& manifest, std::size_t task, std::size_t state_size,
    std::size_t hidden_size) {
  ArchitectureSpec arch = from_manifest(manifest, state_size, hidden_size);
  const DecoderSpec keep = arch.decoders.at(task);
  arch.decoders = {keep};
  return arch;
}

std::size_t MultiModNModel::encoder_index(
    const std::string& modality_id) const {
  for (std::size_t i = 0; i < encoders_.size(); ++i) {
    if (encoders_[i].modality_id == modality_id) return i;
  }
  throw ContractError("unknown encoder: " + modality_id);
}

std::size_t MultiModNModel::decoder_index(const std::string& task_id) const {
  for (std::size_t i = 0; i < decoders_.size(); ++i) {
    if (decoders_[i].task_id == task_id) return i;
  }
  throw ContractError("unknown decoder: " + task_id);
}

namespace {

void append_stack_tensors(std::vector<TensorRef>& out, const std::string& base,
                          MlpStack& stack) {
  for (std::size_t l = 0; l < stack.layers.size(); ++l) {
    DenseLayer& layer = stack.layers[l];
    const std::string prefix = base + ".layer" + std::to_string(l);
    out.push_back({prefix + ".weight", layer.weights.values()});
    out.push_back({prefix + ".bias", layer.bias});
  }
}

}  // namespace

std::vector<TensorRef> MultiModNModel::parameters() {
  std::vector<TensorRef> out;
  if (arch_.train_initial_state) {
    out.push_back({"initial_state", initial_state_});
  }
  for (auto& e : encoders_) {
    append_stack_tensors(out, "encoder." + e.modality_id, e.stack);
  }
  for (auto& d : decoders_) {
    append_stack_tensors(out, "decoder." + d.task_id, d.stack);
  }
  return out;
}

std::vector<TensorRef> MultiModNModel::all_tensors() {
  std::vector<TensorRef> out;
  out.push_back({"initial_state", initial_state_});
  for (auto& e : encoders_) {
    append_stack_tensors(out, "encoder." + e.modality_id, e.stack);
  }
  for (auto& d : decoders_) {
    append_stack_tensors(out, "decoder." + d.task_id, d.stack);
  }
  return out;
}

std::size_t MultiModNModel::parameter_count() {
  std::size_t n = 0;
  for (const auto& t : all_tensors()) n += t.values.size();
  return n;
}

std::vector<double> MultiModNModel::save_values() {
  std::vector<double> out;
  for (const auto& t : all_tensors()) {
    out.insert(out.end(), t.values.begin(), t.values.end());
  }
  return out;
}

void MultiModNModel::restore_values(const std::vector<double>& values) {
  std::size_t pos = 0;
  for (auto& t : all_tensors()) {
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

namespace {

void glorot_init(MlpStack& stack, RandomStream& rng) {
  for (auto& layer : stack.layers) {
    const double fan_in = static_cast<double>(layer.in_dim());
    const double fan_out = static_cast<double>(layer.out_dim());
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    for (double& w : layer.weights.values()) {
      w = rng.uniform(-bound, bound);
    }
    // biases stay zero
  }
}

}  // namespace

MultiModNModel init_model(const ArchitectureSpec& arch, std::uint64_t seed) {
  if (arch.state_size == 0) throw ContractError("state_size must be >= 1");
  if (arch.encoders.empty()) throw ContractError("model needs >= 1 encoder");
  if (arch.decoders.empty()) throw ContractError("model needs >= 1 decoder");
  if (arch.hidden_size == 0) throw ContractError("hidden_size must be >= 1");

  MultiModNModel model;
  model.arch_ = arch;
  model.seed_ = seed;

  RandomStream s0_rng(derive_seed(seed, 0));
  model.initial_state_.resize(arch.state_size);
  for (double& v : model.initial_state_) v = s0_rng.uniform(-0.1, 0.1);

  for (std::size_t i = 0; i < arch.encoders.size(); ++i) {
    const EncoderSpec& spec = arch.encoders[i];
    if (spec.input_dim == 0) {
      throw ContractError("encoder " + spec.modality_id + " has zero dim");
    }
    Encoder e;
    e.modality_id = spec.modality_id;
    e.input_dim = spec.input_dim;
    e.stack = MlpStack(arch.state_size + spec.input_dim, arch.hidden_size,
                       arch.state_size, arch.state_activation);
    RandomStream rng(derive_seed(seed, 1000 + i));
    glorot_init(e.stack, rng);
    model.encoders_.push_back(std::move(e));
  }

  for (std::size_t i = 0; i < arch.decoders.size(); ++i) {
    const DecoderSpec& spec = arch.decoders[i];
    Decoder d;
    d.task_id = spec.task_id;
    d.kind = spec.kind;
    d.classes = spec.classes;
    Activation out_act = Activation::kIdentity;
    if (spec.kind == TaskKind::kBinary) out_act = Activation::kSigmoid;
    if (spec.kind == TaskKind::kMulticlass) out_act = Activation::kSoftmax;
    d.stack = MlpStack(arch.state_size, arch.hidden_size, d.output_dim(),
                       out_act);
    RandomStream rng(derive_seed(seed, 2000 + i));
    glorot_init(d.stack, rng);
    model.decoders_.push_back(std::move(d));
  }
  return model;
}

std::vector<double> encode_step(const Encoder& encoder,
                                std::span<const double> state,
                                std::span<const double> x,
                                DropoutPlan& dropout) {
  if (x.size() != encoder.input_dim) {
    throw ShapeError("encode_step(" + encoder.modality_id + "): input length " +
                     std::to_string(x.size()) + " vs expected " +
                     std::to_string(encoder.input_dim));
  }
  std::vector<double> joint;
  joint.reserve(state.size() + x.size());
  joint.insert(joint.end(), state.begin(), state.end());
  joint.insert(joint.end(), x.begin(), x.end());
  StackCache cache;
  return stack_forward(encoder.stack, joint, dropout, cache);
}

double Prediction::scalar() const {
  if (kind == TaskKind::kMulticlass) return values.size() > 1 ? values[1] : 0.0;
  return values.front();
}

Prediction decode(const Decoder& decoder, std::span<const double> state) {
  if (state.size() != decoder.stack.in_dim()) {
    throw ShapeError("decode(" + decoder.task_id + "): state length " +
                     std::to_string(state.size()) + " vs expected " +
                     std::to_string(decoder.stack.in_dim()));
  }
  Prediction p;
  p.kind = decoder.kind;
  p.values = stack_forward(decoder.stack, state);
  return p;
}

EncodingPlan EncodingPlan::full(const MultiModNModel& model) {
  EncodingPlan plan;
  plan.encoder_order.resize(model.encoders().size());
  for (std::size_t i = 0; i < plan.encoder_order.size(); ++i) {
    plan.encoder_order[i] = i;
  }
  return plan;
}

EncodingPlan EncodingPlan::of_modalities(const MultiModNModel& model,
                                         const std::vector<std::string>& ids) {
  EncodingPlan plan;
  for (const auto& id : ids) plan.encoder_order.push_back(model.encoder_index(id));
  return plan;
}

const std::vector<double>& StateTrajectory::state_at_end_of(
    std::size_t timestep) const {
  const std::vector<double>* best = &steps.front().state;
  for (const auto& step : steps) {
    if (step.timestep <= timestep) best = &step.state;
  }
  return *best;
}

StateTrajectory forward_sequence(const MultiModNModel& model,
                                 const MultiModSample& sample,
                                 const EncodingPlan& plan,
                                 DropoutPlan& dropout,
                                 TrajectoryCaches* caches) {
  for (std::size_t idx : plan.encoder_order) {
    if (idx >= model.encoders().size()) {
      throw ContractError("encoding plan names unknown encoder index " +
                          std::to_string(idx));
    }
  }
  if (sample.encoding_sequence.has_value() &&
      sample.encoding_sequence->size() != sample.data.size()) {
    throw ContractError("encoding_sequence length " +
                        std::to_string(sample.encoding_sequence->size()) +
                        " != data length " +
                        std::to_string(sample.data.size()));
  }

  StateTrajectory traj;
  traj.steps.push_back({0, std::nullopt, model.initial_state()});
  if (caches != nullptr) caches->encoder_caches.clear();

  std::vector<double> state = model.initial_state();
  for (std::size_t t = 0; t < sample.data.size(); ++t) {
    const std::vector<std::size_t>& order =
        sample.encoding_sequence.has_value() ? (*sample.encoding_sequence)[t]
                                             : plan.encoder_order;
    for (std::size_t idx : order) {
      if (idx >= model.encoders().size()) {
        throw ContractError("encoding sequence names unknown encoder index " +
                            std::to_string(idx));
      }
      const auto& x = sample.data[t].at(idx);
      if (!x.has_value()) {
        traj.skips.push_back({t, idx});
        continue;
      }
      const Encoder& encoder = model.encoders()[idx];
      if (x->size() != encoder.input_dim) {
        throw ShapeError("modality " + encoder.modality_id + " at timestep " +
                         std::to_string(t) + ": length " +
                         std::to_string(x->size()) + " vs expected " +
                         std::to_string(encoder.input_dim));
      }
      std::vector<double> joint;
      joint.reserve(state.size() + x->size());
      joint.insert(joint.end(), state.begin(), state.end());
      joint.insert(joint.end(), x->begin(), x->end());
      StackCache cache;
      state = stack_forward(encoder.stack, joint, dropout, cache);
      if (caches != nullptr) {
        caches->encoder_caches.push_back(std::move(cache));
      }
      traj.steps.push_back({t, idx, state});
    }
  }
  return traj;
}

PredictionGrid predict_trajectory(const MultiModNModel& model,
                                  const StateTrajectory& trajectory) {
  PredictionGrid grid;
  grid.reserve(trajectory.steps.size());
  for (const auto& step : trajectory.steps) {
    std::vector<Prediction> row;
    row.reserve(model.decoders().size());
    for (const auto& d : model.decoders()) {
      row.push_back(decode(d, step.state));
    }
    grid.push_back(std::move(row));
  }
  return grid;
}

std::vector<Prediction> predict_final(const MultiModNModel& model,
                                      const MultiModSample& sample) {
  DropoutPlan eval = DropoutPlan::eval();
  const EncodingPlan plan = EncodingPlan::full(model);
  const StateTrajectory traj = forward_sequence(model, sample, plan, eval);
  std::vector<Prediction> out;
  for (const auto& d : model.decoders()) {
    out.push_back(decode(d, traj.final_state()));
  }
  return out;
}

}  // namespace mmn
