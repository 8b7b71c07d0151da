#include "multimodn/serialize.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "multimodn/errors.hpp"

namespace mmn {

using ordered_json = nlohmann::ordered_json;

namespace {

constexpr int kFormatVersion = 1;

ordered_json weights_object(std::vector<TensorRef> tensors) {
  ordered_json w = ordered_json::object();
  for (const auto& t : tensors) {
    w[t.name] = std::vector<double>(t.values.begin(), t.values.end());
  }
  return w;
}

void load_weights(const ordered_json& w, std::vector<TensorRef> tensors) {
  for (auto& t : tensors) {
    if (!w.contains(t.name)) {
      throw FormatError("model document missing tensor " + t.name);
    }
    const auto& arr = w.at(t.name);
    if (arr.size() != t.values.size()) {
      throw FormatError("tensor " + t.name + ": expected " +
                        std::to_string(t.values.size()) + " values, found " +
                        std::to_string(arr.size()));
    }
    for (std::size_t i = 0; i < t.values.size(); ++i) {
      t.values[i] = arr.at(i).get<double>();
    }
  }
  if (w.size() != tensors.size()) {
    throw FormatError("model document has " + std::to_string(w.size()) +
                      " tensors, architecture has " +
                      std::to_string(tensors.size()));
  }
}

ordered_json parse_document(const std::string& document,
                            const std::string& expected_type) {
  ordered_json j;
  try {
    j = ordered_json::parse(document);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("model document: ") + e.what());
  }
  const int version = j.value("format_version", -1);
  if (version != kFormatVersion) {
    throw FormatError("model document version " + std::to_string(version) +
                      ", loader supports " + std::to_string(kFormatVersion));
  }
  const std::string type = j.value("type", "");
  if (type != expected_type) {
    throw FormatError("model document type '" + type + "', expected '" +
                      expected_type + "'");
  }
  return j;
}

}  // namespace

std::string serialize_model(MultiModNModel& model) {
  ordered_json j;
  j["format_version"] = kFormatVersion;
  j["type"] = "multimodn";
  j["seed"] = model.seed();
  j["state_size"] = model.arch().state_size;
  j["hidden_size"] = model.arch().hidden_size;
  j["state_activation"] = activation_name(model.arch().state_activation);
  j["train_initial_state"] = model.arch().train_initial_state;
  j["encoders"] = ordered_json::array();
  for (const auto& e : model.arch().encoders) {
    j["encoders"].push_back(
        {{"modality_id", e.modality_id}, {"input_dim", e.input_dim}});
  }
  j["decoders"] = ordered_json::array();
  for (const auto& d : model.arch().decoders) {
    j["decoders"].push_back({{"task_id", d.task_id},
                             {"kind", task_kind_name(d.kind)},
                             {"classes", d.classes}});
  }
  j["weights"] = weights_object(model.all_tensors());
  return j.dump();
}

std::string serialize_model(PFusionModel& model) {
  ordered_json j;
  j["format_version"] = kFormatVersion;
  j["type"] = "pfusion";
  j["seed"] = model.seed();
  j["hidden_size"] = model.hidden_size();
  j["modalities"] = ordered_json::array();
  for (const auto& m : model.modalities()) {
    j["modalities"].push_back(
        {{"modality_id", m.modality_id}, {"input_dim", m.input_dim}});
  }
  j["task"] = {{"task_id", model.task().task_id},
               {"kind", task_kind_name(model.task().kind)},
               {"classes", model.task().classes}};
  j["weights"] = weights_object(model.parameters());
  return j.dump();
}

MultiModNModel deserialize_multimodn(const std::string& document) {
  const ordered_json j = parse_document(document, "multimodn");
  try {
    ArchitectureSpec arch;
    arch.state_size = j.at("state_size").get<std::size_t>();
    arch.hidden_size = j.at("hidden_size").get<std::size_t>();
    arch.state_activation =
        activation_from_name(j.at("state_activation").get<std::string>());
    arch.train_initial_state = j.at("train_initial_state").get<bool>();
    for (const auto& je : j.at("encoders")) {
      arch.encoders.push_back({je.at("modality_id").get<std::string>(),
                               je.at("input_dim").get<std::size_t>()});
    }
    for (const auto& jd : j.at("decoders")) {
      arch.decoders.push_back(
          {jd.at("task_id").get<std::string>(),
           task_kind_from_name(jd.at("kind").get<std::string>()),
           jd.at("classes").get<std::size_t>()});
    }
    MultiModNModel model =
        init_model(arch, j.at("seed").get<std::uint64_t>());
    load_weights(j.at("weights"), model.all_tensors());
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("model document: ") + e.what());
  }
}

PFusionModel deserialize_pfusion(const std::string& document) {
  const ordered_json j = parse_document(document, "pfusion");
  try {
    std::vector<EncoderSpec> mods;
    for (const auto& jm : j.at("modalities")) {
      mods.push_back({jm.at("modality_id").get<std::string>(),
                      jm.at("input_dim").get<std::size_t>()});
    }
    const auto& jt = j.at("task");
    DecoderSpec task{jt.at("task_id").get<std::string>(),
                     task_kind_from_name(jt.at("kind").get<std::string>()),
                     jt.at("classes").get<std::size_t>()};
    PFusionModel model =
        init_pfusion(mods, task, j.at("hidden_size").get<std::size_t>(),
                     j.at("seed").get<std::uint64_t>());
    load_weights(j.at("weights"), model.parameters());
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("model document: ") + e.what());
  }
}

std::string model_document_type(const std::string& document) {
  try {
    return ordered_json::parse(document).value("type", "");
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("model document: ") + e.what());
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write file: " + path);
  out << content;
}

void save_model_file(MultiModNModel& model, const std::string& path) {
  write_text_file(path, serialize_model(model));
}

void save_model_file(PFusionModel& model, const std::string& path) {
  write_text_file(path, serialize_model(model));
}

MultiModNModel load_multimodn_file(const std::string& path) {
  return deserialize_multimodn(read_text_file(path));
}

PFusionModel load_pfusion_file(const std::string& path) {
  return deserialize_pfusion(read_text_file(path));
}

}  // namespace mmn
