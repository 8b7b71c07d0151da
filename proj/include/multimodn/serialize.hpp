#pragma once

#include <string>

#include "multimodn/model.hpp"
#include "multimodn/pfusion.hpp"

namespace mmn {

/// Versioned JSON model document: header (format version, type tag,
/// architecture, seed) followed by flat per-tensor weight arrays in
/// declaration order, full-precision decimals. Canonical field order, so
/// re-serializing a parsed document is byte-identical.
std::string serialize_model(MultiModNModel& model);
std::string serialize_model(PFusionModel& model);

MultiModNModel deserialize_multimodn(const std::string& document);
PFusionModel deserialize_pfusion(const std::string& document);

/// The document's type tag ("multimodn" or "pfusion").
std::string model_document_type(const std::string& document);

void save_model_file(MultiModNModel& model, const std::string& path);
void save_model_file(PFusionModel& model, const std::string& path);
MultiModNModel load_multimodn_file(const std::string& path);
PFusionModel load_pfusion_file(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace mmn
