#pragma once

#include <stdexcept>
#include <string>

namespace mmn {

/// Dimension disagreement between tensors/layers. Message names both shapes.
class ShapeError : public std::runtime_error {
 public:
  explicit ShapeError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Violated API precondition (empty batch, unknown id, bad range, ...).
class ContractError : public std::runtime_error {
 public:
  explicit ContractError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Non-finite values or diverging optimization.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed files: manifests, CSV data, model documents.
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Metric that has no defined value on the given inputs (e.g. AUROC with a
/// single class present).
class UndefinedMetricError : public std::runtime_error {
 public:
  explicit UndefinedMetricError(const std::string& msg)
      : std::runtime_error(msg) {}
};

}  // namespace mmn
