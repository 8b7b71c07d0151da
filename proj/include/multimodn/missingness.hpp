#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "multimodn/data.hpp"

namespace mmn {

enum class MissingnessMode { kNone, kMar, kMnar };

std::string missingness_mode_name(MissingnessMode m);
MissingnessMode missingness_mode_from_name(const std::string& name);

/// Recipe for injecting missingness into one modality.
///
/// MNAR erases the modality in a fraction of one class only (missingness
/// carries label information); MAR erases the same fraction drawn from all
/// samples regardless of class.
struct MissingnessSpec {
  MissingnessMode mode = MissingnessMode::kNone;
  std::string modality;
  double rate = 0.0;
  std::optional<int> target_class;  // mnar only
  std::uint64_t seed = 0;

  void validate() const;
};

/// Returns a copy of the dataset with the spec applied. Selected samples
/// have the named modality erased at every timestep; feature values are
/// never altered, only presence.
Dataset apply_missingness(const Dataset& dataset, const MissingnessSpec& spec);

/// The label-flipped test condition: same spec, opposite target class.
/// Requires mode == mnar and a binary stratification task.
MissingnessSpec flip_spec(const MissingnessSpec& spec);

}  // namespace mmn
