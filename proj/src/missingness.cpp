#include "multimodn/missingness.hpp"

#include <cmath>

#include "multimodn/errors.hpp"
#include "multimodn/rng.hpp"

namespace mmn {

std::string missingness_mode_name(MissingnessMode m) {
  switch (m) {
    case MissingnessMode::kNone: return "none";
    case MissingnessMode::kMar: return "mar";
    case MissingnessMode::kMnar: return "mnar";
  }
  return "?";
}

MissingnessMode missingness_mode_from_name(const std::string& name) {
  if (name == "none") return MissingnessMode::kNone;
  if (name == "mar") return MissingnessMode::kMar;
  if (name == "mnar") return MissingnessMode::kMnar;
  throw FormatError("unknown missingness mode: " + name);
}

void MissingnessSpec::validate() const {
  if (rate < 0.0 || rate > 1.0) {
    throw ContractError("missingness rate must be in [0,1], got " +
                        std::to_string(rate));
  }
  if (mode == MissingnessMode::kMnar && !target_class.has_value()) {
    throw ContractError("mnar spec needs a target class");
  }
  if (mode != MissingnessMode::kMnar && target_class.has_value()) {
    throw ContractError("target class is only valid for mnar");
  }
}

Dataset apply_missingness(const Dataset& dataset,
                          const MissingnessSpec& spec) {
  spec.validate();
  if (spec.mode == MissingnessMode::kNone || spec.rate == 0.0) return dataset;

  const std::size_t m = dataset.manifest.modality_index(spec.modality);

  std::vector<std::size_t> pool;
  if (spec.mode == MissingnessMode::kMnar) {
    const TaskSpec& st =
        dataset.manifest.tasks.at(dataset.manifest.stratify_task);
    if (st.kind != TaskKind::kBinary) {
      throw ContractError("mnar injection needs a binary stratification task");
    }
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      if (dataset.stratify_label(i) == *spec.target_class) pool.push_back(i);
    }
  } else {
    pool.resize(dataset.size());
    for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;
  }

  const auto n_erase =
      static_cast<std::size_t>(std::lround(spec.rate * pool.size()));
  RandomStream rng(spec.seed);
  rng.shuffle(pool);

  Dataset out = dataset;
  for (std::size_t i = 0; i < n_erase; ++i) {
    MultiModSample& sample = out.samples[pool[i]];
    for (auto& step : sample.data) step[m].reset();
  }
  return out;
}

MissingnessSpec flip_spec(const MissingnessSpec& spec) {
  if (spec.mode != MissingnessMode::kMnar) {
    throw ContractError("flip_spec only applies to mnar");
  }
  MissingnessSpec flipped = spec;
  flipped.target_class = *spec.target_class == 0 ? 1 : 0;
  return flipped;
}

}  // namespace mmn
