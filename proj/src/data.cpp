#include "multimodn/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>

#include <json.hpp>

#include "multimodn/errors.hpp"
#include "multimodn/rng.hpp"

namespace mmn {

using ordered_json = nlohmann::ordered_json;

std::string task_kind_name(TaskKind k) {
  switch (k) {
    case TaskKind::kBinary: return "binary";
    case TaskKind::kMulticlass: return "multiclass";
    case TaskKind::kRegression: return "regression";
  }
  return "?";
}

TaskKind task_kind_from_name(const std::string& name) {
  if (name == "binary") return TaskKind::kBinary;
  if (name == "multiclass") return TaskKind::kMulticlass;
  if (name == "regression") return TaskKind::kRegression;
  throw FormatError("unknown task kind: " + name);
}

std::size_t DatasetManifest::modality_index(const std::string& name) const {
  for (std::size_t i = 0; i < modalities.size(); ++i) {
    if (modalities[i].name == name) return i;
  }
  throw ContractError("unknown modality: " + name);
}

std::size_t DatasetManifest::task_index(const std::string& name) const {
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (tasks[i].name == name) return i;
  }
  throw ContractError("unknown task: " + name);
}

void DatasetManifest::validate() const {
  if (modalities.empty()) throw FormatError("manifest: no modalities");
  if (tasks.empty()) throw FormatError("manifest: no tasks");
  if (timesteps == 0) throw FormatError("manifest: timesteps must be >= 1");
  if (stratify_task >= tasks.size()) {
    throw FormatError("manifest: stratify_task out of range");
  }
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  for (const auto& m : modalities) {
    if (m.dim == 0) throw FormatError("manifest: modality " + m.name +
                                      " has zero dim");
    if (m.col_end - m.col_start != m.dim) {
      throw FormatError("manifest: modality " + m.name +
                        " column span does not match dim");
    }
    if (m.col_start < 2) {
      throw FormatError("manifest: modality " + m.name +
                        " span overlaps id columns");
    }
    spans.emplace_back(m.col_start, m.col_end);
  }
  for (const auto& t : tasks) {
    if (t.kind == TaskKind::kMulticlass && t.classes < 2) {
      throw FormatError("manifest: multiclass task " + t.name +
                        " needs >= 2 classes");
    }
    spans.emplace_back(t.column, t.column + 1);
  }
  std::sort(spans.begin(), spans.end());
  for (std::size_t i = 1; i < spans.size(); ++i) {
    if (spans[i].first < spans[i - 1].second) {
      throw FormatError("manifest: overlapping column spans at column " +
                        std::to_string(spans[i].first));
    }
  }
}

bool TargetValue::valid_at(std::size_t t) const {
  if (!per_timestep) return !std::isnan(values.front());
  return t < values.size() && !std::isnan(values[t]);
}

Dataset Dataset::subset(const std::vector<std::size_t>& indices) const {
  Dataset out;
  out.manifest = manifest;
  out.provenance = provenance + "#subset(" + std::to_string(indices.size()) +
                   ")";
  out.samples.reserve(indices.size());
  for (std::size_t i : indices) out.samples.push_back(samples.at(i));
  return out;
}

int Dataset::stratify_label(std::size_t sample_index) const {
  const TaskSpec& task = manifest.tasks.at(manifest.stratify_task);
  if (task.kind == TaskKind::kRegression) {
    throw ContractError("stratification task " + task.name +
                        " must be binary or multiclass");
  }
  const TargetValue& tv = samples.at(sample_index).targets.at(
      manifest.stratify_task);
  if (tv.per_timestep) {
    throw ContractError("stratification task " + task.name +
                        " must be a static target");
  }
  return static_cast<int>(std::lround(tv.values.front()));
}

// ---------------------------------------------------------------------------
// Synthetic generation

void SynthSpec::validate() const {
  if (n_samples == 0 || latent_dim == 0 || timesteps == 0) {
    throw ContractError("synthetic spec: zero-sized field");
  }
  if (modalities.empty()) throw ContractError("synthetic spec: no modalities");
  if (tasks.empty()) throw ContractError("synthetic spec: no tasks");
  for (const auto& m : modalities) {
    if (m.dim == 0) {
      throw ContractError("synthetic spec: modality " + m.name +
                          " has zero dim");
    }
  }
  if (noise_scale < 0.0) throw ContractError("synthetic spec: negative noise");
  for (const auto& t : tasks) {
    if (t.kind == TaskKind::kMulticlass) {
      throw ContractError("synthetic spec: multiclass tasks not generated");
    }
  }
}

namespace {

std::vector<double> unit_vector(std::vector<double> v) {
  const double n = std::sqrt(l2_norm_squared(v));
  if (n > 0.0) {
    for (double& x : v) x /= n;
  }
  return v;
}

std::vector<double> draw_normals(RandomStream& rng, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

DatasetManifest canonical_manifest(const SynthSpec& spec) {
  DatasetManifest m;
  std::size_t col = 2;  // after sample_id, timestep
  for (const auto& mod : spec.modalities) {
    ModalitySpec ms;
    ms.name = mod.name;
    ms.dim = mod.dim;
    ms.col_start = col;
    ms.col_end = col + mod.dim;
    col += mod.dim;
    m.modalities.push_back(ms);
  }
  for (const auto& task : spec.tasks) {
    TaskSpec ts;
    ts.name = task.name;
    ts.kind = task.kind;
    ts.column = col++;
    ts.per_timestep = false;
    m.tasks.push_back(ts);
  }
  m.timesteps = spec.timesteps;
  m.stratify_task = 0;
  for (std::size_t i = 0; i < spec.tasks.size(); ++i) {
    if (spec.tasks[i].kind == TaskKind::kBinary) {
      m.stratify_task = i;
      break;
    }
  }
  return m;
}

}  // namespace

Dataset generate_synthetic(const SynthSpec& spec,
                           SynthGroundTruth* ground_truth) {
  spec.validate();
  const std::size_t k = spec.latent_dim;

  // Task directions, unit length.
  std::vector<std::vector<double>> directions;
  for (std::size_t i = 0; i < spec.tasks.size(); ++i) {
    const std::uint64_t s = spec.tasks[i].projection_seed != 0
                                ? spec.tasks[i].projection_seed
                                : derive_seed(spec.seed, 0x7A50 + i);
    RandomStream rng(s);
    directions.push_back(unit_vector(draw_normals(rng, k)));
  }

  // Mixing matrices. The first rows are tilted toward the task directions so
  // every signal modality carries predictive signal for every task.
  std::vector<Matrix> mixing;
  for (std::size_t m = 0; m < spec.modalities.size(); ++m) {
    const auto& mod = spec.modalities[m];
    Matrix a(mod.dim, k);
    if (mod.signal) {
      const std::uint64_t s = mod.mixing_seed != 0
                                  ? mod.mixing_seed
                                  : derive_seed(spec.seed, 0x30D0 + m);
      RandomStream rng(s);
      for (std::size_t r = 0; r < mod.dim; ++r) {
        std::vector<double> row = draw_normals(rng, k);
        if (r < directions.size()) {
          row = unit_vector(row);
          for (std::size_t j = 0; j < k; ++j) {
            row[j] = directions[r][j] + 0.25 * row[j];
          }
        }
        row = unit_vector(row);
        for (std::size_t j = 0; j < k; ++j) a(r, j) = row[j];
      }
    }
    mixing.push_back(std::move(a));
  }

  RandomStream rng(derive_seed(spec.seed, 0xDA7A));
  Dataset ds;
  ds.manifest = canonical_manifest(spec);
  ds.provenance = "synthetic:" + synth_spec_to_json(spec);

  std::vector<std::vector<double>> latents;
  std::vector<std::vector<double>> raw_regression(spec.tasks.size());
  for (std::size_t s = 0; s < spec.n_samples; ++s) {
    const std::vector<double> z = draw_normals(rng, k);
    MultiModSample sample;
    sample.data.resize(spec.timesteps);
    for (std::size_t t = 0; t < spec.timesteps; ++t) {
      sample.data[t].resize(spec.modalities.size());
      for (std::size_t m = 0; m < spec.modalities.size(); ++m) {
        const auto& mod = spec.modalities[m];
        std::vector<double> x(mod.dim);
        if (mod.signal) {
          x = mixing[m].matvec(z);
          for (double& v : x) v += spec.noise_scale * rng.normal();
        } else {
          for (double& v : x) v = rng.normal();
        }
        sample.data[t][m] = std::move(x);
      }
    }
    sample.targets.resize(spec.tasks.size());
    for (std::size_t i = 0; i < spec.tasks.size(); ++i) {
      const double proj = dot(directions[i], z);
      TargetValue& tv = sample.targets[i];
      tv.per_timestep = false;
      if (spec.tasks[i].kind == TaskKind::kBinary) {
        tv.values = {proj > 0.0 ? 1.0 : 0.0};
      } else {
        tv.values = {proj};  // rescaled below
        raw_regression[i].push_back(proj);
      }
    }
    ds.samples.push_back(std::move(sample));
    latents.push_back(z);
  }

  // Min-max rescale regression targets to [0, 1].
  for (std::size_t i = 0; i < spec.tasks.size(); ++i) {
    if (spec.tasks[i].kind != TaskKind::kRegression) continue;
    const auto [lo_it, hi_it] =
        std::minmax_element(raw_regression[i].begin(), raw_regression[i].end());
    const double lo = *lo_it, hi = *hi_it;
    const double span = hi > lo ? hi - lo : 1.0;
    for (auto& sample : ds.samples) {
      double& v = sample.targets[i].values.front();
      v = (v - lo) / span;
    }
  }

  if (ground_truth != nullptr) {
    ground_truth->mixing = std::move(mixing);
    ground_truth->task_directions = std::move(directions);
    ground_truth->latents = std::move(latents);
  }
  return ds;
}

// ---------------------------------------------------------------------------
// Spec JSON

namespace {

SynthSpec synth_spec_from_json(const ordered_json& j) {
  SynthSpec spec;
  spec.n_samples = j.at("n_samples").get<std::size_t>();
  spec.latent_dim = j.at("latent_dim").get<std::size_t>();
  spec.noise_scale = j.at("noise_scale").get<double>();
  spec.timesteps = j.value("timesteps", std::size_t{1});
  spec.seed = j.at("seed").get<std::uint64_t>();
  spec.modalities.clear();
  for (const auto& jm : j.at("modalities")) {
    SynthModalitySpec m;
    m.name = jm.at("name").get<std::string>();
    m.dim = jm.at("dim").get<std::size_t>();
    m.mixing_seed = jm.value("mixing_seed", std::uint64_t{0});
    m.signal = jm.value("signal", true);
    spec.modalities.push_back(m);
  }
  spec.tasks.clear();
  for (const auto& jt : j.at("tasks")) {
    SynthTaskSpec t;
    t.name = jt.at("name").get<std::string>();
    t.kind = task_kind_from_name(jt.at("kind").get<std::string>());
    t.projection_seed = jt.value("projection_seed", std::uint64_t{0});
    spec.tasks.push_back(t);
  }
  return spec;
}

}  // namespace

SynthSpec synth_spec_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open synthetic spec: " + path);
  ordered_json j;
  try {
    in >> j;
    return synth_spec_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("synthetic spec " + path + ": " + e.what());
  }
}

std::string synth_spec_to_json(const SynthSpec& spec) {
  ordered_json j;
  j["n_samples"] = spec.n_samples;
  j["latent_dim"] = spec.latent_dim;
  j["noise_scale"] = spec.noise_scale;
  j["timesteps"] = spec.timesteps;
  j["seed"] = spec.seed;
  j["modalities"] = ordered_json::array();
  for (const auto& m : spec.modalities) {
    j["modalities"].push_back({{"name", m.name},
                               {"dim", m.dim},
                               {"mixing_seed", m.mixing_seed},
                               {"signal", m.signal}});
  }
  j["tasks"] = ordered_json::array();
  for (const auto& t : spec.tasks) {
    j["tasks"].push_back({{"name", t.name},
                          {"kind", task_kind_name(t.kind)},
                          {"projection_seed", t.projection_seed}});
  }
  return j.dump();
}

// ---------------------------------------------------------------------------
// CSV + manifest I/O

namespace {

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

bool cell_is_missing(const std::string& cell) {
  return cell.empty() || cell == "NaN" || cell == "nan";
}

double parse_double(const std::string& cell, std::size_t line) {
  double v = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc{} || ptr != end) {
    throw FormatError("line " + std::to_string(line) +
                      ": cannot parse number '" + cell + "'");
  }
  return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  cells.push_back(cur);
  return cells;
}

DatasetManifest manifest_from_json(const ordered_json& j) {
  DatasetManifest m;
  for (const auto& jm : j.at("modalities")) {
    ModalitySpec ms;
    ms.name = jm.at("name").get<std::string>();
    ms.dim = jm.at("dim").get<std::size_t>();
    const auto& span = jm.at("columns");
    ms.col_start = span.at(0).get<std::size_t>();
    ms.col_end = span.at(1).get<std::size_t>();
    ms.treat_missing_as_zero = jm.value("treat_missing_as_zero", false);
    m.modalities.push_back(ms);
  }
  for (const auto& jt : j.at("tasks")) {
    TaskSpec ts;
    ts.name = jt.at("name").get<std::string>();
    ts.kind = task_kind_from_name(jt.at("kind").get<std::string>());
    ts.classes = jt.value("classes", std::size_t{2});
    ts.column = jt.at("column").get<std::size_t>();
    ts.per_timestep = jt.value("per_timestep", false);
    m.tasks.push_back(ts);
  }
  m.timesteps = j.at("timesteps").get<std::size_t>();
  const auto& strat = j.at("stratify_task");
  m.stratify_task = strat.is_string()
                        ? m.task_index(strat.get<std::string>())
                        : strat.get<std::size_t>();
  m.validate();
  return m;
}

ordered_json manifest_to_json(const DatasetManifest& m) {
  ordered_json j;
  j["modalities"] = ordered_json::array();
  for (const auto& ms : m.modalities) {
    ordered_json jm{{"name", ms.name},
                    {"dim", ms.dim},
                    {"columns", {ms.col_start, ms.col_end}}};
    if (ms.treat_missing_as_zero) jm["treat_missing_as_zero"] = true;
    j["modalities"].push_back(jm);
  }
  j["tasks"] = ordered_json::array();
  for (const auto& ts : m.tasks) {
    ordered_json jt{{"name", ts.name},
                    {"kind", task_kind_name(ts.kind)},
                    {"column", ts.column},
                    {"per_timestep", ts.per_timestep}};
    if (ts.kind == TaskKind::kMulticlass) jt["classes"] = ts.classes;
    j["tasks"].push_back(jt);
  }
  j["timesteps"] = m.timesteps;
  j["stratify_task"] = m.tasks.at(m.stratify_task).name;
  return j;
}

}  // namespace

Dataset load_dataset(const std::string& manifest_path,
                     const std::string& data_path) {
  std::ifstream min(manifest_path);
  if (!min) throw FormatError("cannot open manifest: " + manifest_path);
  ordered_json jm;
  DatasetManifest manifest;
  try {
    min >> jm;
    manifest = manifest_from_json(jm);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("manifest " + manifest_path + ": " + e.what());
  }

  std::ifstream in(data_path);
  if (!in) throw FormatError("cannot open data file: " + data_path);

  std::size_t expected_cols = 2;
  for (const auto& m : manifest.modalities) {
    expected_cols = std::max(expected_cols, m.col_end);
  }
  for (const auto& t : manifest.tasks) {
    expected_cols = std::max(expected_cols, t.column + 1);
  }

  Dataset ds;
  ds.manifest = manifest;
  ds.provenance = "file:" + data_path;

  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw FormatError("empty data file");
  line_no = 1;
  const std::size_t header_cols = split_csv_line(line).size();
  if (header_cols < expected_cols) {
    throw FormatError("header has " + std::to_string(header_cols) +
                      " columns, manifest needs " +
                      std::to_string(expected_cols));
  }

  std::map<std::string, std::size_t> sample_index_by_id;
  std::vector<std::string> sample_ids;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != header_cols) {
      throw FormatError("line " + std::to_string(line_no) + ": has " +
                        std::to_string(cells.size()) + " cells, header has " +
                        std::to_string(header_cols));
    }
    const std::string& sid = cells[0];
    const auto t =
        static_cast<std::size_t>(parse_double(cells[1], line_no));
    if (t >= manifest.timesteps) {
      throw FormatError("line " + std::to_string(line_no) + ": timestep " +
                        std::to_string(t) + " out of range");
    }
    auto [it, inserted] =
        sample_index_by_id.try_emplace(sid, ds.samples.size());
    if (inserted) {
      MultiModSample s;
      s.data.assign(manifest.timesteps,
                    std::vector<std::optional<std::vector<double>>>(
                        manifest.modalities.size()));
      s.targets.resize(manifest.tasks.size());
      for (std::size_t k = 0; k < manifest.tasks.size(); ++k) {
        TargetValue& tv = s.targets[k];
        tv.per_timestep = manifest.tasks[k].per_timestep;
        tv.values.assign(tv.per_timestep ? manifest.timesteps : 1,
                         std::numeric_limits<double>::quiet_NaN());
      }
      ds.samples.push_back(std::move(s));
      sample_ids.push_back(sid);
    }
    MultiModSample& sample = ds.samples[it->second];

    for (std::size_t m = 0; m < manifest.modalities.size(); ++m) {
      const ModalitySpec& ms = manifest.modalities[m];
      std::vector<double> x(ms.dim);
      bool missing = false;
      for (std::size_t j = 0; j < ms.dim; ++j) {
        const std::string& cell = cells[ms.col_start + j];
        if (cell_is_missing(cell)) {
          if (ms.treat_missing_as_zero) {
            x[j] = 0.0;
          } else {
            missing = true;  // any missing cell marks the modality missing
            break;
          }
        } else {
          x[j] = parse_double(cell, line_no);
          if (std::isnan(x[j])) {
            missing = true;
            break;
          }
        }
      }
      if (!missing) sample.data[t][m] = std::move(x);
    }

    for (std::size_t k = 0; k < manifest.tasks.size(); ++k) {
      const TaskSpec& ts = manifest.tasks[k];
      const std::string& cell = cells[ts.column];
      TargetValue& tv = sample.targets[k];
      if (cell_is_missing(cell)) continue;
      const double v = parse_double(cell, line_no);
      if (ts.kind == TaskKind::kBinary && v != 0.0 && v != 1.0) {
        throw FormatError("line " + std::to_string(line_no) +
                          ": binary target " + ts.name + " is " + cell);
      }
      if (ts.kind == TaskKind::kMulticlass &&
          (v < 0.0 || v >= static_cast<double>(ts.classes) ||
           v != std::floor(v))) {
        throw FormatError("line " + std::to_string(line_no) +
                          ": class index " + cell + " out of range for " +
                          ts.name);
      }
      if (ts.per_timestep) {
        tv.values[t] = v;
      } else if (std::isnan(tv.values[0])) {
        tv.values[0] = v;
      } else if (tv.values[0] != v) {
        throw FormatError("line " + std::to_string(line_no) +
                          ": static target " + ts.name +
                          " disagrees with earlier row");
      }
    }
  }
  return ds;
}

void save_dataset(const Dataset& dataset, const std::string& manifest_path,
                  const std::string& data_path) {
  // Canonical column layout: ids, modality blocks, task columns.
  DatasetManifest m = dataset.manifest;
  std::size_t col = 2;
  for (auto& ms : m.modalities) {
    ms.col_start = col;
    ms.col_end = col + ms.dim;
    col += ms.dim;
  }
  for (auto& ts : m.tasks) ts.column = col++;
  m.validate();

  std::ofstream mout(manifest_path);
  if (!mout) throw FormatError("cannot write manifest: " + manifest_path);
  mout << manifest_to_json(m).dump(2) << "\n";

  std::ofstream out(data_path);
  if (!out) throw FormatError("cannot write data file: " + data_path);
  out << "sample_id,timestep";
  for (const auto& ms : m.modalities) {
    for (std::size_t j = 0; j < ms.dim; ++j) {
      out << "," << ms.name << "_" << j;
    }
  }
  for (const auto& ts : m.tasks) out << "," << ts.name;
  out << "\n";

  for (std::size_t s = 0; s < dataset.samples.size(); ++s) {
    const MultiModSample& sample = dataset.samples[s];
    for (std::size_t t = 0; t < m.timesteps; ++t) {
      out << s << "," << t;
      for (std::size_t mi = 0; mi < m.modalities.size(); ++mi) {
        const auto& x = sample.data[t][mi];
        for (std::size_t j = 0; j < m.modalities[mi].dim; ++j) {
          out << ",";
          if (x.has_value()) out << format_double((*x)[j]);
        }
      }
      for (std::size_t k = 0; k < m.tasks.size(); ++k) {
        const TargetValue& tv = sample.targets[k];
        out << ",";
        const double v = tv.per_timestep ? tv.values[t] : tv.values[0];
        if (!std::isnan(v)) out << format_double(v);
      }
      out << "\n";
    }
  }
}

// ---------------------------------------------------------------------------
// Normalization

NormalizationRanges compute_minmax_ranges(
    const Dataset& dataset, const std::vector<std::size_t>& indices) {
  std::vector<std::size_t> all;
  if (indices.empty()) {
    all.resize(dataset.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  }
  const std::vector<std::size_t>& idx = indices.empty() ? all : indices;

  const auto& mods = dataset.manifest.modalities;
  NormalizationRanges nr;
  nr.ranges.resize(mods.size());
  for (std::size_t m = 0; m < mods.size(); ++m) {
    nr.ranges[m].assign(mods[m].dim, FeatureRange{});
    std::vector<bool> seen(mods[m].dim, false);
    for (std::size_t i : idx) {
      const MultiModSample& s = dataset.samples.at(i);
      for (std::size_t t = 0; t < dataset.manifest.timesteps; ++t) {
        const auto& x = s.data[t][m];
        if (!x.has_value()) continue;
        for (std::size_t j = 0; j < mods[m].dim; ++j) {
          FeatureRange& r = nr.ranges[m][j];
          if (!seen[j]) {
            r.min = r.max = (*x)[j];
            seen[j] = true;
          } else {
            r.min = std::min(r.min, (*x)[j]);
            r.max = std::max(r.max, (*x)[j]);
          }
        }
      }
    }
    for (std::size_t j = 0; j < mods[m].dim; ++j) {
      if (!seen[j]) {
        throw ContractError("feature " + mods[m].name + "_" +
                            std::to_string(j) + " has no observed values");
      }
      if (nr.ranges[m][j].max == nr.ranges[m][j].min) {
        nr.ranges[m][j].constant = true;
        nr.constant_features.push_back(mods[m].name + "_" +
                                       std::to_string(j));
      }
    }
  }
  return nr;
}

Dataset apply_minmax(const Dataset& dataset,
                     const NormalizationRanges& ranges) {
  Dataset out = dataset;
  for (auto& sample : out.samples) {
    for (auto& step : sample.data) {
      for (std::size_t m = 0; m < step.size(); ++m) {
        if (!step[m].has_value()) continue;
        auto& x = *step[m];
        for (std::size_t j = 0; j < x.size(); ++j) {
          const FeatureRange& r = ranges.ranges.at(m).at(j);
          if (r.constant) {
            x[j] = 0.0;
          } else {
            x[j] = std::clamp((x[j] - r.min) / (r.max - r.min), 0.0, 1.0);
          }
        }
      }
    }
  }
  return out;
}

std::pair<Dataset, NormalizationRanges> minmax_normalize(
    const Dataset& dataset) {
  NormalizationRanges nr = compute_minmax_ranges(dataset);
  return {apply_minmax(dataset, nr), std::move(nr)};
}

// ---------------------------------------------------------------------------
// Folds

std::vector<FoldSplit> stratified_kfold(const Dataset& dataset,
                                        std::size_t shards,
                                        std::uint64_t seed) {
  if (shards != 10) {
    throw ContractError(
        "stratified_kfold realizes the 80-10-10 split; shards must be 10");
  }
  // Group by stratification label, shuffle within groups, deal round-robin.
  std::map<int, std::vector<std::size_t>> by_label;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    by_label[dataset.stratify_label(i)].push_back(i);
  }
  RandomStream rng(seed);
  std::vector<std::vector<std::size_t>> shard_members(shards);
  for (auto& [label, members] : by_label) {
    if (members.size() < shards) {
      throw ContractError("class " + std::to_string(label) + " has only " +
                          std::to_string(members.size()) +
                          " samples; need >= " + std::to_string(shards));
    }
    rng.shuffle(members);
    for (std::size_t i = 0; i < members.size(); ++i) {
      shard_members[i % shards].push_back(members[i]);
    }
  }

  std::vector<FoldSplit> folds;
  for (std::size_t test = 0; test < shards; test += 2) {
    FoldSplit fold;
    const std::size_t val = (test + 1) % shards;
    for (std::size_t s = 0; s < shards; ++s) {
      auto& dest = s == test ? fold.test
                 : s == val  ? fold.val
                             : fold.train;
      dest.insert(dest.end(), shard_members[s].begin(),
                  shard_members[s].end());
    }
    std::sort(fold.train.begin(), fold.train.end());
    std::sort(fold.val.begin(), fold.val.end());
    std::sort(fold.test.begin(), fold.test.end());
    folds.push_back(std::move(fold));
  }
  return folds;
}

}  // namespace mmn
