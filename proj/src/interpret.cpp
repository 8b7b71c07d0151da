#include "multimodn/interpret.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "multimodn/errors.hpp"

namespace mmn {

std::string imc_aggregation_name(ImcAggregation a) {
  return a == ImcAggregation::kMeanSigned ? "mean-signed" : "mean-absolute";
}

ImcAggregation imc_aggregation_from_name(const std::string& name) {
  if (name == "mean-signed" || name == "signed") {
    return ImcAggregation::kMeanSigned;
  }
  if (name == "mean-absolute" || name == "absolute") {
    return ImcAggregation::kMeanAbsolute;
  }
  throw FormatError("unknown aggregation: " + name);
}

ImportanceMatrix importance_scores(const MultiModNModel& model,
                                   const Dataset& dataset,
                                   ImcAggregation aggregation) {
  ImportanceMatrix out;
  out.aggregation = aggregation;
  for (const auto& e : model.encoders()) {
    out.modality_names.push_back(e.modality_id);
  }
  for (const auto& d : model.decoders()) out.task_names.push_back(d.task_id);

  const std::size_t n_mod = model.encoders().size();
  const std::size_t n_task = model.decoders().size();
  DropoutPlan eval_mode = DropoutPlan::eval();

  std::vector<double> prior(n_task);
  for (std::size_t k = 0; k < n_task; ++k) {
    prior[k] = decode(model.decoders()[k], model.initial_state()).scalar();
  }

  out.scores.assign(n_mod, std::vector<double>(n_task, 0.0));
  out.population.assign(n_mod, 0);
  for (const auto& sample : dataset.samples) {
    for (std::size_t m = 0; m < n_mod; ++m) {
      // First timestep at which the modality is present.
      const std::vector<double>* x = nullptr;
      for (std::size_t t = 0; t < sample.data.size() && x == nullptr; ++t) {
        if (sample.modality_present(t, m)) x = &*sample.data[t][m];
      }
      if (x == nullptr) continue;
      const std::vector<double> state =
          encode_step(model.encoders()[m], model.initial_state(), *x,
                      eval_mode);
      for (std::size_t k = 0; k < n_task; ++k) {
        const double diff =
            decode(model.decoders()[k], state).scalar() - prior[k];
        out.scores[m][k] +=
            aggregation == ImcAggregation::kMeanSigned ? diff : std::abs(diff);
      }
      out.population[m] += 1;
    }
  }
  for (std::size_t m = 0; m < n_mod; ++m) {
    if (out.population[m] == 0) {
      for (double& s : out.scores[m]) {
        s = std::numeric_limits<double>::quiet_NaN();
      }
      continue;
    }
    for (double& s : out.scores[m]) {
      s /= static_cast<double>(out.population[m]);
    }
  }
  return out;
}

CumulativeGrid cumulative_predictions(const MultiModNModel& model,
                                      const MultiModSample& sample) {
  DropoutPlan eval_mode = DropoutPlan::eval();
  const EncodingPlan plan = EncodingPlan::full(model);
  const StateTrajectory traj =
      forward_sequence(model, sample, plan, eval_mode);
  const PredictionGrid grid = predict_trajectory(model, traj);

  CumulativeGrid out;
  for (const auto& d : model.decoders()) out.task_names.push_back(d.task_id);
  const bool multi_t = sample.data.size() > 1;
  for (std::size_t p = 0; p < traj.steps.size(); ++p) {
    const auto& step = traj.steps[p];
    if (!step.encoder_index.has_value()) {
      out.step_labels.push_back("prior");
    } else {
      const std::string& id =
          model.encoders()[*step.encoder_index].modality_id;
      out.step_labels.push_back(
          multi_t ? "t" + std::to_string(step.timestep) + ":" + id : id);
    }
    std::vector<double> row;
    for (const auto& p_task : grid[p]) row.push_back(p_task.scalar());
    out.values.push_back(std::move(row));
  }
  return out;
}

namespace {

std::string grid_csv(const std::string& row_axis,
                     const std::vector<std::string>& row_labels,
                     const std::vector<std::string>& task_names,
                     const std::vector<std::vector<double>>& values,
                     const std::vector<std::size_t>* population) {
  std::ostringstream out;
  out << row_axis;
  for (const auto& t : task_names) out << "," << t;
  if (population != nullptr) out << ",population";
  out << "\n";
  for (std::size_t r = 0; r < row_labels.size(); ++r) {
    out << row_labels[r];
    for (double v : values[r]) {
      out << ",";
      if (!std::isnan(v)) out << v;
    }
    if (population != nullptr) out << "," << (*population)[r];
    out << "\n";
  }
  return out.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write file: " + path);
  out << content;
}

}  // namespace

std::string heatmap_csv(const ImportanceMatrix& matrix) {
  return grid_csv("modality", matrix.modality_names, matrix.task_names,
                  matrix.scores, &matrix.population);
}

std::string heatmap_csv(const CumulativeGrid& grid) {
  return grid_csv("step", grid.step_labels, grid.task_names, grid.values,
                  nullptr);
}

void export_heatmap(const ImportanceMatrix& matrix, const std::string& path) {
  write_file(path, heatmap_csv(matrix));
}

void export_heatmap(const CumulativeGrid& grid, const std::string& path) {
  write_file(path, heatmap_csv(grid));
}

}  // namespace mmn
