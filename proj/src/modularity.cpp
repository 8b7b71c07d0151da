#include "multimodn/modularity.hpp"

#include "multimodn/errors.hpp"

namespace mmn {

GroupMatrix build_group_matrix(std::size_t n_modalities,
                               std::size_t n_tasks) {
  if (n_modalities == 0 || n_tasks == 0) {
    throw ContractError("group matrix needs >= 1 modality and >= 1 task");
  }
  const double m =
      static_cast<double>(n_modalities * (n_tasks + 2) - 1);
  GroupMatrix g;
  g.n_modalities = n_modalities;
  g.n_tasks = n_tasks;
  g.edge_total = n_modalities * (n_tasks + 2) - 1;
  g.fractions = Matrix(n_modalities, n_modalities);
  const double diag = static_cast<double>(n_tasks + 1) / m;
  const double off = 1.0 / m;
  for (std::size_t i = 0; i < n_modalities; ++i) {
    g.fractions(i, i) = diag;
    if (i + 1 < n_modalities) {
      g.fractions(i, i + 1) = off;
      g.fractions(i + 1, i) = off;
    }
  }
  return g;
}

double modularity_from_matrix(const GroupMatrix& g) {
  const Matrix& a = g.fractions;
  const std::size_t n = a.rows();
  double trace = 0.0;
  for (std::size_t i = 0; i < n; ++i) trace += a(i, i);

  double square_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double cell = 0.0;
      for (std::size_t k = 0; k < n; ++k) cell += a(i, k) * a(k, j);
      square_sum += cell;
    }
  }
  return trace - square_sum;
}

double modularity_closed_form(std::size_t n_modalities, std::size_t n_tasks) {
  if (n_modalities < 2) {
    throw ContractError(
        "closed form needs >= 2 modalities; use the explicit matrix path");
  }
  if (n_tasks == 0) throw ContractError("closed form needs >= 1 task");
  const double M = static_cast<double>(n_modalities);
  const double T = static_cast<double>(n_tasks);
  const double m = M * (T + 2.0) - 1.0;
  const double trace = M * (T + 1.0) / m;
  const double g2_sum =
      (M * T * T + 6.0 * M * T + 9.0 * M - 4.0 * T - 10.0) / (m * m);
  return trace - g2_sum;
}

ModularityBreakdown modularity_breakdown(std::size_t n_modalities,
                                         std::size_t n_tasks) {
  const GroupMatrix g = build_group_matrix(n_modalities, n_tasks);
  ModularityBreakdown b;
  b.edge_total = g.edge_total;
  for (std::size_t i = 0; i < g.fractions.rows(); ++i) {
    b.trace += g.fractions(i, i);
  }
  b.q = modularity_from_matrix(g);
  b.g2_sum = b.trace - b.q;
  return b;
}

}  // namespace mmn
