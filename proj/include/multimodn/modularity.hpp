#pragma once

#include <cstddef>

#include "multimodn/matrix.hpp"

namespace mmn {

/// Group-fraction matrix of the module graph: one group per module (encoder
/// + state + its decoders), g_ij = fraction of the network's edges
/// connecting group i to group j. Tridiagonal with diagonal (|T|+1)/m and
/// off-diagonals 1/m, where m = |M|(|T|+2) - 1 is the total edge count.
struct GroupMatrix {
  Matrix fractions;
  std::size_t edge_total = 0;
  std::size_t n_modalities = 0;
  std::size_t n_tasks = 0;
};

GroupMatrix build_group_matrix(std::size_t n_modalities, std::size_t n_tasks);

/// Q = tr(G) - |G^2| with |.| the sum of all entries of the matrix square,
/// computed by explicit multiplication.
double modularity_from_matrix(const GroupMatrix& g);

/// Closed-form Q; defined for n_modalities >= 2 (the corner term of the
/// derivation breaks at 1; use the explicit path there). Agrees with
/// modularity_from_matrix to 1e-12.
double modularity_closed_form(std::size_t n_modalities, std::size_t n_tasks);

struct ModularityBreakdown {
  double q = 0.0;
  double trace = 0.0;
  double g2_sum = 0.0;
  std::size_t edge_total = 0;
};

ModularityBreakdown modularity_breakdown(std::size_t n_modalities,
                                         std::size_t n_tasks);

}  // namespace mmn
