#pragma once

#include <cstddef>
#include <vector>

#include "mkot/core.hpp"

namespace mkot::detail {

/// Fills unassigned entries by c-transforms so phi + psi <= c holds on every
/// finite cell: first psi_j = min over assigned rows of (c_ij - phi_i), then
/// phi_i = min over all columns of (c_ij - psi_j). Points with no finite
/// constraint get 0.
void complete_by_c_transform(const CostMatrix& c, std::vector<double>& phi, std::vector<double>& psi,
                             const std::vector<char>& row_assigned,
                             const std::vector<char>& col_assigned);

/// Shifts (phi + t, psi - t) so that phi[anchor_row] = 0.
void fix_gauge(std::vector<double>& phi, std::vector<double>& psi, std::size_t anchor_row);

}  // namespace mkot::detail
