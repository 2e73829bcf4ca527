#include "detail/potentials.hpp"

#include <algorithm>

namespace mkot::detail {

void complete_by_c_transform(const CostMatrix& c, std::vector<double>& phi, std::vector<double>& psi,
                             const std::vector<char>& row_assigned,
                             const std::vector<char>& col_assigned) {
  const std::size_t m = c.rows();
  const std::size_t n = c.cols();
  for (std::size_t j = 0; j < n; ++j) {
    if (col_assigned[j]) continue;
    double best = kInf;
    for (std::size_t i = 0; i < m; ++i)
      if (row_assigned[i] && c.finite(i, j)) best = std::min(best, c(i, j) - phi[i]);
    psi[j] = best == kInf ? 0.0 : best;
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (row_assigned[i]) continue;
    double best = kInf;
    for (std::size_t j = 0; j < n; ++j)
      if (c.finite(i, j)) best = std::min(best, c(i, j) - psi[j]);
    phi[i] = best == kInf ? 0.0 : best;
  }
}

void fix_gauge(std::vector<double>& phi, std::vector<double>& psi, std::size_t anchor_row) {
  const double t = -phi[anchor_row];
  if (t == 0.0) return;
  for (double& v : phi) v += t;
  for (double& v : psi) v -= t;
  phi[anchor_row] = 0.0;
}

}  // namespace mkot::detail
