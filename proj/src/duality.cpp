#include "mkot/duality.hpp"

#include <algorithm>
#include <cmath>

#include "detail/potentials.hpp"
#include "detail/shortest_paths.hpp"

namespace mkot {

namespace {

// Unknowns are x_i = phi_i (node i) and y_j = -psi_j (node m + j), so every
// bound on phi_i + psi_j = x_i - y_j becomes a difference constraint.
struct ConstraintGraph {
  std::vector<detail::WeightedEdge> edges;
  std::vector<Cell> cells;  // cell behind each edge

  void add(std::size_t from, std::size_t to, double weight, Cell cell) {
    edges.push_back({from, to, weight});
    cells.push_back(cell);
  }
  // phi_i + psi_j <= bound
  void upper(std::size_t m, Cell cell, double bound) { add(m + cell.col, cell.row, bound, cell); }
  // phi_i + psi_j >= bound
  void lower(std::size_t m, Cell cell, double bound) { add(cell.row, m + cell.col, -bound, cell); }

  std::vector<Cell> cycle_cells(const std::vector<std::size_t>& cycle) const {
    std::vector<Cell> out;
    for (std::size_t e : cycle) out.push_back(cells[e]);
    return out;
  }
};

// The exact system is tried first so that clean inputs give clean
// potentials, then a tiny slack that only absorbs rounding in cycles of
// zero weight. The full slack decides certifiability; potentials found
// there may sit right at the tolerance.
template <class Build>
detail::ShortestPaths solve_system(const Build& build, double slack, const std::vector<double>& start,
                                   const char* failure) {
  const std::size_t nodes = start.size();
  for (double tier : {0.0, 1e-4 * slack}) {
    detail::ShortestPaths sp = detail::bellman_ford(nodes, build(tier).edges, start);
    if (sp.negative_cycle.empty()) return sp;
  }
  const ConstraintGraph graph = build(slack);
  detail::ShortestPaths loose = detail::bellman_ford(nodes, graph.edges, start);
  if (!loose.negative_cycle.empty()) throw NotCertifiable(failure, graph.cycle_cells(loose.negative_cycle));
  return loose;
}

void require_plan_shape(const TransportPlan& plan, const CostMatrix& c, const char* what) {
  require_dimensions(c, plan.rows(), plan.cols(), what);
}

std::vector<char> support_mask(const TransportPlan& plan, const CostMatrix& c, double threshold) {
  std::vector<char> mask(plan.rows() * plan.cols(), 0);
  for (const Cell& cell : plan.support(threshold)) {
    if (!c.finite(cell.row, cell.col))
      throw InvalidInput("plan puts mass on an infinite-cost cell");
    mask[cell.row * plan.cols() + cell.col] = 1;
  }
  return mask;
}

}  // namespace

double dual_value(const Marginal& mu, const Marginal& nu, const PotentialPair& p) {
  if (p.phi.size() != mu.size() || p.psi.size() != nu.size())
    throw DimensionMismatch("potentials do not match marginals");
  double total = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) total += mu[i] * p.phi[i];
  for (std::size_t j = 0; j < nu.size(); ++j) total += nu[j] * p.psi[j];
  return total;
}

PotentialPair extract_potentials(const TransportPlan& plan, const CostMatrix& c,
                                 const SolveConfig& cfg) {
  cfg.validate();
  require_plan_shape(plan, c, "extract_potentials");
  const std::size_t m = plan.rows();
  const std::size_t n = plan.cols();
  const std::vector<char> on_support = support_mask(plan, c, cfg.support_threshold);

  std::vector<char> row_touched(m, 0);
  std::vector<char> col_touched(n, 0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (on_support[i * n + j]) row_touched[i] = col_touched[j] = 1;

  auto build = [&](double slack) {
    ConstraintGraph graph;
    for (std::size_t i = 0; i < m; ++i) {
      if (!row_touched[i]) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (!col_touched[j] || !c.finite(i, j)) continue;
        graph.upper(m, {i, j}, c(i, j) + slack);
        if (on_support[i * n + j]) graph.lower(m, {i, j}, c(i, j) - slack);
      }
    }
    return graph;
  };
  const detail::ShortestPaths sp = solve_system(build, cfg.tolerance * c.scale(), std::vector<double>(m + n, 0.0),
                                                "plan is not certifiable: tight and feasibility constraints conflict");

  std::vector<double> phi(m);
  std::vector<double> psi(n);
  for (std::size_t i = 0; i < m; ++i) phi[i] = sp.distance[i];
  for (std::size_t j = 0; j < n; ++j) psi[j] = -sp.distance[m + j];
  const auto anchor = std::find(row_touched.begin(), row_touched.end(), 1) - row_touched.begin();
  detail::fix_gauge(phi, psi, static_cast<std::size_t>(anchor));
  detail::complete_by_c_transform(c, phi, psi, row_touched, col_touched);
  return PotentialPair(std::move(phi), std::move(psi));
}

PotentialPair strengthen_potentials(const TransportPlan& plan, const CostMatrix& c,
                                    const PotentialPair& seed, const SolveConfig& cfg) {
  cfg.validate();
  require_plan_shape(plan, c, "strengthen_potentials");
  if (seed.phi.size() != plan.rows() || seed.psi.size() != plan.cols())
    throw DimensionMismatch("seed potentials do not match plan");
  if (const auto lo = c.min_finite(); lo && *lo < 1.0)
    throw InvalidInput("strengthen_potentials expects a normalized cost (finite entries >= 1)");
  const std::size_t m = plan.rows();
  const std::size_t n = plan.cols();
  const std::vector<char> on_support = support_mask(plan, c, cfg.support_threshold);

  auto build = [&](double slack) {
    ConstraintGraph graph;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (!c.finite(i, j)) continue;
        graph.upper(m, {i, j}, c(i, j) + slack);
        if (on_support[i * n + j])
          graph.lower(m, {i, j}, c(i, j) - slack);
        else
          graph.lower(m, {i, j}, -c(i, j) - slack);
      }
    }
    return graph;
  };
  std::vector<double> start(m + n);
  for (std::size_t i = 0; i < m; ++i) start[i] = seed.phi[i];
  for (std::size_t j = 0; j < n; ++j) start[m + j] = -seed.psi[j];
  const detail::ShortestPaths sp = solve_system(build, cfg.tolerance * c.scale(), start,
                                                "plan not optimal: two-sided potential bounds are infeasible");

  std::vector<double> phi(sp.distance.begin(), sp.distance.begin() + static_cast<std::ptrdiff_t>(m));
  std::vector<double> psi(n);
  for (std::size_t j = 0; j < n; ++j) psi[j] = -sp.distance[m + j];
  return PotentialPair(std::move(phi), std::move(psi));
}

DualReport duality_gap(const Marginal& mu, const Marginal& nu, const CostMatrix& c,
                       const TransportPlan& plan, const PotentialPair& p, double tol,
                       double support_threshold) {
  require_dimensions(c, mu.size(), nu.size(), "duality_gap");
  require_plan_shape(plan, c, "duality_gap");
  DualReport report;
  report.dual_value = dual_value(mu, nu, p);
  report.primal_value = plan_cost(plan, c);
  report.gap = report.primal_value.is_finite() ? report.primal_value.value() - report.dual_value : kInf;

  report.feasible_everywhere = true;
  for (std::size_t i = 0; i < c.rows(); ++i)
    for (std::size_t j = 0; j < c.cols(); ++j)
      if (c.finite(i, j) && p.phi[i] + p.psi[j] > c(i, j) + tol) report.feasible_everywhere = false;

  report.tight_on_support = true;
  for (const Cell& cell : plan.support(support_threshold)) {
    const double cij = c(cell.row, cell.col);
    if (!c.finite(cell.row, cell.col) || std::abs(p.phi[cell.row] + p.psi[cell.col] - cij) > tol)
      report.tight_on_support = false;
  }
  return report;
}

}  // namespace mkot
