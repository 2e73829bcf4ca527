#include "mkot/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "detail/max_flow.hpp"
#include "detail/network_simplex.hpp"
#include "detail/potentials.hpp"

namespace mkot {

std::size_t SolveConfig::iteration_budget(std::size_t m, std::size_t n) const {
  if (max_iterations != 0) return max_iterations;
  return 10 * (m + n) * (m + n);
}

void SolveConfig::validate() const {
  if (!(tolerance > 0.0)) throw InvalidInput("solve tolerance must be > 0");
  if (!(support_threshold >= 0.0)) throw InvalidInput("support threshold must be >= 0");
}

namespace {

void require_problem_shape(const Marginal& mu, const Marginal& nu, const CostMatrix& c) {
  require_dimensions(c, mu.size(), nu.size(), "cost matrix vs marginals");
}

std::vector<std::size_t> finite_neighbours(const CostMatrix& c, const std::vector<std::size_t>& rows) {
  std::vector<char> hit(c.cols(), 0);
  for (std::size_t i : rows)
    for (std::size_t j = 0; j < c.cols(); ++j)
      if (c.finite(i, j)) hit[j] = 1;
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < c.cols(); ++j)
    if (hit[j]) out.push_back(j);
  return out;
}

}  // namespace

bool HallCut::verifies(const Marginal& mu, const Marginal& nu, const CostMatrix& c) const {
  require_problem_shape(mu, nu, c);
  double rmass = 0.0;
  for (std::size_t i : rows) {
    if (i >= mu.size()) return false;
    rmass += mu[i];
  }
  double cmass = 0.0;
  for (std::size_t j : finite_neighbours(c, rows)) cmass += nu[j];
  return rmass > cmass;
}

FeasibilityResult finite_cost_feasible(const Marginal& mu, const Marginal& nu, const CostMatrix& c,
                                       double tol) {
  require_problem_shape(mu, nu, c);
  const std::size_t m = mu.size();
  const std::size_t n = nu.size();
  const std::size_t source = 0;
  const std::size_t sink = m + n + 1;
  detail::MaxFlow net(m + n + 2);
  for (std::size_t i = 0; i < m; ++i) net.add_edge(source, 1 + i, mu[i]);
  std::vector<std::pair<Cell, std::size_t>> cell_edges;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (c.finite(i, j)) cell_edges.push_back({{i, j}, net.add_edge(1 + i, 1 + m + j, kInf)});
  for (std::size_t j = 0; j < n; ++j) net.add_edge(1 + m + j, sink, nu[j]);

  FeasibilityResult out;
  out.max_flow = net.run(source, sink, 1e-15);
  out.feasible = out.max_flow >= 1.0 - tol;
  if (out.feasible) {
    Matrix mass(m, n);
    for (const auto& [cell, e] : cell_edges) mass(cell.row, cell.col) = std::max(0.0, net.flow(e));
    out.plan.emplace(std::move(mass), mu, nu, std::max(tol, kDefaultPlanTolerance));
    return out;
  }
  HallCut cut;
  for (std::size_t i = 0; i < m; ++i)
    if (net.source_side()[1 + i]) cut.rows.push_back(i);
  cut.cols = finite_neighbours(c, cut.rows);
  for (std::size_t i : cut.rows) cut.row_mass += mu[i];
  for (std::size_t j : cut.cols) cut.col_mass += nu[j];
  out.cut = std::move(cut);
  return out;
}

SolveResult solve_mk(const Marginal& mu, const Marginal& nu, const CostMatrix& c,
                     const SolveConfig& cfg) {
  cfg.validate();
  require_problem_shape(mu, nu, c);
  const std::size_t m = mu.size();
  const std::size_t n = nu.size();

  FeasibilityResult feasibility = finite_cost_feasible(mu, nu, c, cfg.tolerance);
  if (!feasibility.feasible) {
    SolveResult out;
    out.status = SolveStatus::infeasible;
    out.cut = std::move(feasibility.cut);
    return out;
  }

  const NormalizedCost normalized = normalize_cost(c);
  const CostMatrix& cn = normalized.cost;

  // Zero-weight points stay out of the network; their potentials are filled
  // in by c-transforms afterwards.
  constexpr std::size_t kAbsent = static_cast<std::size_t>(-1);
  std::vector<std::size_t> row_node(m, kAbsent);
  std::vector<std::size_t> col_node(n, kAbsent);
  detail::FlowProblem problem;
  for (std::size_t i = 0; i < m; ++i) {
    if (mu[i] <= 0.0) continue;
    row_node[i] = problem.nodes++;
    problem.supply.push_back(mu[i]);
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (nu[j] <= 0.0) continue;
    col_node[j] = problem.nodes++;
    problem.supply.push_back(-nu[j]);
  }
  std::vector<Cell> arc_cells;
  for (std::size_t i = 0; i < m; ++i) {
    if (row_node[i] == kAbsent) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (col_node[j] == kAbsent || !cn.finite(i, j)) continue;
      problem.arcs.push_back({row_node[i], col_node[j], cn(i, j)});
      arc_cells.push_back({i, j});
    }
  }

  const double pivot_tolerance = cfg.tolerance * cn.scale();
  const detail::FlowSolution flow =
      detail::solve_min_cost_flow(problem, pivot_tolerance, cfg.iteration_budget(m, n));

  auto plan_from_flow = [&] {
    Matrix mass(m, n);
    for (std::size_t a = 0; a < arc_cells.size(); ++a) {
      const double f = flow.flow[a];
      if (f < -cfg.tolerance) throw NumericalFailure("network simplex produced negative flow");
      mass(arc_cells[a].row, arc_cells[a].col) = std::max(0.0, f);
    }
    return TransportPlan(std::move(mass), mu, nu, cfg.tolerance);
  };

  if (flow.status == detail::FlowStatus::iteration_limit) {
    const std::string msg = "max_iterations (" + std::to_string(cfg.iteration_budget(m, n)) +
                            ") exceeded before optimality";
    if (flow.artificial_flow <= cfg.tolerance) throw IterationLimitExceeded(msg, plan_from_flow());
    throw IterationLimitExceeded(msg, *feasibility.plan);
  }
  if (flow.status == detail::FlowStatus::infeasible)
    throw NumericalFailure("network simplex kept artificial flow on a feasible instance");

  SolveResult out;
  out.status = SolveStatus::optimal;
  out.iterations = flow.iterations;
  out.plan = plan_from_flow();
  if (out.plan->max_residual() > cfg.tolerance)
    throw NumericalFailure("plan marginal residual exceeds tolerance");

  std::vector<double> phi(m, 0.0);
  std::vector<double> psi(n, 0.0);
  std::vector<char> row_set(m, 0);
  std::vector<char> col_set(n, 0);
  for (std::size_t i = 0; i < m; ++i) {
    if (row_node[i] == kAbsent) continue;
    phi[i] = flow.potential[row_node[i]];
    row_set[i] = 1;
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (col_node[j] == kAbsent) continue;
    psi[j] = -flow.potential[col_node[j]] - normalized.shift;
    col_set[j] = 1;
  }
  detail::complete_by_c_transform(c, phi, psi, row_set, col_set);
  const auto anchor = std::find(row_set.begin(), row_set.end(), 1) - row_set.begin();
  detail::fix_gauge(phi, psi, static_cast<std::size_t>(anchor));
  out.potentials = PotentialPair(std::move(phi), std::move(psi));

  out.value = plan_cost(*out.plan, c);
  double dual = 0.0;
  for (std::size_t i = 0; i < m; ++i) dual += mu[i] * out.potentials->phi[i];
  for (std::size_t j = 0; j < n; ++j) dual += nu[j] * out.potentials->psi[j];
  const double gap = out.value.value() - dual;
  if (!(std::abs(gap) <= cfg.tolerance * (1.0 + out.value.value())))
    throw NumericalFailure("duality gap of simplex potentials exceeds tolerance");
  return out;
}

namespace {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t v) {
    while (parent_[v] != v) v = parent_[v] = parent_[parent_[v]];
    return v;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent_[std::max(a, b)] = std::min(a, b);
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
};

struct BasisEvaluation {
  bool primal_feasible = false;
  bool dual_feasible = false;
  Matrix mass;
  std::vector<double> phi;
  std::vector<double> psi;
};

// Solves the flow on a spanning forest by peeling leaves, and the
// complementary potentials (phi_i + psi_j = c_ij on forest cells) by search
// from the lowest-index node of each component.
BasisEvaluation evaluate_basis(const Marginal& mu, const Marginal& nu, const CostMatrix& c,
                               const std::vector<Cell>& forest) {
  const std::size_t m = mu.size();
  const std::size_t n = nu.size();
  const std::size_t nodes = m + n;
  constexpr double kEps = 1e-12;

  std::vector<std::vector<std::size_t>> incident(nodes);
  for (std::size_t e = 0; e < forest.size(); ++e) {
    incident[forest[e].row].push_back(e);
    incident[m + forest[e].col].push_back(e);
  }
  std::vector<double> balance(nodes);
  for (std::size_t i = 0; i < m; ++i) balance[i] = mu[i];
  for (std::size_t j = 0; j < n; ++j) balance[m + j] = -nu[j];
  std::vector<std::size_t> degree(nodes);
  for (std::size_t v = 0; v < nodes; ++v) degree[v] = incident[v].size();
  std::vector<char> used(forest.size(), 0);
  std::vector<double> flow(forest.size(), 0.0);
  std::vector<std::size_t> leaves;
  for (std::size_t v = 0; v < nodes; ++v)
    if (degree[v] == 1) leaves.push_back(v);
  while (!leaves.empty()) {
    const std::size_t v = leaves.back();
    leaves.pop_back();
    if (degree[v] != 1) continue;
    std::size_t e = 0;
    for (std::size_t cand : incident[v])
      if (!used[cand]) e = cand;
    used[e] = 1;
    const std::size_t row = forest[e].row;
    const std::size_t col = m + forest[e].col;
    const double x = v == row ? balance[row] : -balance[col];
    flow[e] = x;
    balance[row] -= x;
    balance[col] += x;
    const std::size_t other = v == row ? col : row;
    --degree[v];
    if (--degree[other] == 1) leaves.push_back(other);
  }

  BasisEvaluation out;
  out.primal_feasible = true;
  for (double b : balance)
    if (std::abs(b) > kEps) out.primal_feasible = false;
  for (double x : flow)
    if (x < -kEps) out.primal_feasible = false;
  out.mass = Matrix(m, n);
  for (std::size_t e = 0; e < forest.size(); ++e)
    out.mass(forest[e].row, forest[e].col) = std::max(0.0, flow[e]);

  std::vector<double> value(nodes, 0.0);
  std::vector<char> seen(nodes, 0);
  for (std::size_t start = 0; start < nodes; ++start) {
    if (seen[start]) continue;
    seen[start] = 1;
    std::vector<std::size_t> stack{start};
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      for (std::size_t e : incident[v]) {
        const std::size_t row = forest[e].row;
        const std::size_t col = m + forest[e].col;
        const std::size_t w = v == row ? col : row;
        if (seen[w]) continue;
        seen[w] = 1;
        value[w] = c(forest[e].row, forest[e].col) - value[v];
        stack.push_back(w);
      }
    }
  }
  out.phi.assign(value.begin(), value.begin() + static_cast<std::ptrdiff_t>(m));
  out.psi.assign(value.begin() + static_cast<std::ptrdiff_t>(m), value.end());
  const double tol = 1e-9 * c.scale();
  out.dual_feasible = true;
  for (std::size_t i = 0; i < m && out.dual_feasible; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (c.finite(i, j) && out.phi[i] + out.psi[j] > c(i, j) + tol) {
        out.dual_feasible = false;
        break;
      }
  return out;
}

}  // namespace

SolveResult brute_force_solve(const Marginal& mu, const Marginal& nu, const CostMatrix& c) {
  require_problem_shape(mu, nu, c);
  const std::size_t m = mu.size();
  const std::size_t n = nu.size();
  if (m * n > kBruteForceMaxCells)
    throw InstanceTooLarge("brute_force_solve accepts at most " +
                           std::to_string(kBruteForceMaxCells) + " cells");

  std::vector<Cell> cells;
  UnionFind components(m + n);
  std::size_t rank = 0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (c.finite(i, j)) {
        cells.push_back({i, j});
        if (components.unite(i, m + j)) ++rank;
      }

  bool have_vertex = false;
  double best_value = kInf;
  Matrix best_mass;
  std::optional<PotentialPair> certified;

  std::vector<Cell> forest;
  // Depth-first choice of `rank` acyclic cells in index order.
  auto search = [&](auto&& self, std::size_t next, const UnionFind& uf) -> void {
    if (forest.size() == rank) {
      BasisEvaluation basis = evaluate_basis(mu, nu, c, forest);
      if (!basis.primal_feasible) return;
      double value = 0.0;
      for (const Cell& cell : forest) value += basis.mass(cell.row, cell.col) * c(cell.row, cell.col);
      if (!have_vertex || value < best_value) {
        have_vertex = true;
        best_value = value;
        best_mass = basis.mass;
      }
      if (basis.dual_feasible && !certified)
        certified = PotentialPair(std::move(basis.phi), std::move(basis.psi));
      return;
    }
    for (std::size_t k = next; k + (rank - forest.size()) <= cells.size(); ++k) {
      UnionFind extended = uf;
      if (!extended.unite(cells[k].row, m + cells[k].col)) continue;
      forest.push_back(cells[k]);
      self(self, k + 1, extended);
      forest.pop_back();
    }
  };
  search(search, 0, UnionFind(m + n));

  if (!have_vertex) throw InfeasibleMask("no coupling is supported on the finite-cost cells");

  SolveResult out;
  out.status = SolveStatus::optimal;
  out.plan = TransportPlan(std::move(best_mass), mu, nu);
  out.value = plan_cost(*out.plan, c);
  if (certified) {
    std::size_t anchor = 0;
    while (anchor + 1 < m && mu[anchor] <= 0.0) ++anchor;
    detail::fix_gauge(certified->phi, certified->psi, anchor);
    out.potentials = std::move(certified);
  }
  return out;
}

}  // namespace mkot
