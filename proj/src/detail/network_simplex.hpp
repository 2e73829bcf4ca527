#pragma once

// Primal network simplex for uncapacitated min-cost flow (transshipment).
// Starts from a big-M artificial tree rooted at an extra node, keeps the tree
// strongly feasible (Cunningham's leaving-arc rule) and prices entering arcs
// by lowest index, so runs are deterministic and cannot cycle in exact
// arithmetic.

#include <cstddef>
#include <vector>

namespace mkot::detail {

struct FlowArc {
  std::size_t tail = 0;
  std::size_t head = 0;
  double cost = 0.0;
};

struct FlowProblem {
  std::size_t nodes = 0;
  std::vector<double> supply;  // sum must be 0; positive = source
  std::vector<FlowArc> arcs;
};

enum class FlowStatus { optimal, infeasible, iteration_limit };

struct FlowSolution {
  FlowStatus status = FlowStatus::optimal;
  std::vector<double> flow;       // one per arc of the problem
  std::vector<double> potential;  // one per node; reduced cost = cost - p[tail] + p[head]
  std::size_t iterations = 0;
  // Largest flow left on an artificial arc; nonzero only when infeasible or
  // stopped early.
  double artificial_flow = 0.0;
};

/// cost_tolerance: an arc enters only if its reduced cost is below
/// -cost_tolerance.
FlowSolution solve_min_cost_flow(const FlowProblem& problem, double cost_tolerance,
                                 std::size_t max_iterations);

}  // namespace mkot::detail
