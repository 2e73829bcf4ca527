#pragma once

// Exact discrete transport: feasibility over the finite-cost mask, a network
// simplex solver and an enumeration oracle for small instances.

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "mkot/core.hpp"

namespace mkot {

struct SolveConfig {
  double tolerance = 1e-9;
  /// 0 means the default 10 * (m + n)^2.
  std::size_t max_iterations = 0;
  double support_threshold = kDefaultSupportThreshold;

  std::size_t iteration_budget(std::size_t m, std::size_t n) const;
  void validate() const;
};

/// Witness that no coupling lives on S: a set of rows whose mass exceeds the
/// mass of every column they can reach through finite-cost cells.
struct HallCut {
  std::vector<std::size_t> rows;
  std::vector<std::size_t> cols;  // finite-cost neighbours of rows
  double row_mass = 0.0;
  double col_mass = 0.0;

  /// Re-derives the neighbourhood and masses from scratch and checks
  /// mu(rows) > nu(neighbours(rows)).
  bool verifies(const Marginal& mu, const Marginal& nu, const CostMatrix& c) const;
};

struct FeasibilityResult {
  bool feasible = false;
  double max_flow = 0.0;
  std::optional<HallCut> cut;
  /// A coupling concentrated on S when feasible (the max-flow solution).
  std::optional<TransportPlan> plan;
};

/// Bipartite max-flow with capacities mu on rows, nu on columns and +inf on
/// finite-cost cells; infeasible iff the max flow falls short of 1 by more
/// than tol.
FeasibilityResult finite_cost_feasible(const Marginal& mu, const Marginal& nu, const CostMatrix& c,
                                       double tol = 1e-9);

enum class SolveStatus { optimal, infeasible };

struct SolveResult {
  SolveStatus status = SolveStatus::infeasible;
  ExtReal value = ExtReal::infinity();
  std::optional<TransportPlan> plan;      // set when optimal
  std::optional<PotentialPair> potentials;  // set when optimal
  std::optional<HallCut> cut;             // set when infeasible
  std::size_t iterations = 0;
};

class IterationLimitExceeded : public std::runtime_error {
 public:
  IterationLimitExceeded(const std::string& what, TransportPlan best)
      : std::runtime_error(what), best_plan_(std::move(best)) {}
  /// A feasible plan (supported on S), though not certified optimal.
  const TransportPlan& best_plan() const { return best_plan_; }

 private:
  TransportPlan best_plan_;
};

class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Minimizes sum c * pi over couplings of (mu, nu). The cost is normalized
/// internally (smallest finite entry 1) and the reported value is for the
/// original cost. Potentials are the simplex duals, with zero-weight points
/// completed by c-transforms and the gauge fixed so phi = 0 at the first row
/// carrying mass.
SolveResult solve_mk(const Marginal& mu, const Marginal& nu, const CostMatrix& c,
                     const SolveConfig& cfg = {});

/// Largest m * n accepted by brute_force_solve.
inline constexpr std::size_t kBruteForceMaxCells = 20;

class InstanceTooLarge : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InfeasibleMask : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Enumerates every basis of the transportation polytope restricted to S
/// (maximal spanning forests of the finite-cost bipartite graph) and returns
/// the cheapest vertex. Potentials come from a basis that is both primal and
/// dual feasible. Independent of solve_mk; intended as a test oracle.
SolveResult brute_force_solve(const Marginal& mu, const Marginal& nu, const CostMatrix& c);

}  // namespace mkot
