#pragma once

// Dual side of the transport problem: the dual objective, duality gaps,
// potentials read off an optimal plan, and the strengthened two-sided
// potentials |phi + psi| <= c.
//
// Tolerances passed in a SolveConfig are relative: every comparison against a
// cost is made at tolerance * (1 + largest finite cost).

#include <stdexcept>
#include <vector>

#include "mkot/core.hpp"
#include "mkot/solver.hpp"

namespace mkot {

struct DualReport {
  double dual_value = 0.0;
  ExtReal primal_value;
  /// primal - dual; +inf when the plan has infinite cost.
  double gap = 0.0;
  /// phi_i + psi_j <= c_ij + tol on every cell (vacuous where c = inf).
  bool feasible_everywhere = false;
  /// |phi_i + psi_j - c_ij| <= tol on every supported cell.
  bool tight_on_support = false;
};

/// Thrown when no finite potentials satisfy the optimality system; the
/// cycle lists the cells whose constraints contradict each other.
class NotCertifiable : public std::runtime_error {
 public:
  NotCertifiable(const std::string& what, std::vector<Cell> cycle)
      : std::runtime_error(what), cycle_(std::move(cycle)) {}
  const std::vector<Cell>& cycle() const { return cycle_; }

 private:
  std::vector<Cell> cycle_;
};

/// sum_i mu_i phi_i + sum_j nu_j psi_j.
double dual_value(const Marginal& mu, const Marginal& nu, const PotentialPair& p);

/// Finite potentials with phi + psi = c on the plan's support and
/// phi + psi <= c on S, found as the solution of a difference-constraint
/// system by Bellman-Ford. Points off the support are completed by
/// c-transforms; the gauge puts phi = 0 at the first row carrying mass.
/// Throws NotCertifiable when the system has a negative cycle, i.e. when the
/// plan is not optimal.
PotentialPair extract_potentials(const TransportPlan& plan, const CostMatrix& c,
                                 const SolveConfig& cfg = {});

/// Repairs seed into potentials with -c <= phi + psi <= c everywhere and
/// phi + psi = c on supp(plan). Expects c with smallest finite entry >= 1.
/// Bellman-Ford is started from the seed, so a seed that already satisfies
/// the system comes back unchanged. Throws NotCertifiable when the plan is
/// not optimal.
PotentialPair strengthen_potentials(const TransportPlan& plan, const CostMatrix& c,
                                    const PotentialPair& seed, const SolveConfig& cfg = {});

/// tol is absolute; cells with mass above support_threshold count as support.
DualReport duality_gap(const Marginal& mu, const Marginal& nu, const CostMatrix& c,
                       const TransportPlan& plan, const PotentialPair& p, double tol = 1e-9,
                       double support_threshold = kDefaultSupportThreshold);

}  // namespace mkot
