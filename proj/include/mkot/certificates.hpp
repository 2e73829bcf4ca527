#pragma once

// Optimality certificates for transport plans and the monotonicity tests they
// are equivalent to on finite instances.

#include <optional>
#include <string>
#include <vector>

#include "mkot/core.hpp"
#include "mkot/duality.hpp"
#include "mkot/solver.hpp"

namespace mkot {

/// Distinct in-bounds cells, typically the support of a plan.
class SupportSet {
 public:
  SupportSet(std::vector<Cell> pairs, std::size_t rows, std::size_t cols);
  static SupportSet of(const TransportPlan& plan, double threshold = kDefaultSupportThreshold);

  const std::vector<Cell>& pairs() const { return pairs_; }
  std::size_t size() const { return pairs_.size(); }

 private:
  std::vector<Cell> pairs_;
};

enum class CertificateClause {
  none,
  upper_bound,   // phi + psi <= c violated
  lower_bound,   // -c <= phi + psi violated
  tight_support  // phi + psi = c violated on a supported cell
};

std::string to_string(CertificateClause clause);

struct CertificateCheck {
  bool pass = true;
  std::optional<Cell> witness;
  CertificateClause clause = CertificateClause::none;
};

/// phi + psi <= c + tol on every cell (vacuous where c = inf) and
/// |phi + psi - c| <= tol on every cell with mass above support_threshold.
/// Cells are scanned in row-major order; the first failure is reported.
CertificateCheck verify_kantorovich_certificate(const TransportPlan& plan, const CostMatrix& c,
                                                const PotentialPair& p, double tol,
                                                double support_threshold = kDefaultSupportThreshold);

/// The two-sided form: |phi + psi| <= c + tol everywhere and equality on the
/// supported finite cells. c must be normalized (finite entries >= 1).
CertificateCheck verify_strengthened_certificate(const TransportPlan& plan, const CostMatrix& c,
                                                 const PotentialPair& p, double tol,
                                                 double support_threshold = kDefaultSupportThreshold);

struct CyclicResult {
  bool monotone = true;
  /// Pairs (a_1, b_1) ... (a_k, b_k) with sum c(a_i, b_i) > sum c(a_i, b_{i+1}).
  std::vector<Cell> cycle;
};

/// Searches the support for a family whose cyclic reassignment lowers the
/// cost, by negative-cycle detection on the graph u -> v with weight
/// c(a_u, b_v) - c(a_u, b_u). A cycle only counts if its weight is below
/// -tol * length * (1 + largest finite cost on the support's rows).
/// Throws InvalidInput if a support pair has infinite cost.
CyclicResult cyclical_monotonicity_check(const SupportSet& support, const CostMatrix& c,
                                         double tol = 1e-9);

/// Total cost of the family minus the cost after reassigning a_i -> b_{i+1}.
double cycle_excess(const std::vector<Cell>& cycle, const CostMatrix& c);

struct StrongMonotonicity {
  bool strongly_monotone = false;
  std::optional<PotentialPair> witness;
  std::vector<Cell> conflict;  // cells of the contradictory constraints
};

/// Existence of finite potentials tight on the support and feasible on S.
StrongMonotonicity strong_monotonicity_check(const TransportPlan& plan, const CostMatrix& c,
                                             const SolveConfig& cfg = {});

/// Constraint-qualification diagnostics from the classical optimality theory.
struct Diagnostics {
  /// c <= c_A (+) c_B with integrable c_A, c_B; for finite spaces this is
  /// "every entry finite".
  bool bounded_by_marginal_costs = false;
  /// Positive mu-mass of rows with finite nu-integral of c, and positive
  /// nu-mass of columns with finite mu-integral (both required).
  bool finite_moment = false;
  /// (mu x nu)({c < inf}) = 1 within 1e-12.
  bool full_product_support = false;
  double product_mass_on_finite = 0.0;
};

Diagnostics diagnostics(const Marginal& mu, const Marginal& nu, const CostMatrix& c);

struct Verdicts {
  bool feasible_everywhere = false;
  bool tight_on_support = false;
  std::optional<bool> strengthened_bound;
  bool cyclically_monotone = false;
};

/// A plan with potentials and the checks that hold for them.
struct Certificate {
  TransportPlan plan;
  PotentialPair potentials;
  ExtReal primal_value;
  double dual_value = 0.0;
  double gap = 0.0;
  Verdicts verdicts;
  double tolerance = 0.0;  // absolute
  double support_threshold = kDefaultSupportThreshold;
};

struct CertifyOptions {
  double tolerance = 1e-9;  // absolute
  double support_threshold = kDefaultSupportThreshold;
  /// Also check the two-sided bound against normalize_cost(c), with psi
  /// shifted by the normalization offset.
  bool strengthened = false;
};

Certificate certify(const Marginal& mu, const Marginal& nu, const CostMatrix& c,
                    const TransportPlan& plan, const PotentialPair& p, const CertifyOptions& opts);

/// Re-runs every check on the stored data and compares with the stored verdicts.
bool verdicts_reproduce(const Certificate& cert, const Marginal& mu, const Marginal& nu,
                        const CostMatrix& c);

}  // namespace mkot
