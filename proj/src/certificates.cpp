#include "mkot/certificates.hpp"

#include <algorithm>
#include <cmath>

#include "detail/shortest_paths.hpp"

namespace mkot {

SupportSet::SupportSet(std::vector<Cell> pairs, std::size_t rows, std::size_t cols)
    : pairs_(std::move(pairs)) {
  for (const Cell& cell : pairs_)
    if (cell.row >= rows || cell.col >= cols) throw InvalidInput("support pair out of bounds");
  std::vector<Cell> sorted = pairs_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw InvalidInput("support pairs must be distinct");
}

SupportSet SupportSet::of(const TransportPlan& plan, double threshold) {
  return SupportSet(plan.support(threshold), plan.rows(), plan.cols());
}

std::string to_string(CertificateClause clause) {
  switch (clause) {
    case CertificateClause::none: return "none";
    case CertificateClause::upper_bound: return "upper_bound";
    case CertificateClause::lower_bound: return "lower_bound";
    case CertificateClause::tight_support: return "tight_support";
  }
  return "unknown";
}

namespace {

void require_certificate_shape(const TransportPlan& plan, const CostMatrix& c, const PotentialPair& p) {
  require_dimensions(c, plan.rows(), plan.cols(), "certificate plan");
  if (p.phi.size() != c.rows() || p.psi.size() != c.cols())
    throw DimensionMismatch("potentials do not match cost matrix");
}

CertificateCheck fail_at(std::size_t i, std::size_t j, CertificateClause clause) {
  return {false, Cell{i, j}, clause};
}

}  // namespace

CertificateCheck verify_kantorovich_certificate(const TransportPlan& plan, const CostMatrix& c,
                                                const PotentialPair& p, double tol,
                                                double support_threshold) {
  require_certificate_shape(plan, c, p);
  for (std::size_t i = 0; i < c.rows(); ++i) {
    for (std::size_t j = 0; j < c.cols(); ++j) {
      const double sum = p.phi[i] + p.psi[j];
      const bool finite = c.finite(i, j);
      if (finite && sum > c(i, j) + tol) return fail_at(i, j, CertificateClause::upper_bound);
      if (plan(i, j) > support_threshold && (!finite || std::abs(sum - c(i, j)) > tol))
        return fail_at(i, j, CertificateClause::tight_support);
    }
  }
  return {};
}

CertificateCheck verify_strengthened_certificate(const TransportPlan& plan, const CostMatrix& c,
                                                 const PotentialPair& p, double tol,
                                                 double support_threshold) {
  require_certificate_shape(plan, c, p);
  if (const auto lo = c.min_finite(); lo && *lo < 1.0)
    throw InvalidInput("strengthened certificate expects a normalized cost (finite entries >= 1)");
  for (std::size_t i = 0; i < c.rows(); ++i) {
    for (std::size_t j = 0; j < c.cols(); ++j) {
      if (!c.finite(i, j)) continue;
      const double sum = p.phi[i] + p.psi[j];
      if (sum > c(i, j) + tol) return fail_at(i, j, CertificateClause::upper_bound);
      if (sum < -c(i, j) - tol) return fail_at(i, j, CertificateClause::lower_bound);
      if (plan(i, j) > support_threshold && std::abs(sum - c(i, j)) > tol)
        return fail_at(i, j, CertificateClause::tight_support);
    }
  }
  return {};
}

double cycle_excess(const std::vector<Cell>& cycle, const CostMatrix& c) {
  double excess = 0.0;
  for (std::size_t k = 0; k < cycle.size(); ++k) {
    const Cell& here = cycle[k];
    const Cell& next = cycle[(k + 1) % cycle.size()];
    excess += c(here.row, here.col) - c(here.row, next.col);
  }
  return excess;
}

CyclicResult cyclical_monotonicity_check(const SupportSet& support, const CostMatrix& c, double tol) {
  const auto& pairs = support.pairs();
  double largest = 0.0;
  for (const Cell& u : pairs) {
    if (u.row >= c.rows() || u.col >= c.cols()) throw DimensionMismatch("support pair outside cost matrix");
    if (!c.finite(u.row, u.col))
      throw InvalidInput("support pair has infinite cost; the plan is outside finite-cost plans");
    for (std::size_t j = 0; j < c.cols(); ++j)
      if (c.finite(u.row, j)) largest = std::max(largest, c(u.row, j));
  }
  const double slack = tol * (1.0 + largest);

  std::vector<detail::WeightedEdge> edges;
  for (std::size_t u = 0; u < pairs.size(); ++u) {
    for (std::size_t v = 0; v < pairs.size(); ++v) {
      if (u == v) continue;
      const std::size_t a = pairs[u].row;
      const std::size_t b = pairs[v].col;
      if (!c.finite(a, b)) continue;
      edges.push_back({u, v, c(a, b) - c(a, pairs[u].col) + slack});
    }
  }
  const detail::ShortestPaths sp =
      detail::bellman_ford(pairs.size(), edges, std::vector<double>(pairs.size(), 0.0));
  CyclicResult out;
  if (sp.negative_cycle.empty()) return out;
  out.monotone = false;
  for (std::size_t e : sp.negative_cycle) out.cycle.push_back(pairs[edges[e].from]);
  return out;
}

StrongMonotonicity strong_monotonicity_check(const TransportPlan& plan, const CostMatrix& c,
                                             const SolveConfig& cfg) {
  StrongMonotonicity out;
  try {
    out.witness = extract_potentials(plan, c, cfg);
    out.strongly_monotone = true;
  } catch (const NotCertifiable& e) {
    out.conflict = e.cycle();
  }
  return out;
}

Diagnostics diagnostics(const Marginal& mu, const Marginal& nu, const CostMatrix& c) {
  require_dimensions(c, mu.size(), nu.size(), "diagnostics");
  const std::size_t m = mu.size();
  const std::size_t n = nu.size();
  Diagnostics d;
  d.bounded_by_marginal_costs = c.finite_count() == m * n;

  // Integrals use 0 * inf = 0: an infinite entry only matters if the other
  // marginal puts mass on it.
  double good_rows = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    bool finite = true;
    for (std::size_t j = 0; j < n; ++j)
      if (nu[j] > 0.0 && !c.finite(i, j)) finite = false;
    if (finite) good_rows += mu[i];
  }
  double good_cols = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    bool finite = true;
    for (std::size_t i = 0; i < m; ++i)
      if (mu[i] > 0.0 && !c.finite(i, j)) finite = false;
    if (finite) good_cols += nu[j];
  }
  d.finite_moment = good_rows > 0.0 && good_cols > 0.0;

  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (c.finite(i, j)) d.product_mass_on_finite += mu[i] * nu[j];
  d.full_product_support = std::abs(d.product_mass_on_finite - 1.0) <= kProbabilityTolerance;
  return d;
}

namespace {

Verdicts compute_verdicts(const CostMatrix& c, const TransportPlan& plan, const PotentialPair& p,
                          const CertifyOptions& opts, const DualReport& report) {
  Verdicts v;
  v.feasible_everywhere = report.feasible_everywhere;
  v.tight_on_support = report.tight_on_support;
  if (opts.strengthened) {
    const NormalizedCost normalized = normalize_cost(c);
    std::vector<double> psi = p.psi;
    for (double& x : psi) x += normalized.shift;
    const CertificateCheck check = verify_strengthened_certificate(
        plan, normalized.cost, PotentialPair(p.phi, std::move(psi)), opts.tolerance,
        opts.support_threshold);
    v.strengthened_bound = check.pass;
  }
  const SupportSet support = SupportSet::of(plan, opts.support_threshold);
  bool finite_support = true;
  for (const Cell& cell : support.pairs())
    if (!c.finite(cell.row, cell.col)) finite_support = false;
  // The relative tolerance of the cycle test is derived from the absolute one.
  v.cyclically_monotone =
      finite_support && cyclical_monotonicity_check(support, c, opts.tolerance / c.scale()).monotone;
  return v;
}

}  // namespace

Certificate certify(const Marginal& mu, const Marginal& nu, const CostMatrix& c,
                    const TransportPlan& plan, const PotentialPair& p, const CertifyOptions& opts) {
  const DualReport report = duality_gap(mu, nu, c, plan, p, opts.tolerance, opts.support_threshold);
  Certificate cert{plan,           p, report.primal_value, report.dual_value, report.gap,
                   compute_verdicts(c, plan, p, opts, report), opts.tolerance,
                   opts.support_threshold};
  return cert;
}

bool verdicts_reproduce(const Certificate& cert, const Marginal& mu, const Marginal& nu,
                        const CostMatrix& c) {
  CertifyOptions opts{cert.tolerance, cert.support_threshold, cert.verdicts.strengthened_bound.has_value()};
  const Certificate again = certify(mu, nu, c, cert.plan, cert.potentials, opts);
  const Verdicts& a = cert.verdicts;
  const Verdicts& b = again.verdicts;
  return a.feasible_everywhere == b.feasible_everywhere && a.tight_on_support == b.tight_on_support &&
         a.strengthened_bound == b.strengthened_bound &&
         a.cyclically_monotone == b.cyclically_monotone && again.primal_value == cert.primal_value &&
         again.dual_value == cert.dual_value;
}

}  // namespace mkot
