#include "mkot/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "detail/network_simplex.hpp"

namespace mkot {

double cost_norm(const Matrix& u, const CostMatrix& c) {
  require_dimensions(c, u.rows(), u.cols(), "cost_norm");
  if (const auto lo = c.min_finite(); lo && *lo < 1.0)
    throw InvalidInput("cost_norm expects finite costs >= 1 (normalize the cost first)");
  double norm = 0.0;
  for (std::size_t i = 0; i < u.rows(); ++i)
    for (std::size_t j = 0; j < u.cols(); ++j)
      if (c.finite(i, j)) norm = std::max(norm, std::abs(u(i, j)) / c(i, j));
  return norm;
}

ExtReal dual_cost_norm(const Matrix& ell, const CostMatrix& c) {
  require_dimensions(c, ell.rows(), ell.cols(), "dual_cost_norm");
  double total = 0.0;
  for (std::size_t i = 0; i < ell.rows(); ++i) {
    for (std::size_t j = 0; j < ell.cols(); ++j) {
      const double v = ell(i, j);
      if (!std::isfinite(v)) throw InvalidInput("dual_cost_norm: entries must be finite");
      if (v == 0.0) continue;
      if (!c.finite(i, j)) return ExtReal::infinity();
      total += c(i, j) * std::abs(v);
    }
  }
  return ExtReal(total);
}

MarginalNorm marginal_dual_norm(std::span<const double> kappa1, std::span<const double> kappa2,
                                const CostMatrix& c) {
  require_dimensions(c, kappa1.size(), kappa2.size(), "marginal_dual_norm");
  const std::size_t m = kappa1.size();
  const std::size_t n = kappa2.size();
  double sum1 = 0.0;
  double sum2 = 0.0;
  double magnitude = 0.0;
  for (double v : kappa1) {
    if (!std::isfinite(v)) throw InvalidInput("marginal_dual_norm: entries must be finite");
    sum1 += v;
    magnitude += std::abs(v);
  }
  for (double v : kappa2) {
    if (!std::isfinite(v)) throw InvalidInput("marginal_dual_norm: entries must be finite");
    sum2 += v;
    magnitude += std::abs(v);
  }
  if (std::abs(sum1 - sum2) > kProbabilityTolerance * std::max(1.0, magnitude))
    throw InvalidInput("marginal_dual_norm: the two marginals carry different total mass");

  // Rows are nodes 0..m-1, columns m..m+n-1. Forward arcs carry the positive
  // part of ell, backward arcs the negative part.
  detail::FlowProblem problem;
  problem.nodes = m + n;
  for (double v : kappa1) problem.supply.push_back(v);
  for (double v : kappa2) problem.supply.push_back(-v);
  std::vector<Cell> arc_cells;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (!c.finite(i, j)) continue;
      problem.arcs.push_back({i, m + j, c(i, j)});
      problem.arcs.push_back({m + j, i, c(i, j)});
      arc_cells.push_back({i, j});
    }
  }
  const std::size_t budget = 100 * (m + n) * (m + n) + 1000;
  const detail::FlowSolution flow = detail::solve_min_cost_flow(problem, 1e-12 * c.scale(), budget);
  if (flow.status == detail::FlowStatus::iteration_limit)
    throw std::runtime_error("marginal_dual_norm: iteration limit reached");

  MarginalNorm out;
  if (flow.status == detail::FlowStatus::infeasible) {
    out.value = ExtReal::infinity();
    return out;
  }
  out.coupling = Matrix(m, n);
  for (std::size_t k = 0; k < arc_cells.size(); ++k) {
    const double forward = std::max(0.0, flow.flow[2 * k]);
    const double backward = std::max(0.0, flow.flow[2 * k + 1]);
    out.coupling(arc_cells[k].row, arc_cells[k].col) = forward - backward;
  }
  out.value = dual_cost_norm(out.coupling, c);
  return out;
}

SampleBox SampleBox::symmetric(std::size_t dimension, double half_width, std::size_t resolution) {
  return {std::vector<double>(dimension, -half_width), std::vector<double>(dimension, half_width),
          resolution};
}

GaugeProbe::GaugeProbe(std::size_t dimension, Function theta, SampleBox box)
    : dimension_(dimension), theta_(std::move(theta)), box_(std::move(box)) {
  if (dimension_ == 0 || dimension_ > 3) throw InvalidInput("gauge probes support dimension 1 to 3");
  if (!theta_) throw InvalidInput("gauge probe needs a function");
  if (box_.lower.size() != dimension_ || box_.upper.size() != dimension_)
    throw DimensionMismatch("sample box does not match probe dimension");
  if (box_.resolution < 2) throw InvalidInput("sample box resolution must be >= 2");
  for (std::size_t k = 0; k < dimension_; ++k)
    if (!(box_.lower[k] < box_.upper[k])) throw InvalidInput("sample box bounds must be increasing");
  const std::vector<double> origin(dimension_, 0.0);
  if (theta_(origin) != 0.0) throw InvalidInput("gauge probe requires theta(0) = 0");
}

double gauge(const GaugeProbe& probe, std::span<const double> s) {
  if (s.size() != probe.dimension()) throw DimensionMismatch("gauge: point has wrong dimension");
  if (std::all_of(s.begin(), s.end(), [](double v) { return v == 0.0; })) return 0.0;

  std::vector<double> scaled(s.size());
  auto inside = [&](double alpha) {
    for (std::size_t k = 0; k < s.size(); ++k) scaled[k] = s[k] / alpha;
    return probe(scaled) <= 1.0;
  };
  // alpha -> theta(s / alpha) is nonincreasing, so the feasible alphas form a
  // half-line [j, inf).
  double lo = 1.0;
  double hi = 1.0;
  if (inside(hi)) {
    while (inside(lo)) {
      hi = lo;
      lo /= 2.0;
      if (lo < probe.alpha_min) return 0.0;
    }
  } else {
    while (!inside(hi)) {
      lo = hi;
      hi *= 2.0;
      if (hi > probe.alpha_max) return kInf;
    }
  }
  for (int iter = 0; iter < 200 && hi - lo > 1e-8; ++iter) {
    const double mid = 0.5 * (lo + hi);
    (inside(mid) ? hi : lo) = mid;
  }
  return hi;
}

namespace {

struct Sample {
  std::vector<double> point;
  double theta;
};

std::vector<Sample> sample_finite(const GaugeProbe& probe) {
  const SampleBox& box = probe.box();
  const std::size_t d = probe.dimension();
  std::vector<std::size_t> index(d, 0);
  std::vector<Sample> out;
  std::vector<double> point(d);
  for (;;) {
    for (std::size_t k = 0; k < d; ++k) {
      const double t = static_cast<double>(index[k]) / static_cast<double>(box.resolution - 1);
      point[k] = box.lower[k] + t * (box.upper[k] - box.lower[k]);
    }
    const double value = probe(point);
    if (value != kInf) out.push_back({point, value});
    std::size_t k = 0;
    while (k < d && ++index[k] == box.resolution) index[k++] = 0;
    if (k == d) break;
  }
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

}  // namespace

GaugeSandwich gauge_sandwich_check(const GaugeProbe& probe, std::span<const double> r) {
  if (r.size() != probe.dimension()) throw DimensionMismatch("gauge_sandwich_check: wrong dimension");
  const std::vector<Sample> samples = sample_finite(probe);
  if (samples.empty()) throw InvalidInput("gauge_sandwich_check: theta is infinite on the whole grid");

  // theta*(y) >= <y, 0> - theta(0) = 0, so the origin is always included.
  auto conjugate = [&samples](std::span<const double> y) {
    double best = 0.0;
    for (const Sample& s : samples) best = std::max(best, dot(y, s.point) - s.theta);
    return best;
  };
  const GaugeProbe conjugate_probe(probe.dimension(), conjugate, probe.box());

  GaugeSandwich out;
  const double j = gauge(conjugate_probe, r);
  for (const Sample& s : samples)
    if (s.theta <= 1.0) out.mid = std::max(out.mid, dot(r, s.point));
  out.lhs = 0.5 * j;
  out.rhs = 2.0 * j;
  constexpr double kAbsolute = 1e-12;
  out.pass = out.lhs <= out.mid * (1.0 + kGaugeGridSlack) + kAbsolute &&
             out.mid <= out.rhs * (1.0 + kGaugeGridSlack) + kAbsolute;
  return out;
}

FiniteMetricSpace::FiniteMetricSpace(Matrix dist) : dist_(std::move(dist)) {
  const std::size_t n = dist_.rows();
  if (n == 0 || dist_.cols() != n) throw InvalidInput("metric must be a non-empty square matrix");
  for (std::size_t x = 0; x < n; ++x) {
    if (dist_(x, x) != 0.0) throw InvalidInput("metric must vanish on the diagonal");
    for (std::size_t y = 0; y < n; ++y) {
      if (!std::isfinite(dist_(x, y))) throw InvalidInput("metric entries must be finite");
      if (dist_(x, y) != dist_(y, x)) throw InvalidInput("metric must be symmetric");
      if (x != y && !(dist_(x, y) > 0.0)) throw InvalidInput("metric must separate points");
    }
  }
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y)
      for (std::size_t z = 0; z < n; ++z)
        if (dist_(x, z) > dist_(x, y) + dist_(y, z) + 1e-12)
          throw InvalidInput("metric violates the triangle inequality");
}

FiniteMetricSpace FiniteMetricSpace::line(std::size_t n) {
  Matrix d(n, n);
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y)
      d(x, y) = std::abs(static_cast<double>(x) - static_cast<double>(y));
  return FiniteMetricSpace(std::move(d));
}

ExtFunction::ExtFunction(std::vector<double> values) : values_(std::move(values)) {
  for (double v : values_)
    if (std::isnan(v) || v == -kInf) throw InvalidInput("extended function values must be in (-inf, +inf]");
}

bool ExtFunction::identically_infinite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return v == kInf; });
}

ExtFunction moreau_yosida(const ExtFunction& u, double k, const FiniteMetricSpace& space) {
  if (u.size() != space.size()) throw DimensionMismatch("moreau_yosida: function and space differ in size");
  if (!(k >= 0.0) || !std::isfinite(k)) throw InvalidInput("moreau_yosida: k must be finite and >= 0");
  if (u.identically_infinite()) throw InvalidInput("moreau_yosida: u is identically +inf");
  const std::size_t n = u.size();
  std::vector<double> v(n, kInf);
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y) v[x] = std::min(v[x], u[y] + k * space(x, y));
  return ExtFunction(std::move(v));
}

ExtFunction capped_approximants(const ExtFunction& c, double k, const FiniteMetricSpace& space) {
  std::vector<double> capped(c.values());
  for (double& v : capped) {
    if (v < 0.0) throw InvalidInput("capped_approximants: c must be >= 0");
    v = std::min(v, k);
  }
  return moreau_yosida(ExtFunction(std::move(capped)), k, space);
}

bool lsc_envelope_factorization_check(std::span<const double> phi, std::span<const double> psi,
                                      const FiniteMetricSpace& space_a,
                                      const FiniteMetricSpace& space_b, double k) {
  const std::size_t na = phi.size();
  const std::size_t nb = psi.size();
  if (na != space_a.size() || nb != space_b.size())
    throw DimensionMismatch("lsc_envelope_factorization_check: sizes differ");
  const ExtFunction left = moreau_yosida(ExtFunction({phi.begin(), phi.end()}), k, space_a);
  const ExtFunction right = moreau_yosida(ExtFunction({psi.begin(), psi.end()}), k, space_b);
  for (std::size_t a = 0; a < na; ++a) {
    for (std::size_t b = 0; b < nb; ++b) {
      double joint = kInf;
      for (std::size_t a2 = 0; a2 < na; ++a2)
        for (std::size_t b2 = 0; b2 < nb; ++b2)
          joint = std::min(joint, phi[a2] + psi[b2] + k * (space_a(a, a2) + space_b(b, b2)));
      const double split = left[a] + right[b];
      if (std::abs(joint - split) > 1e-9 * std::max(1.0, std::abs(joint))) return false;
    }
  }
  return true;
}

}  // namespace mkot
