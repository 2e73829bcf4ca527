#pragma once

// Normed-space and regularization tools at finite scale: the cost-weighted
// sup norm and its duals, Minkowski gauges with a conjugate sandwich check,
// and Moreau-Yosida approximation on finite metric spaces.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "mkot/core.hpp"

namespace mkot {

// ---------------------------------------------------------------- norms ---

/// max over S of |u_ij| / c_ij; 0 when S is empty. Finite costs must be >= 1.
double cost_norm(const Matrix& u, const CostMatrix& c);

/// sum over S of c_ij |ell_ij|; +inf if ell has nonzero mass off S.
ExtReal dual_cost_norm(const Matrix& ell, const CostMatrix& c);

struct MarginalNorm {
  ExtReal value;
  /// A signed minimizer ell with the requested marginals (empty if infeasible).
  Matrix coupling;
};

/// inf { sum c |ell| : ell supported on S, row sums = kappa1, col sums = kappa2 },
/// solved as uncapacitated min-cost flow with ell = p - q split over forward
/// and backward arcs. +inf when no such ell exists. Throws InvalidInput if
/// the two vectors carry different total mass.
MarginalNorm marginal_dual_norm(std::span<const double> kappa1, std::span<const double> kappa2,
                                const CostMatrix& c);

// --------------------------------------------------------------- gauges ---

/// Uniform sampling grid on an axis-aligned box.
struct SampleBox {
  std::vector<double> lower;
  std::vector<double> upper;
  std::size_t resolution = 201;  // points per axis

  static SampleBox symmetric(std::size_t dimension, double half_width, std::size_t resolution);
};

/// A convex function theta >= 0 with theta(0) = 0 on R^d (d <= 3), given as a
/// black box, plus the grid used to estimate its conjugate.
class GaugeProbe {
 public:
  using Function = std::function<double(std::span<const double>)>;

  GaugeProbe(std::size_t dimension, Function theta, SampleBox box);

  std::size_t dimension() const { return dimension_; }
  double operator()(std::span<const double> s) const { return theta_(s); }
  const SampleBox& box() const { return box_; }

  /// Bisection bracket for the gauge; outside it the gauge is 0 or +inf.
  double alpha_min = 1e-12;
  double alpha_max = 1e12;

 private:
  std::size_t dimension_;
  Function theta_;
  SampleBox box_;
};

/// inf { alpha > 0 : theta(s / alpha) <= 1 } by bisection to absolute
/// tolerance 1e-8; +inf if no alpha up to alpha_max works.
double gauge(const GaugeProbe& probe, std::span<const double> s);

struct GaugeSandwich {
  double lhs = 0.0;  // j_{theta*}(r) / 2
  double mid = 0.0;  // support function of {theta <= 1} at r
  double rhs = 0.0;  // 2 j_{theta*}(r)
  bool pass = false;
};

/// Relative slack granted to grid estimates in gauge_sandwich_check.
inline constexpr double kGaugeGridSlack = 0.05;

/// Estimates the conjugate theta* on the probe grid, the gauge of theta* at
/// r, and the support function of {theta <= 1} at r, then checks
/// lhs <= mid <= rhs up to kGaugeGridSlack. The grid must be wide and fine
/// enough for the estimates to settle; that is the caller's call. Throws
/// InvalidInput if theta is infinite on every grid point.
GaugeSandwich gauge_sandwich_check(const GaugeProbe& probe, std::span<const double> r);

// -------------------------------------------------------- Moreau-Yosida ---

/// Distances on n points: symmetric, zero diagonal, positive off the
/// diagonal, triangle inequality within 1e-12.
class FiniteMetricSpace {
 public:
  explicit FiniteMetricSpace(Matrix dist);
  /// Points 0, 1, ..., n-1 on a line with d(i, j) = |i - j|.
  static FiniteMetricSpace line(std::size_t n);

  std::size_t size() const { return dist_.rows(); }
  double operator()(std::size_t x, std::size_t y) const { return dist_(x, y); }
  const Matrix& distances() const { return dist_; }

 private:
  Matrix dist_;
};

/// Values in (-inf, +inf]; NaN and -inf rejected.
class ExtFunction {
 public:
  explicit ExtFunction(std::vector<double> values);

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  const std::vector<double>& values() const { return values_; }
  bool identically_infinite() const;

  friend bool operator==(const ExtFunction&, const ExtFunction&) = default;

 private:
  std::vector<double> values_;
};

/// v(x) = min_y { u(y) + k d(x, y) }. Requires k >= 0 and u not identically
/// +inf; the result is finite, below u and k-Lipschitz.
ExtFunction moreau_yosida(const ExtFunction& u, double k, const FiniteMetricSpace& space);

/// moreau_yosida(min(c, k), k): truncate above at k, then smooth. Finite,
/// bounded by min(c, k), nondecreasing in k and converging to c. c >= 0.
ExtFunction capped_approximants(const ExtFunction& c, double k, const FiniteMetricSpace& space);

/// Checks that the Moreau-Yosida approximation of phi (+) psi on the product
/// space with d = d_A + d_B equals MY(phi) (+) MY(psi), to 1e-9.
bool lsc_envelope_factorization_check(std::span<const double> phi, std::span<const double> psi,
                                      const FiniteMetricSpace& space_a,
                                      const FiniteMetricSpace& space_b, double k);

}  // namespace mkot
