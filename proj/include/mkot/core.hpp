#pragma once

// Domain types shared by every part of the library: extended reals, marginals,
// cost matrices with +inf entries, transport plans and potential pairs.

#include <compare>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mkot {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Default absolute mass above which a plan cell counts as supported.
inline constexpr double kDefaultSupportThreshold = 1e-10;
/// Marginal weights must sum to one within this tolerance.
inline constexpr double kProbabilityTolerance = 1e-12;
/// Default tolerance on plan nonnegativity and total mass.
inline constexpr double kDefaultPlanTolerance = 1e-9;

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A value in [0, +inf]. NaN and negative values are rejected on construction.
class ExtReal {
 public:
  constexpr ExtReal() = default;
  explicit ExtReal(double value);

  static ExtReal infinity() { return ExtReal(kInf); }

  bool is_finite() const { return value_ != kInf; }
  bool is_infinite() const { return value_ == kInf; }
  /// The raw value; +inf for the infinite element.
  double value() const { return value_; }

  friend ExtReal operator+(ExtReal a, ExtReal b) { return ExtReal(a.value_ + b.value_); }
  friend bool operator==(ExtReal a, ExtReal b) { return a.value_ == b.value_; }
  friend std::partial_ordering operator<=>(ExtReal a, ExtReal b) { return a.value_ <=> b.value_; }

  std::string to_string() const;

 private:
  double value_ = 0.0;
};

struct Cell {
  std::size_t row = 0;
  std::size_t col = 0;

  friend auto operator<=>(const Cell&, const Cell&) = default;
};

/// Dense row-major real matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  static Matrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  std::span<const double> data() const { return data_; }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(data_).subspan(i * cols_, cols_);
  }

  std::vector<double> row_sums() const;
  std::vector<double> col_sums() const;
  double sum() const;
  std::vector<std::vector<double>> to_rows() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// A probability vector on a finite index set. Weights are validated, never
/// renormalized.
class Marginal {
 public:
  explicit Marginal(std::vector<double> weights, std::vector<std::string> labels = {});
  static Marginal uniform(std::size_t n);

  std::size_t size() const { return weights_.size(); }
  double operator[](std::size_t i) const { return weights_[i]; }
  std::span<const double> weights() const { return weights_; }
  const std::vector<std::string>& labels() const { return labels_; }

 private:
  std::vector<double> weights_;
  std::vector<std::string> labels_;
};

/// m x n matrix with entries in [0, +inf]. The finite-cost mask S = {c < inf}
/// is computed once at construction.
class CostMatrix {
 public:
  CostMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries);
  explicit CostMatrix(const Matrix& m);
  static CostMatrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double operator()(std::size_t i, std::size_t j) const { return entries_[i * cols_ + j]; }
  ExtReal at(std::size_t i, std::size_t j) const { return ExtReal((*this)(i, j)); }
  bool finite(std::size_t i, std::size_t j) const { return finite_[i * cols_ + j] != 0; }
  std::span<const double> entries() const { return entries_; }

  std::size_t finite_count() const { return finite_count_; }
  /// Smallest and largest finite entries; nullopt when every entry is +inf.
  std::optional<double> min_finite() const;
  std::optional<double> max_finite() const;
  /// Tolerance scale 1 + (largest finite entry), or 1 when S is empty.
  double scale() const;

  std::vector<std::vector<double>> to_rows() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> entries_;
  std::vector<unsigned char> finite_;
  std::size_t finite_count_ = 0;
};

/// A coupling matrix together with its marginal residuals
/// (achieved marginal minus target marginal).
class TransportPlan {
 public:
  /// Entries below -tol are rejected; the rest are clipped to >= 0. The total
  /// mass must be 1 within tol. Residuals stay empty without target marginals.
  explicit TransportPlan(Matrix mass, double tol = kDefaultPlanTolerance);
  TransportPlan(Matrix mass, const Marginal& mu, const Marginal& nu,
                double tol = kDefaultPlanTolerance);

  std::size_t rows() const { return mass_.rows(); }
  std::size_t cols() const { return mass_.cols(); }
  const Matrix& mass() const { return mass_; }
  double operator()(std::size_t i, std::size_t j) const { return mass_(i, j); }

  const std::vector<double>& row_residual() const { return row_residual_; }
  const std::vector<double>& col_residual() const { return col_residual_; }
  bool has_residuals() const { return !row_residual_.empty() || !col_residual_.empty(); }
  /// Largest absolute residual; 0 when the plan carries no residuals.
  double max_residual() const;

  double total_mass() const { return mass_.sum(); }
  /// Cells with mass strictly above threshold, in row-major order.
  std::vector<Cell> support(double threshold = kDefaultSupportThreshold) const;

 private:
  Matrix mass_;
  std::vector<double> row_residual_;
  std::vector<double> col_residual_;
};

/// Finite dual potentials: phi on the first space, psi on the second.
struct PotentialPair {
  std::vector<double> phi;
  std::vector<double> psi;

  PotentialPair() = default;
  PotentialPair(std::vector<double> phi_values, std::vector<double> psi_values);

  /// (phi + t, psi - t); leaves every sum phi_i + psi_j unchanged.
  PotentialPair shifted(double t) const;
};

/// sum_ij mass_ij * c_ij with 0 * inf = 0. Infinite iff some cell with positive
/// mass has infinite cost.
ExtReal plan_cost(const TransportPlan& plan, const CostMatrix& c);

/// Matrix with entry (i, j) = phi[i] + psi[j].
Matrix oplus(std::span<const double> phi, std::span<const double> psi);

struct NormalizedCost {
  CostMatrix cost;
  double shift = 0.0;
};

/// Shift every finite entry by 1 - min_finite so the smallest finite entry is
/// exactly 1. The transport value of the shifted cost is the original value
/// plus shift. Throws InvalidInput when every entry is +inf.
NormalizedCost normalize_cost(const CostMatrix& c);

void require_dimensions(const CostMatrix& c, std::size_t rows, std::size_t cols,
                        const char* what);

}  // namespace mkot
