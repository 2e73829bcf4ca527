#include "mkot/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mkot {

ExtReal::ExtReal(double value) : value_(value) {
  if (std::isnan(value)) throw InvalidInput("extended real cannot be NaN");
  if (value < 0.0) throw InvalidInput("extended real must be >= 0, got " + std::to_string(value));
}

std::string ExtReal::to_string() const {
  if (is_infinite()) return "inf";
  std::ostringstream os;
  os.precision(17);
  os << value_;
  return os.str();
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) throw DimensionMismatch("matrix data size does not match shape");
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t m = rows.size();
  const std::size_t n = m == 0 ? 0 : rows.front().size();
  std::vector<double> data;
  data.reserve(m * n);
  for (const auto& r : rows) {
    if (r.size() != n) throw DimensionMismatch("ragged matrix rows");
    data.insert(data.end(), r.begin(), r.end());
  }
  return Matrix(m, n, std::move(data));
}

std::vector<double> Matrix::row_sums() const {
  std::vector<double> out(rows_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) out[i] += (*this)(i, j);
  return out;
}

std::vector<double> Matrix::col_sums() const {
  std::vector<double> out(cols_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) out[j] += (*this)(i, j);
  return out;
}

double Matrix::sum() const {
  double s = 0.0;
  for (double v : data_) s += v;
  return s;
}

std::vector<std::vector<double>> Matrix::to_rows() const {
  std::vector<std::vector<double>> out(rows_);
  for (std::size_t i = 0; i < rows_; ++i) out[i].assign(row(i).begin(), row(i).end());
  return out;
}

Marginal::Marginal(std::vector<double> weights, std::vector<std::string> labels)
    : weights_(std::move(weights)), labels_(std::move(labels)) {
  if (weights_.empty()) throw InvalidInput("marginal must have at least one point");
  if (!labels_.empty() && labels_.size() != weights_.size())
    throw DimensionMismatch("marginal labels do not match weights");
  double total = 0.0;
  for (double w : weights_) {
    if (!std::isfinite(w) || w < 0.0) throw InvalidInput("marginal weights must be finite and >= 0");
    total += w;
  }
  if (std::abs(total - 1.0) > kProbabilityTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "marginal weights sum to " << total << ", expected 1";
    throw InvalidInput(os.str());
  }
}

Marginal Marginal::uniform(std::size_t n) {
  return Marginal(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

CostMatrix::CostMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
  if (entries_.size() != rows_ * cols_) throw DimensionMismatch("cost data size does not match shape");
  if (rows_ == 0 || cols_ == 0) throw InvalidInput("cost matrix must be non-empty");
  finite_.resize(entries_.size());
  for (std::size_t k = 0; k < entries_.size(); ++k) {
    const double v = entries_[k];
    if (std::isnan(v) || v < 0.0) throw InvalidInput("cost entries must be >= 0 or +inf");
    finite_[k] = v != kInf ? 1 : 0;
    finite_count_ += finite_[k];
  }
}

CostMatrix::CostMatrix(const Matrix& m)
    : CostMatrix(m.rows(), m.cols(), std::vector<double>(m.data().begin(), m.data().end())) {}

CostMatrix CostMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  return CostMatrix(Matrix::from_rows(rows));
}

std::optional<double> CostMatrix::min_finite() const {
  std::optional<double> best;
  for (std::size_t k = 0; k < entries_.size(); ++k)
    if (finite_[k] && (!best || entries_[k] < *best)) best = entries_[k];
  return best;
}

std::optional<double> CostMatrix::max_finite() const {
  std::optional<double> best;
  for (std::size_t k = 0; k < entries_.size(); ++k)
    if (finite_[k] && (!best || entries_[k] > *best)) best = entries_[k];
  return best;
}

double CostMatrix::scale() const { return 1.0 + max_finite().value_or(0.0); }

std::vector<std::vector<double>> CostMatrix::to_rows() const {
  std::vector<std::vector<double>> out(rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    out[i].assign(entries_.begin() + static_cast<std::ptrdiff_t>(i * cols_),
                  entries_.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols_));
  return out;
}

namespace {

Matrix clip_mass(Matrix mass, double tol) {
  for (std::size_t i = 0; i < mass.rows(); ++i) {
    for (std::size_t j = 0; j < mass.cols(); ++j) {
      double& v = mass(i, j);
      if (!std::isfinite(v)) throw InvalidInput("plan mass must be finite");
      if (v < -tol) throw InvalidInput("plan mass must be nonnegative");
      if (v < 0.0) v = 0.0;
    }
  }
  if (std::abs(mass.sum() - 1.0) > tol) throw InvalidInput("plan total mass must be 1");
  return mass;
}

}  // namespace

TransportPlan::TransportPlan(Matrix mass, double tol) : mass_(clip_mass(std::move(mass), tol)) {}

TransportPlan::TransportPlan(Matrix mass, const Marginal& mu, const Marginal& nu, double tol)
    : TransportPlan(std::move(mass), tol) {
  if (mass_.rows() != mu.size() || mass_.cols() != nu.size())
    throw DimensionMismatch("plan shape does not match marginals");
  row_residual_ = mass_.row_sums();
  col_residual_ = mass_.col_sums();
  for (std::size_t i = 0; i < mu.size(); ++i) row_residual_[i] -= mu[i];
  for (std::size_t j = 0; j < nu.size(); ++j) col_residual_[j] -= nu[j];
}

double TransportPlan::max_residual() const {
  double r = 0.0;
  for (double v : row_residual_) r = std::max(r, std::abs(v));
  for (double v : col_residual_) r = std::max(r, std::abs(v));
  return r;
}

std::vector<Cell> TransportPlan::support(double threshold) const {
  std::vector<Cell> out;
  for (std::size_t i = 0; i < rows(); ++i)
    for (std::size_t j = 0; j < cols(); ++j)
      if (mass_(i, j) > threshold) out.push_back({i, j});
  return out;
}

PotentialPair::PotentialPair(std::vector<double> phi_values, std::vector<double> psi_values)
    : phi(std::move(phi_values)), psi(std::move(psi_values)) {
  for (double v : phi)
    if (!std::isfinite(v)) throw InvalidInput("potential phi must be finite");
  for (double v : psi)
    if (!std::isfinite(v)) throw InvalidInput("potential psi must be finite");
}

PotentialPair PotentialPair::shifted(double t) const {
  PotentialPair out = *this;
  for (double& v : out.phi) v += t;
  for (double& v : out.psi) v -= t;
  return out;
}

void require_dimensions(const CostMatrix& c, std::size_t rows, std::size_t cols, const char* what) {
  if (c.rows() != rows || c.cols() != cols) {
    throw DimensionMismatch(std::string(what) + ": expected " + std::to_string(c.rows()) + "x" +
                            std::to_string(c.cols()) + ", got " + std::to_string(rows) + "x" +
                            std::to_string(cols));
  }
}

ExtReal plan_cost(const TransportPlan& plan, const CostMatrix& c) {
  require_dimensions(c, plan.rows(), plan.cols(), "plan_cost");
  double total = 0.0;
  for (std::size_t i = 0; i < plan.rows(); ++i) {
    for (std::size_t j = 0; j < plan.cols(); ++j) {
      const double m = plan(i, j);
      if (m == 0.0) continue;
      if (!c.finite(i, j)) return ExtReal::infinity();
      total += m * c(i, j);
    }
  }
  return ExtReal(total);
}

Matrix oplus(std::span<const double> phi, std::span<const double> psi) {
  Matrix out(phi.size(), psi.size());
  for (std::size_t i = 0; i < phi.size(); ++i)
    for (std::size_t j = 0; j < psi.size(); ++j) out(i, j) = phi[i] + psi[j];
  return out;
}

NormalizedCost normalize_cost(const CostMatrix& c) {
  const auto lo = c.min_finite();
  if (!lo) throw InvalidInput("empty finite support");
  const double shift = 1.0 - *lo;
  std::vector<double> shifted(c.entries().begin(), c.entries().end());
  for (double& v : shifted) {
    if (v == kInf) continue;
    // Pin the minimum to exactly 1 regardless of rounding in lo + (1 - lo).
    v = (v == *lo) ? 1.0 : std::max(1.0, v + shift);
  }
  return {CostMatrix(c.rows(), c.cols(), std::move(shifted)), shift};
}

}  // namespace mkot
