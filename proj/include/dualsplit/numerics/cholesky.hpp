#pragma once

#include <cmath>
#include <string>

#include "dualsplit/numerics/dense.hpp"
#include "dualsplit/numerics/errors.hpp"

namespace dualsplit::numerics {

struct NumericsOptions {
  double symmetry_tol = 1e-12;     // allowed asymmetry, relative to the largest entry
  double pivot_rel_tol = 1e-14;    // pivot threshold relative to the largest diagonal entry
  double spectral_tol = 1e-8;      // relative tolerance of the spectral estimates
  int spectral_max_iter = 10000;   // iteration cap before NoConvergence
};

/// Lower-triangular Cholesky factor L with L L^T = M.
class CholeskyFactor {
 public:
  CholeskyFactor() = default;
  explicit CholeskyFactor(DenseMatrix lower) : lower_(std::move(lower)) {}

  const DenseMatrix& lower() const { return lower_; }
  std::size_t dim() const { return lower_.rows(); }

  /// Solves M x = b by forward/back substitution on the factor.
  Vector solve(const Vector& b) const {
    const std::size_t n = dim();
    if (b.size() != n) throw DimensionMismatch("cholesky solve rhs size");
    Vector x(b);
    for (std::size_t i = 0; i < n; ++i) {
      double acc = x[i];
      for (std::size_t j = 0; j < i; ++j) acc -= lower_(i, j) * x[j];
      x[i] = acc / lower_(i, i);
    }
    for (std::size_t ii = n; ii-- > 0;) {
      double acc = x[ii];
      for (std::size_t j = ii + 1; j < n; ++j) acc -= lower_(j, ii) * x[j];
      x[ii] = acc / lower_(ii, ii);
    }
    return x;
  }

  DenseMatrix reconstruct() const {
    return matmul(lower_, lower_.transposed());
  }

  double log_det() const {
    double acc = 0.0;
    for (std::size_t i = 0; i < dim(); ++i) acc += std::log(lower_(i, i));
    return 2.0 * acc;
  }

 private:
  DenseMatrix lower_;
};

/// Factors a symmetric positive definite matrix. Rejects asymmetric input and
/// throws NotPositiveDefinite when a pivot falls below pivot_rel_tol times the
/// largest diagonal entry.
inline CholeskyFactor cholesky(const DenseMatrix& m, const NumericsOptions& opts = {}) {
  const std::size_t n = m.rows();
  if (m.cols() != n) throw DimensionMismatch("cholesky expects a square matrix");
  double max_abs = 0.0;
  double max_diag = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    max_diag = std::max(max_diag, std::abs(m(i, i)));
    for (std::size_t j = 0; j < n; ++j) max_abs = std::max(max_abs, std::abs(m(i, j)));
  }
  const double sym_tol = opts.symmetry_tol * std::max(1.0, max_abs);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(m(i, j) - m(j, i)) > sym_tol)
        throw InvalidParameter("cholesky input is not symmetric");

  DenseMatrix l(n, n);
  const double pivot_floor = opts.pivot_rel_tol * std::max(max_diag, 1e-300);
  for (std::size_t j = 0; j < n; ++j) {
    double d = m(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > pivot_floor))
      throw NotPositiveDefinite("pivot " + std::to_string(d) + " at column " + std::to_string(j));
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double acc = m(i, j);
      for (std::size_t k = 0; k < j; ++k) acc -= l(i, k) * l(j, k);
      l(i, j) = acc / ljj;
    }
  }
  return CholeskyFactor(std::move(l));
}

}  // namespace dualsplit::numerics
