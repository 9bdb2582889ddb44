#pragma once

#include <cmath>

#include "dualsplit/numerics/cholesky.hpp"
#include "dualsplit/numerics/dense.hpp"
#include "dualsplit/numerics/errors.hpp"

namespace dualsplit::numerics {

/// Extreme eigenvalues of M^T M (the squared singular values of M). This is
/// the convention used throughout the solver constants: sv_max(M) is the
/// largest eigenvalue of M^T M, sv_min(M) the smallest.
struct SpectralExtremes {
  double sv_max = 0.0;
  double sv_min = 0.0;
};

namespace detail {

// Deterministic start vector: all-ones plus a mild index-dependent tilt so we
// do not start orthogonal to the leading eigenvector of simple structured
// matrices.
inline Vector power_start(std::size_t n) {
  Vector v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = 1.0 + 1e-3 * static_cast<double>(i % 7);
  double nrm = norm2(v);
  for (double& x : v) x /= nrm;
  return v;
}

template <typename ApplyFn>
double rayleigh_iterate(std::size_t n, ApplyFn&& apply, const NumericsOptions& opts,
                        const char* what) {
  Vector v = power_start(n);
  double lambda = 0.0;
  int stable = 0;
  for (int it = 0; it < opts.spectral_max_iter; ++it) {
    Vector w = apply(v);
    const double nrm = norm2(w);
    if (nrm == 0.0) return 0.0;  // v in the kernel: eigenvalue 0 found exactly
    const double next = dot(v, w);
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / nrm;
    const double scale = std::max(std::abs(next), 1e-300);
    if (std::abs(next - lambda) <= opts.spectral_tol * 1e-1 * scale) {
      if (++stable >= 3) return next;
    } else {
      stable = 0;
    }
    lambda = next;
  }
  throw NoConvergence(std::string(what) + " power iteration exceeded the iteration cap");
}

}  // namespace detail

/// Largest and smallest eigenvalues of M^T M. The largest comes from a power
/// iteration on the Gram matrix; the smallest from an inverse iteration on a
/// slightly shifted Gram matrix (shift = 1e-12 * trace) so that rank-deficient
/// input still factors. Throws NoConvergence after the configured cap.
inline SpectralExtremes extreme_singular_values(const DenseMatrix& m,
                                                const NumericsOptions& opts = {}) {
  if (m.rows() == 0 || m.cols() == 0) throw InvalidParameter("empty matrix");
  bool nonzero = false;
  for (double x : m.data())
    if (x != 0.0) nonzero = true;
  if (!nonzero) throw InvalidParameter("extreme_singular_values expects a nonzero matrix");

  const DenseMatrix g = gram(m);
  const std::size_t n = g.rows();

  SpectralExtremes out;
  out.sv_max = detail::rayleigh_iterate(
      n, [&](const Vector& v) { return matvec(g, v); }, opts, "sv_max");

  double trace = 0.0;
  for (std::size_t i = 0; i < n; ++i) trace += g(i, i);
  const double shift = 1e-12 * trace;
  DenseMatrix shifted = g;
  for (std::size_t i = 0; i < n; ++i) shifted(i, i) += shift;
  const CholeskyFactor f = cholesky(shifted, opts);
  const double inv_lambda = detail::rayleigh_iterate(
      n, [&](const Vector& v) { return f.solve(v); }, opts, "sv_min");
  // inv_lambda estimates 1 / (lambda_min + shift)
  const double lam = 1.0 / inv_lambda - shift;
  out.sv_min = lam > 0.0 ? lam : 0.0;
  if (out.sv_min > out.sv_max) out.sv_min = out.sv_max;
  return out;
}

}  // namespace dualsplit::numerics
