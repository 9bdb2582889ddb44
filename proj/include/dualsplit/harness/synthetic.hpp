#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "dualsplit/harness/problem_io.hpp"
#include "dualsplit/model/mpc_problem.hpp"
#include "dualsplit/numerics/spectral.hpp"
#include "dualsplit/sampling/rng.hpp"

namespace dualsplit::harness {

/// Knobs of the synthetic plant generator. The defaults keep the large-step
/// configurations of the reference experiments stable: the plant matrix is
/// normal with spectral norm equal to the spectral radius, the input matrix
/// and the constraint rows are scaled small, so the coupling eigenvalue stays
/// near 2 and the dual proximal gradient tolerates steps up to ~0.95.
struct GenOptions {
  double spectral_radius = 0.98;
  double input_norm = 0.3;         // spectral norm of B
  double constraint_row_norm = 0.15;
  double input_bound = 1.0;
  double init_fraction = 0.9;      // ||x_init||_2 as a fraction of the state bound
  std::size_t extra_rows = 0;      // additional random constraint rows
  // Uniform scale applied to Q and R. Leaves the weight conditioning at
  // target_kappa; raising it raises sigma_f, which widens the empirically
  // stable step range of the sampled dual updates the way physically scaled
  // stage weights do.
  double weight_scale = 1.0;
};

struct SyntheticProblem {
  model::MpcProblem problem;
  json file;  // serialized problem document
};

namespace detail {

// Gram-Schmidt orthonormalization of a random square matrix.
inline numerics::DenseMatrix random_orthogonal(std::size_t n, sampling::Rng& rng) {
  numerics::DenseMatrix u(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    numerics::Vector col(n);
    for (auto& x : col) x = rng.normal();
    for (std::size_t prev = 0; prev < c; ++prev) {
      double proj = 0.0;
      for (std::size_t i = 0; i < n; ++i) proj += u(i, prev) * col[i];
      for (std::size_t i = 0; i < n; ++i) col[i] -= proj * u(i, prev);
    }
    double nrm = numerics::norm2(col);
    if (nrm < 1e-8) {  // extremely unlikely; fall back to a unit vector
      col.assign(n, 0.0);
      col[c] = 1.0;
      nrm = 1.0;
    }
    for (std::size_t i = 0; i < n; ++i) u(i, c) = col[i] / nrm;
  }
  return u;
}

}  // namespace detail

/// Generates a stable random LTI regulation problem whose split-form
/// condition number is target_kappa: rotation pole pairs near the unit
/// circle under a random orthogonal similarity, unit box constraints on
/// states and inputs, and a log-spaced diagonal Q against an identity R (the
/// magnitude disparity of the physical states lives in the weight
/// conditioning after normalization). Identical seeds produce identical
/// documents byte for byte.
inline SyntheticProblem gen_synthetic(std::size_t n, std::size_t m, std::size_t N,
                                      double target_kappa, std::uint64_t seed,
                                      const GenOptions& opts = {}) {
  if (n < 1 || m < 1 || N < 1) throw InvalidParameter("dimensions must be positive");
  if (!(target_kappa >= 1.0)) throw InvalidParameter("target_kappa must be at least 1");
  sampling::Rng rng(seed ^ 0xD5A1575CULL);

  using numerics::DenseMatrix;
  using numerics::Vector;

  // normal plant matrix: rotation blocks under an orthogonal similarity
  DenseMatrix core(n, n);
  {
    std::size_t i = 0;
    std::vector<double> radii;
    while (i + 1 < n) {
      const double r = rng.uniform(0.5, 1.0);
      const double theta = rng.uniform(0.15, 1.2);  // complex pair off the real axis
      core(i, i) = r * std::cos(theta);
      core(i, i + 1) = r * std::sin(theta);
      core(i + 1, i) = -r * std::sin(theta);
      core(i + 1, i + 1) = r * std::cos(theta);
      radii.push_back(r);
      i += 2;
    }
    if (i < n) {
      const double r = rng.uniform(0.5, 1.0);
      core(i, i) = r;
      radii.push_back(r);
    }
    double rmax = 0.0;
    for (double r : radii) rmax = std::max(rmax, r);
    const double scale = opts.spectral_radius / rmax;
    for (double& x : core.data()) x *= scale;
  }
  const DenseMatrix u = detail::random_orthogonal(n, rng);
  DenseMatrix A = numerics::matmul(numerics::matmul(u, core), u.transposed());

  DenseMatrix B(n, m);
  for (double& x : B.data()) x = rng.normal();
  {
    const double bnorm = std::sqrt(numerics::extreme_singular_values(B).sv_max);
    for (double& x : B.data()) x *= opts.input_norm / bnorm;
  }

  // unit state boxes in normalized coordinates; the plant matrix is normal
  // with norm 0.98, so the free evolution of any ||x|| < 1 state stays
  // strictly feasible and the generated problem always admits u = 0.
  // Rows are scaled to the configured norm (row scaling leaves the feasible
  // set unchanged).
  Vector xmax(n, 1.0);
  const double gamma = opts.constraint_row_norm;
  const std::size_t p = 2 * (n + m) + opts.extra_rows;
  DenseMatrix C(p, n), D(p, m);
  Vector d(p);
  for (std::size_t i = 0; i < n; ++i) {
    C(2 * i, i) = gamma;
    C(2 * i + 1, i) = -gamma;
    d[2 * i] = d[2 * i + 1] = gamma * xmax[i];
  }
  for (std::size_t j = 0; j < m; ++j) {
    D(2 * n + 2 * j, j) = gamma;
    D(2 * n + 2 * j + 1, j) = -gamma;
    d[2 * n + 2 * j] = d[2 * n + 2 * j + 1] = gamma * opts.input_bound;
  }
  for (std::size_t r = 0; r < opts.extra_rows; ++r) {
    const std::size_t row = 2 * (n + m) + r;
    Vector dir(n + m);
    for (auto& x : dir) x = rng.normal();
    const double nrm = numerics::norm2(dir);
    double margin = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      C(row, i) = gamma * dir[i] / nrm;
      margin += std::abs(C(row, i)) * xmax[i];
    }
    for (std::size_t j = 0; j < m; ++j) {
      D(row, j) = gamma * dir[n + j] / nrm;
      margin += std::abs(D(row, j)) * opts.input_bound;
    }
    d[row] = 1.1 * margin;
  }

  DenseMatrix Q(n, n);
  for (std::size_t i = 0; i < n; ++i)
    Q(i, i) = opts.weight_scale *
              std::pow(target_kappa,
                       n == 1 ? 1.0 : static_cast<double>(i) / static_cast<double>(n - 1));
  if (n == 1) Q(0, 0) = opts.weight_scale * target_kappa;
  DenseMatrix R(m, m);
  for (std::size_t j = 0; j < m; ++j) R(j, j) = opts.weight_scale;

  // initial state on the sphere of radius init_fraction: close to the
  // saturation limits but guaranteed recoverable
  Vector x0(n);
  const double coord = opts.init_fraction / std::sqrt(static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    x0[i] = (rng.next_double() < 0.5 ? -1.0 : 1.0) * coord;

  SyntheticProblem out;
  out.problem = model::build_problem(std::move(A), std::move(B), std::move(C), std::move(D),
                                     std::move(d), std::move(Q), std::move(R), N, std::move(x0));
  out.file = problem_to_json(out.problem);
  return out;
}

}  // namespace dualsplit::harness
