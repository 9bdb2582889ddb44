#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include "dualsplit/numerics/cholesky.hpp"
#include "dualsplit/numerics/dense.hpp"

namespace dualsplit::model {

using numerics::DenseMatrix;
using numerics::Vector;

/// Finite-horizon regulation problem for a discrete LTI plant:
///
///   minimize  1/2 sum_{t=0..N} (x_t' Q x_t + u_t' R u_t)
///   s.t.      x_{t+1} = A x_t + B u_t          t = 0..N-1
///             C x_t + D u_t <= d               t = 0..N
///             x_0 = x_init
///
/// Q and R must be symmetric positive definite. An optional terminal weight
/// replaces Q at t = N; by default the terminal stage reuses Q.
struct MpcProblem {
  DenseMatrix A;  // n x n
  DenseMatrix B;  // n x m
  DenseMatrix C;  // p x n
  DenseMatrix D;  // p x m
  Vector d;       // p
  DenseMatrix Q;  // n x n
  DenseMatrix R;  // m x m
  std::size_t N = 0;
  Vector x_init;  // n
  std::optional<DenseMatrix> terminal_weight;  // n x n, defaults to Q

  std::size_t n() const { return A.rows(); }
  std::size_t m() const { return B.cols(); }
  std::size_t p() const { return C.rows(); }
};

namespace detail {
inline void require(bool ok, const std::string& what) {
  if (!ok) throw DimensionMismatch(what);
}
}  // namespace detail

/// Validates dimensions and definiteness and returns the assembled problem.
/// Throws DimensionMismatch or NotPositiveDefinite.
inline MpcProblem build_problem(DenseMatrix A, DenseMatrix B, DenseMatrix C, DenseMatrix D,
                                Vector d, DenseMatrix Q, DenseMatrix R, std::size_t N,
                                Vector x_init,
                                std::optional<DenseMatrix> terminal_weight = std::nullopt) {
  const std::size_t n = A.rows();
  const std::size_t m = B.cols();
  const std::size_t p = C.rows();
  detail::require(A.cols() == n, "A must be square");
  detail::require(B.rows() == n, "B row count must match the state dimension");
  detail::require(C.cols() == n && D.rows() == p && D.cols() == m,
                  "constraint blocks C, D must be p x n and p x m");
  detail::require(d.size() == p, "d length must match the constraint row count");
  detail::require(Q.rows() == n && Q.cols() == n, "Q must be n x n");
  detail::require(R.rows() == m && R.cols() == m, "R must be m x m");
  detail::require(x_init.size() == n, "x_init length must match the state dimension");
  detail::require(N >= 1, "horizon must be at least 1");
  detail::require(n >= 1 && m >= 1, "state and input dimensions must be positive");

  numerics::cholesky(Q);  // throws NotPositiveDefinite on failure
  numerics::cholesky(R);
  if (terminal_weight) {
    detail::require(terminal_weight->rows() == n && terminal_weight->cols() == n,
                    "terminal weight must be n x n");
    numerics::cholesky(*terminal_weight);
  }

  MpcProblem prob;
  prob.A = std::move(A);
  prob.B = std::move(B);
  prob.C = std::move(C);
  prob.D = std::move(D);
  prob.d = std::move(d);
  prob.Q = std::move(Q);
  prob.R = std::move(R);
  prob.N = N;
  prob.x_init = std::move(x_init);
  prob.terminal_weight = std::move(terminal_weight);
  return prob;
}

}  // namespace dualsplit::model
