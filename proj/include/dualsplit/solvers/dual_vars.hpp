#pragma once

#include <cstddef>
#include <vector>

#include "dualsplit/model/time_split.hpp"
#include "dualsplit/numerics/dense.hpp"

namespace dualsplit::solvers {

using model::SplitProblem;
using numerics::Vector;

/// Multipliers of the split problem, stored per stage: w_t (t = 1..N, index
/// t-1), v_t (t = 1..N, index t-1) and lambda_t (t = 0..N).
///
/// Sign convention. The stage minimization reads
///   y_t = Qcal^{-1} (G' lambda_t - H1' w_t - H2' v_{t+1}),
/// which makes the dual-feasible set {w_t + v_t = 0, lambda_t <= 0}: at a
/// constrained optimum the stored lambda equals minus the conventional
/// nonnegative KKT multiplier. The zero start is feasible on both counts.
struct DualVars {
  std::vector<Vector> w;       // N blocks of n
  std::vector<Vector> v;       // N blocks of n
  std::vector<Vector> lambda;  // N+1 blocks of p

  static DualVars zeros(const SplitProblem& s) {
    DualVars d;
    d.w.assign(s.N, Vector(s.n, 0.0));
    d.v.assign(s.N, Vector(s.n, 0.0));
    d.lambda.assign(s.N + 1, Vector(s.p, 0.0));
    return d;
  }

  /// Stacks into the row order of the materialized Hy: per stage t the block
  /// (w_t, v_{t+1}, lambda_t), with w absent at t = 0 and v at t = N.
  Vector stacked(const SplitProblem& s) const {
    Vector mu(s.mu_dim(), 0.0);
    std::size_t r = 0;
    for (std::size_t t = 0; t <= s.N; ++t) {
      if (t >= 1)
        for (std::size_t i = 0; i < s.n; ++i) mu[r++] = w[t - 1][i];
      if (t + 1 <= s.N)
        for (std::size_t i = 0; i < s.n; ++i) mu[r++] = v[t][i];
      for (std::size_t i = 0; i < s.p; ++i) mu[r++] = lambda[t][i];
    }
    return mu;
  }

  static DualVars from_stacked(const SplitProblem& s, const Vector& mu) {
    if (mu.size() != s.mu_dim()) throw DimensionMismatch("stacked dual size");
    DualVars d = zeros(s);
    std::size_t r = 0;
    for (std::size_t t = 0; t <= s.N; ++t) {
      if (t >= 1)
        for (std::size_t i = 0; i < s.n; ++i) d.w[t - 1][i] = mu[r++];
      if (t + 1 <= s.N)
        for (std::size_t i = 0; i < s.n; ++i) d.v[t][i] = mu[r++];
      for (std::size_t i = 0; i < s.p; ++i) d.lambda[t][i] = mu[r++];
    }
    return d;
  }
};

/// Zero multipliers: the consensus rows vanish and the orthant sign condition
/// holds, so this is always a feasible start.
inline DualVars init_duals(const SplitProblem& s) { return DualVars::zeros(s); }

/// Stage linear term s_t = H1' w_t + H2' v_{t+1} - G' lambda_t (the stage-t
/// block of Hy' mu). Absent boundary multipliers are dropped.
inline Vector stage_linear_term(const SplitProblem& s, const DualVars& duals, std::size_t t) {
  const model::StageData& st = s.stage_at(t);
  Vector acc(s.y_dim(), 0.0);
  if (t >= 1) {
    const Vector& wt = duals.w[t - 1];
    for (std::size_t i = 0; i < s.n; ++i) acc[i] += wt[i];  // H1' w, H1 = [I 0]
  }
  if (t + 1 <= s.N) {
    const Vector h2v = numerics::matvec_transposed(st.H2, duals.v[t]);
    numerics::axpy(1.0, h2v, acc);
  }
  const Vector gl = numerics::matvec_transposed(st.G, duals.lambda[t]);
  numerics::axpy(-1.0, gl, acc);
  return acc;
}

/// Closed-form stage minimizer. Stage 0 has its state pinned to x_init, so
/// only the input block is solved there.
inline Vector solve_stage(const SplitProblem& s, const DualVars& duals, std::size_t t) {
  const model::StageData& st = s.stage_at(t);
  const Vector lin = stage_linear_term(s, duals, t);
  if (t == 0) {
    Vector su(lin.begin() + s.n, lin.end());
    for (double& x : su) x = -x;
    const Vector u = st.Rfactor.solve(su);
    Vector y(s.y_dim());
    for (std::size_t i = 0; i < s.n; ++i) y[i] = s.x_init[i];
    for (std::size_t i = 0; i < s.m; ++i) y[s.n + i] = u[i];
    return y;
  }
  Vector rhs = lin;
  for (double& x : rhs) x = -x;
  return st.QcalFactor.solve(rhs);
}

struct DualValue {
  double value = 0.0;
  bool in_domain = true;  // false marks a point outside dom(G); value is meaningless there
};

/// Dual objective at the given multipliers. `stage_minimizers` must hold the
/// per-stage solutions for these duals (solve_stage output); the returned
/// value is then the exact dual function
///   D(mu) = sum_t [ f_t(y_t(mu)) + s_t' y_t(mu) ] + sum_t d' lambda_t,
/// which includes the x_init terms of the pinned stage 0, so it meets the
/// primal optimum under strong duality. Out-of-domain multipliers (consensus
/// rows above domain_tol or lambda above domain_tol) yield a flagged marker
/// instead of a number.
inline DualValue dual_surrogate(const SplitProblem& s, const DualVars& duals,
                                const std::vector<Vector>& stage_minimizers,
                                double domain_tol = 1e-9) {
  DualValue out;
  for (std::size_t t = 1; t <= s.N; ++t) {
    const Vector sum = numerics::add(duals.w[t - 1], duals.v[t - 1]);
    if (numerics::norm_inf(sum) > domain_tol) {
      out.in_domain = false;
      return out;
    }
  }
  for (std::size_t t = 0; t <= s.N; ++t)
    for (double l : duals.lambda[t])
      if (l > domain_tol) {
        out.in_domain = false;
        return out;
      }
  if (stage_minimizers.size() != s.N + 1)
    throw DimensionMismatch("stage minimizer count");
  double acc = 0.0;
  for (std::size_t t = 0; t <= s.N; ++t) {
    const Vector& y = stage_minimizers[t];
    const Vector qy = numerics::matvec(s.stage_at(t).Qcal, y);
    const Vector lin = stage_linear_term(s, duals, t);
    acc += 0.5 * numerics::dot(y, qy) + numerics::dot(lin, y);
    acc += numerics::dot(s.d, duals.lambda[t]);
  }
  out.value = acc;
  return out;
}

/// Convenience overload that recomputes the stage minimizers.
inline DualValue dual_surrogate(const SplitProblem& s, const DualVars& duals,
                                double domain_tol = 1e-9) {
  std::vector<Vector> ys(s.N + 1);
  for (std::size_t t = 0; t <= s.N; ++t) ys[t] = solve_stage(s, duals, t);
  return dual_surrogate(s, duals, ys, domain_tol);
}

}  // namespace dualsplit::solvers
