#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "dualsplit/model/mpc_problem.hpp"
#include "dualsplit/numerics/cholesky.hpp"
#include "dualsplit/numerics/dense.hpp"
#include "dualsplit/numerics/spectral.hpp"

namespace dualsplit::model {

/// Per-stage blocks of the horizon decomposition. The plant is LTI, so one
/// StageData is shared by every stage (a distinct terminal block exists only
/// when a terminal weight was configured).
///
///   H1 = [I_n 0],  H2 = [A B],  G = [C D],  Qcal = blkdiag(Q, R)
struct StageData {
  DenseMatrix Qcal;                    // (n+m) x (n+m)
  numerics::CholeskyFactor QcalFactor;
  numerics::CholeskyFactor Rfactor;    // input block alone, for the stage-0 solve
  DenseMatrix H1;                      // n x (n+m)
  DenseMatrix H2;                      // n x (n+m)
  DenseMatrix G;                       // p x (n+m)
};

/// Consensus reformulation of the MPC problem along the horizon:
///
///   minimize  sum_t f_t(y_t) + g(z, sigma)
///   s.t.      H1 y_t - z_t     = 0    (multiplier w_t,  t = 1..N)
///             H2 y_t - z_{t+1} = 0    (multiplier v_{t+1}, t = 0..N-1)
///             -G y_t - sigma_t = -d   (multiplier lambda_t, t = 0..N)
///
/// with y_t = [x_t; u_t], f_t(y) = 1/2 y' Qcal y, g the indicator of
/// sigma_t >= 0, and the stage-0 state pinned to x_init (stage 0 carries no
/// w_0 row and only its input block is free).
///
/// The stacked matrices materialize the same system with stage blocks
///   h_y0 = [H2; -G],  h_y = [H1; H2; -G],  h_yN = [H1; -G]
/// on the block diagonal of Hy, -I entries in Hz, and dbar = [0; 0; -d] per
/// stage. Dual rows are ordered (w_t, v_{t+1}, lambda_t) within the stage-t
/// block. The stacked forms exist for constant computation and reference use;
/// solvers touch only the per-stage blocks.
struct SplitProblem {
  std::size_t n = 0, m = 0, p = 0, N = 0;
  Vector x_init;
  Vector d;
  StageData stage;
  std::optional<StageData> terminal;  // present only with a distinct terminal weight

  DenseMatrix Hy;   // n_mu x (N+1)(n+m)
  DenseMatrix Hz;   // n_mu x (N n + (N+1) p)
  Vector dbar;      // n_mu

  double sigma_f = 0.0;     // smallest eigenvalue of Qcal over all stages
  double L_f = 0.0;         // largest eigenvalue of Qcal over all stages
  double eig_max_Hy = 0.0;  // largest eigenvalue of Hy' Hy
  double eig_min_Hy = 0.0;  // smallest eigenvalue of Hy' Hy
  double LgradF = 0.0;      // eig_max_Hy / sigma_f

  std::size_t y_dim() const { return n + m; }
  std::size_t mu_dim() const { return 2 * N * n + (N + 1) * p; }
  const StageData& stage_at(std::size_t t) const {
    return (terminal && t == N) ? *terminal : stage;
  }
  /// Offset of the stage-t dual block (w_t, v_{t+1}, lambda_t) in the stacked
  /// multiplier vector; stage 0 lacks w, stage N lacks v.
  std::size_t mu_offset(std::size_t t) const {
    if (t == 0) return 0;
    return (n + p) + (t - 1) * (2 * n + p);
  }
};

/// Primal variables of the split problem: stage vectors y_t = [x_t; u_t] for
/// t = 0..N, consensus states z_{t+1} for t = 0..N-1 (stored as z[t]), and
/// slacks sigma_t for t = 0..N.
struct PrimalVars {
  std::vector<Vector> y;
  std::vector<Vector> z;
  std::vector<Vector> sigma;

  static PrimalVars zeros(const SplitProblem& s) {
    PrimalVars v;
    v.y.assign(s.N + 1, Vector(s.y_dim(), 0.0));
    v.z.assign(s.N, Vector(s.n, 0.0));
    v.sigma.assign(s.N + 1, Vector(s.p, 0.0));
    return v;
  }
};

namespace detail {

inline StageData make_stage(const MpcProblem& prob, const DenseMatrix& Qw) {
  const std::size_t n = prob.n(), m = prob.m(), p = prob.p();
  StageData s;
  s.Qcal = DenseMatrix(n + m, n + m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) s.Qcal(i, j) = Qw(i, j);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) s.Qcal(n + i, n + j) = prob.R(i, j);
  s.QcalFactor = numerics::cholesky(s.Qcal);
  s.Rfactor = numerics::cholesky(prob.R);
  s.H1 = DenseMatrix(n, n + m);
  for (std::size_t i = 0; i < n; ++i) s.H1(i, i) = 1.0;
  s.H2 = DenseMatrix(n, n + m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) s.H2(i, j) = prob.A(i, j);
    for (std::size_t j = 0; j < m; ++j) s.H2(i, n + j) = prob.B(i, j);
  }
  s.G = DenseMatrix(p, n + m);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < n; ++j) s.G(i, j) = prob.C(i, j);
    for (std::size_t j = 0; j < m; ++j) s.G(i, n + j) = prob.D(i, j);
  }
  return s;
}

inline void place_block(DenseMatrix& dst, const DenseMatrix& src, std::size_t r0, std::size_t c0,
                        double scale = 1.0) {
  for (std::size_t i = 0; i < src.rows(); ++i)
    for (std::size_t j = 0; j < src.cols(); ++j) dst(r0 + i, c0 + j) = scale * src(i, j);
}

}  // namespace detail

/// Decomposes the MPC problem along the horizon and computes the problem
/// constants via the spectral routines.
inline SplitProblem time_split(const MpcProblem& prob) {
  const std::size_t n = prob.n(), m = prob.m(), p = prob.p(), N = prob.N;
  SplitProblem s;
  s.n = n;
  s.m = m;
  s.p = p;
  s.N = N;
  s.x_init = prob.x_init;
  s.d = prob.d;
  s.stage = detail::make_stage(prob, prob.Q);
  if (prob.terminal_weight) s.terminal = detail::make_stage(prob, *prob.terminal_weight);

  const std::size_t ydim = n + m;
  const std::size_t mu = s.mu_dim();
  s.Hy = DenseMatrix(mu, (N + 1) * ydim);
  s.Hz = DenseMatrix(mu, N * n + (N + 1) * p);
  s.dbar = Vector(mu, 0.0);
  const std::size_t sigma_col0 = N * n;  // sigma columns follow the z columns

  for (std::size_t t = 0; t <= N; ++t) {
    const StageData& st = s.stage_at(t);
    std::size_t r = s.mu_offset(t);
    const std::size_t yc = t * ydim;
    if (t >= 1) {  // w_t: H1 y_t - z_t = 0
      detail::place_block(s.Hy, st.H1, r, yc);
      for (std::size_t i = 0; i < n; ++i) s.Hz(r + i, (t - 1) * n + i) = -1.0;
      r += n;
    }
    if (t <= N - 1) {  // v_{t+1}: H2 y_t - z_{t+1} = 0
      detail::place_block(s.Hy, st.H2, r, yc);
      for (std::size_t i = 0; i < n; ++i) s.Hz(r + i, t * n + i) = -1.0;
      r += n;
    }
    // lambda_t: -G y_t - sigma_t = -d
    detail::place_block(s.Hy, st.G, r, yc, -1.0);
    for (std::size_t i = 0; i < p; ++i) {
      s.Hz(r + i, sigma_col0 + t * p + i) = -1.0;
      s.dbar[r + i] = -prob.d[i];
    }
  }

  // Qcal is symmetric positive definite, so the eigenvalues of Qcal' Qcal are
  // the squares of its ordinary eigenvalues.
  const auto q_ext = numerics::extreme_singular_values(s.stage.Qcal);
  s.sigma_f = std::sqrt(q_ext.sv_min);
  s.L_f = std::sqrt(q_ext.sv_max);
  if (s.terminal) {
    const auto t_ext = numerics::extreme_singular_values(s.terminal->Qcal);
    s.sigma_f = std::min(s.sigma_f, std::sqrt(t_ext.sv_min));
    s.L_f = std::max(s.L_f, std::sqrt(t_ext.sv_max));
  }
  const auto hy_ext = numerics::extreme_singular_values(s.Hy);
  s.eig_max_Hy = hy_ext.sv_max;
  s.eig_min_Hy = hy_ext.sv_min;
  s.LgradF = s.eig_max_Hy / s.sigma_f;
  return s;
}

/// 1/2 sum_t y_t' Qcal y_t over the stage vectors.
inline double primal_objective(const SplitProblem& split, const PrimalVars& vars) {
  if (vars.y.size() != split.N + 1) throw DimensionMismatch("primal stage count");
  double acc = 0.0;
  for (std::size_t t = 0; t <= split.N; ++t) {
    if (vars.y[t].size() != split.y_dim()) throw DimensionMismatch("stage vector size");
    const Vector qy = numerics::matvec(split.stage_at(t).Qcal, vars.y[t]);
    acc += 0.5 * numerics::dot(vars.y[t], qy);
  }
  return acc;
}

inline double primal_objective(const MpcProblem& prob, const PrimalVars& vars) {
  const std::size_t n = prob.n(), m = prob.m();
  if (vars.y.size() != prob.N + 1) throw DimensionMismatch("primal stage count");
  double acc = 0.0;
  for (std::size_t t = 0; t <= prob.N; ++t) {
    const Vector& y = vars.y[t];
    if (y.size() != n + m) throw DimensionMismatch("stage vector size");
    const DenseMatrix& Qw = (prob.terminal_weight && t == prob.N) ? *prob.terminal_weight : prob.Q;
    Vector x(y.begin(), y.begin() + n);
    Vector u(y.begin() + n, y.end());
    acc += 0.5 * (numerics::dot(x, numerics::matvec(Qw, x)) +
                  numerics::dot(u, numerics::matvec(prob.R, u)));
  }
  return acc;
}

struct Residuals {
  double consensus_res = 0.0;   // worst consensus / initial-state mismatch (inf norm)
  double ineq_violation = 0.0;  // worst positive part of G y_t - d
};

/// Residuals of the split-problem constraints at the given primal point:
/// consensus_res covers z_{t+1} = H2 y_t, z_{t+1} = H1 y_{t+1} and
/// H1 y_0 = x_init; ineq_violation is the componentwise max of (G y_t - d)+.
inline Residuals residuals(const SplitProblem& split, const PrimalVars& vars,
                           const Vector& x_init) {
  if (vars.y.size() != split.N + 1 || vars.z.size() != split.N)
    throw DimensionMismatch("primal variable counts");
  if (x_init.size() != split.n) throw DimensionMismatch("x_init size");
  Residuals r;
  for (std::size_t t = 0; t < split.N; ++t) {
    const Vector pred = numerics::matvec(split.stage_at(t).H2, vars.y[t]);
    const Vector next = numerics::matvec(split.stage_at(t + 1).H1, vars.y[t + 1]);
    r.consensus_res = std::max(r.consensus_res, numerics::norm_inf(numerics::sub(vars.z[t], pred)));
    r.consensus_res = std::max(r.consensus_res, numerics::norm_inf(numerics::sub(vars.z[t], next)));
  }
  Vector x0 = numerics::matvec(split.stage_at(0).H1, vars.y[0]);
  r.consensus_res = std::max(r.consensus_res, numerics::norm_inf(numerics::sub(x0, x_init)));
  for (std::size_t t = 0; t <= split.N; ++t) {
    const Vector gy = numerics::matvec(split.stage_at(t).G, vars.y[t]);
    for (std::size_t i = 0; i < split.p; ++i)
      r.ineq_violation = std::max(r.ineq_violation, gy[i] - split.d[i]);
  }
  r.ineq_violation = std::max(r.ineq_violation, 0.0);
  return r;
}

}  // namespace dualsplit::model
