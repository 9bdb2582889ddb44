#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "dualsplit/model/mpc_problem.hpp"
#include "dualsplit/model/time_split.hpp"
#include "dualsplit/numerics/cholesky.hpp"
#include "dualsplit/numerics/dense.hpp"
#include "dualsplit/solvers/dual_vars.hpp"

namespace dualsplit::oracle {

using model::MpcProblem;
using numerics::DenseMatrix;
using numerics::Vector;

/// High-accuracy reference solution of the horizon problem. Solved on the
/// condensed form (states eliminated through the dynamics) by a Mehrotra
/// predictor-corrector interior-point method, deliberately sharing nothing
/// with the first-order dual iterations it is used to judge.
struct OracleSolution {
  std::vector<Vector> y_star;  // stage vectors [x_t; u_t], t = 0..N
  std::vector<Vector> eta;     // inequality multipliers per stage, eta_t >= 0
  std::vector<Vector> p_dyn;   // dynamics multipliers p_t, t = 1..N
  double objective = 0.0;
  double kkt_residual = 0.0;
  int iterations = 0;

  Vector stacked_y() const {
    Vector out;
    for (const Vector& y : y_star) out.insert(out.end(), y.begin(), y.end());
    return out;
  }
};

namespace detail {

struct CondensedQp {
  DenseMatrix P;  // nu x nu, positive definite
  Vector q;       // nu
  double c0 = 0.0;
  DenseMatrix M;  // nc x nu
  Vector b;       // nc
  std::size_t nu = 0, nc = 0;
};

inline CondensedQp condense(const MpcProblem& prob) {
  const std::size_t n = prob.n(), m = prob.m(), p = prob.p(), N = prob.N;
  const std::size_t nu = (N + 1) * m;
  const std::size_t nc = (N + 1) * p;

  // x_t = At[t] x0 + sum_{j<t} AB[t-1-j] u_j, with At[t] = A^t, AB[k] = A^k B
  std::vector<DenseMatrix> At(N + 1);
  std::vector<DenseMatrix> AB(N + 1);
  At[0] = DenseMatrix::identity(n);
  AB[0] = prob.B;
  for (std::size_t t = 1; t <= N; ++t) {
    At[t] = numerics::matmul(prob.A, At[t - 1]);
    AB[t] = numerics::matmul(prob.A, AB[t - 1]);
  }

  std::vector<Vector> xfree(N + 1);  // A^t x0
  for (std::size_t t = 0; t <= N; ++t) xfree[t] = numerics::matvec(At[t], prob.x_init);

  // Su block (t, j) = A^{t-1-j} B for j < t
  DenseMatrix Su((N + 1) * n, nu);
  for (std::size_t t = 1; t <= N; ++t)
    for (std::size_t j = 0; j < t; ++j) {
      const DenseMatrix& blk = AB[t - 1 - j];
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < m; ++k) Su(t * n + i, j * m + k) = blk(i, k);
    }

  DenseMatrix Qbar((N + 1) * n, (N + 1) * n);
  for (std::size_t t = 0; t <= N; ++t) {
    const DenseMatrix& Qw = (prob.terminal_weight && t == N) ? *prob.terminal_weight : prob.Q;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) Qbar(t * n + i, t * n + j) = Qw(i, j);
  }

  CondensedQp qp;
  qp.nu = nu;
  qp.nc = nc;
  const DenseMatrix QSu = numerics::matmul(Qbar, Su);
  qp.P = numerics::matmul(Su.transposed(), QSu);
  for (std::size_t t = 0; t <= N; ++t)
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) qp.P(t * m + i, t * m + j) += prob.R(i, j);

  Vector xf_stack((N + 1) * n);
  for (std::size_t t = 0; t <= N; ++t)
    for (std::size_t i = 0; i < n; ++i) xf_stack[t * n + i] = xfree[t][i];
  qp.q = numerics::matvec_transposed(QSu, xf_stack);
  qp.c0 = 0.5 * numerics::dot(xf_stack, numerics::matvec(Qbar, xf_stack));

  qp.M = DenseMatrix(nc, nu);
  qp.b = Vector(nc);
  for (std::size_t t = 0; t <= N; ++t) {
    // C x_t + D u_t <= d  ->  C (Su row block t) u + D E_t u <= d - C A^t x0
    for (std::size_t r = 0; r < p; ++r) {
      for (std::size_t j = 0; j < t; ++j) {
        const DenseMatrix& blk = AB[t - 1 - j];
        for (std::size_t k = 0; k < m; ++k) {
          double acc = 0.0;
          for (std::size_t i = 0; i < n; ++i) acc += prob.C(r, i) * blk(i, k);
          qp.M(t * p + r, j * m + k) += acc;
        }
      }
      for (std::size_t k = 0; k < m; ++k) qp.M(t * p + r, t * m + k) += prob.D(r, k);
      double rhs = prob.d[r];
      for (std::size_t i = 0; i < n; ++i) rhs -= prob.C(r, i) * xfree[t][i];
      qp.b[t * p + r] = rhs;
    }
  }
  return qp;
}

struct IpResult {
  Vector u;
  Vector eta;
  int iterations = 0;
};

/// Mehrotra predictor-corrector on  min 1/2 u'Pu + q'u  s.t.  Mu + s = b,
/// s >= 0, with multipliers eta >= 0. Infeasible start; the reduced system
/// P + M' diag(eta/s) M is factored once per iteration.
inline IpResult solve_qp_interior_point(const CondensedQp& qp, double tol, int max_iter = 120) {
  const std::size_t nu = qp.nu, nc = qp.nc;
  IpResult out;
  out.u.assign(nu, 0.0);
  if (nc == 0) {
    Vector rhs = qp.q;
    for (double& x : rhs) x = -x;
    out.u = numerics::cholesky(qp.P).solve(rhs);
    return out;
  }
  Vector s(nc), eta(nc, 1.0);
  for (std::size_t i = 0; i < nc; ++i) s[i] = std::max(1.0, qp.b[i]);

  const double qscale = 1.0 + numerics::norm_inf(qp.q);
  const double bscale = 1.0 + numerics::norm_inf(qp.b);

  for (int it = 1; it <= max_iter; ++it) {
    Vector pu = numerics::matvec(qp.P, out.u);
    Vector mteta = numerics::matvec_transposed(qp.M, eta);
    Vector r_d(nu);
    for (std::size_t i = 0; i < nu; ++i) r_d[i] = pu[i] + qp.q[i] + mteta[i];
    Vector mu_vec = numerics::matvec(qp.M, out.u);
    Vector r_p(nc);
    for (std::size_t i = 0; i < nc; ++i) r_p[i] = mu_vec[i] + s[i] - qp.b[i];
    double gap = 0.0;
    double gap_max = 0.0;
    for (std::size_t i = 0; i < nc; ++i) {
      gap += s[i] * eta[i];
      gap_max = std::max(gap_max, s[i] * eta[i]);
    }
    gap /= static_cast<double>(nc);

    if (numerics::norm_inf(r_d) <= tol * qscale && numerics::norm_inf(r_p) <= tol * bscale &&
        gap_max <= tol * bscale) {
      out.eta = eta;
      out.iterations = it - 1;
      return out;
    }
    if (numerics::norm_inf(eta) > 1e10 && numerics::norm_inf(r_p) > 1e-6 * bscale)
      throw Infeasible("dual iterates diverge while primal residual stalls");

    DenseMatrix K = qp.P;
    for (std::size_t r = 0; r < nc; ++r) {
      const double wgt = eta[r] / s[r];
      for (std::size_t i = 0; i < nu; ++i) {
        const double mri = qp.M(r, i);
        if (mri == 0.0) continue;
        const double scaled = wgt * mri;
        for (std::size_t j = 0; j < nu; ++j) K(i, j) += scaled * qp.M(r, j);
      }
    }
    // the reduced matrix grows hugely ill conditioned near convergence; keep
    // factoring with an escalating diagonal shift until the pivots survive
    numerics::NumericsOptions relaxed;
    relaxed.symmetry_tol = 1e-6;
    relaxed.pivot_rel_tol = 1e-60;
    numerics::CholeskyFactor kf;
    {
      double kdiag = 0.0;
      for (std::size_t i = 0; i < nu; ++i) kdiag = std::max(kdiag, K(i, i));
      double shift = 0.0;
      for (int attempt = 0;; ++attempt) {
        try {
          kf = numerics::cholesky(K, relaxed);
          break;
        } catch (const NotPositiveDefinite&) {
          if (attempt >= 6) throw;
          shift = shift == 0.0 ? 1e-14 * kdiag : 100.0 * shift;
          for (std::size_t i = 0; i < nu; ++i) K(i, i) += shift;
        }
      }
    }

    auto solve_direction = [&](const Vector& r_c, Vector& du, Vector& ds, Vector& deta) {
      Vector rhs(nu);
      Vector tmp(nc);
      for (std::size_t i = 0; i < nc; ++i) tmp[i] = (eta[i] * r_p[i] - r_c[i]) / s[i];
      const Vector mt = numerics::matvec_transposed(qp.M, tmp);
      for (std::size_t i = 0; i < nu; ++i) rhs[i] = -r_d[i] - mt[i];
      du = kf.solve(rhs);
      const Vector mdu = numerics::matvec(qp.M, du);
      deta.assign(nc, 0.0);
      ds.assign(nc, 0.0);
      for (std::size_t i = 0; i < nc; ++i) {
        deta[i] = (eta[i] * (r_p[i] + mdu[i]) - r_c[i]) / s[i];
        ds[i] = (-r_c[i] - s[i] * deta[i]) / eta[i];
      }
    };

    auto max_step = [&](const Vector& x, const Vector& dx) {
      double a = 1.0;
      for (std::size_t i = 0; i < x.size(); ++i)
        if (dx[i] < 0.0) a = std::min(a, -x[i] / dx[i]);
      return a;
    };

    Vector r_c(nc);
    for (std::size_t i = 0; i < nc; ++i) r_c[i] = s[i] * eta[i];
    Vector du_aff, ds_aff, deta_aff;
    solve_direction(r_c, du_aff, ds_aff, deta_aff);
    const double ap_aff = max_step(s, ds_aff);
    const double ad_aff = max_step(eta, deta_aff);
    double gap_aff = 0.0;
    for (std::size_t i = 0; i < nc; ++i)
      gap_aff += (s[i] + ap_aff * ds_aff[i]) * (eta[i] + ad_aff * deta_aff[i]);
    gap_aff /= static_cast<double>(nc);
    const double sigma = std::pow(gap_aff / gap, 3.0);

    for (std::size_t i = 0; i < nc; ++i)
      r_c[i] = s[i] * eta[i] + ds_aff[i] * deta_aff[i] - sigma * gap;
    Vector du, ds, deta;
    solve_direction(r_c, du, ds, deta);
    const double ap = std::min(1.0, 0.995 * max_step(s, ds));
    const double ad = std::min(1.0, 0.995 * max_step(eta, deta));
    numerics::axpy(ap, du, out.u);
    numerics::axpy(ap, ds, s);
    numerics::axpy(ad, deta, eta);
  }
  throw MaxIterations("interior point did not reach tolerance");
}

}  // namespace detail

/// Solves the horizon problem to kkt_tol and re-verifies all four KKT blocks
/// independently of the iteration.
inline OracleSolution solve_reference(const MpcProblem& prob, double kkt_tol = 1e-8) {
  const std::size_t n = prob.n(), m = prob.m(), p = prob.p(), N = prob.N;
  const detail::CondensedQp qp = detail::condense(prob);
  const detail::IpResult ip = detail::solve_qp_interior_point(qp, kkt_tol * 1e-1);

  OracleSolution sol;
  sol.iterations = ip.iterations;
  sol.y_star.resize(N + 1);
  sol.eta.resize(N + 1);
  sol.p_dyn.resize(N);

  // roll the states out through the dynamics
  Vector x = prob.x_init;
  for (std::size_t t = 0; t <= N; ++t) {
    Vector u_t(ip.u.begin() + t * m, ip.u.begin() + (t + 1) * m);
    Vector y(n + m);
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i];
    for (std::size_t i = 0; i < m; ++i) y[n + i] = u_t[i];
    sol.y_star[t] = y;
    sol.eta[t] = p > 0 ? Vector(ip.eta.begin() + t * p, ip.eta.begin() + (t + 1) * p) : Vector{};
    if (t < N) {
      Vector xn = numerics::matvec(prob.A, x);
      numerics::axpy(1.0, numerics::matvec(prob.B, u_t), xn);
      x = xn;
    }
  }

  // adjoint recursion for the dynamics multipliers:
  //   p_N = Q_N x_N + C' eta_N,   p_t = Q x_t + C' eta_t + A' p_{t+1}
  {
    const DenseMatrix& QN = prob.terminal_weight ? *prob.terminal_weight : prob.Q;
    Vector xN(sol.y_star[N].begin(), sol.y_star[N].begin() + n);
    Vector pN = numerics::matvec(QN, xN);
    if (p > 0) numerics::axpy(1.0, numerics::matvec_transposed(prob.C, sol.eta[N]), pN);
    sol.p_dyn[N - 1] = pN;
    for (std::size_t t = N - 1; t >= 1; --t) {
      Vector xt(sol.y_star[t].begin(), sol.y_star[t].begin() + n);
      Vector pt = numerics::matvec(prob.Q, xt);
      if (p > 0) numerics::axpy(1.0, numerics::matvec_transposed(prob.C, sol.eta[t]), pt);
      numerics::axpy(1.0, numerics::matvec_transposed(prob.A, sol.p_dyn[t]), pt);
      sol.p_dyn[t - 1] = pt;
    }
  }

  // objective, straight from the stage costs
  {
    model::PrimalVars vars;
    vars.y = sol.y_star;
    sol.objective = model::primal_objective(prob, vars);
  }

  // independent KKT check on the condensed system
  {
    Vector stat = numerics::matvec(qp.P, ip.u);
    numerics::axpy(1.0, qp.q, stat);
    if (qp.nc > 0) numerics::axpy(1.0, numerics::matvec_transposed(qp.M, ip.eta), stat);
    double r = numerics::norm_inf(stat) / (1.0 + numerics::norm_inf(qp.q));
    if (qp.nc > 0) {
      const Vector mu_vec = numerics::matvec(qp.M, ip.u);
      const double bscale = 1.0 + numerics::norm_inf(qp.b);
      for (std::size_t i = 0; i < qp.nc; ++i) {
        r = std::max(r, (mu_vec[i] - qp.b[i]) / bscale);          // primal feasibility
        r = std::max(r, -ip.eta[i]);                               // dual feasibility
        r = std::max(r, std::abs(ip.eta[i] * (qp.b[i] - mu_vec[i])) / bscale);  // slackness
      }
    }
    sol.kkt_residual = r;
    if (!(r <= kkt_tol)) throw MaxIterations("reference solution misses the KKT tolerance");
  }
  return sol;
}

struct Suboptimality {
  double obj_gap = 0.0;
  double primal_dist = 0.0;  // squared distance of the stacked stage vectors
};

inline Suboptimality suboptimality(const OracleSolution& ref, const model::PrimalVars& vars,
                                   const MpcProblem& prob) {
  if (vars.y.size() != ref.y_star.size())
    throw DimensionMismatch("stage counts of reference and candidate");
  Suboptimality out;
  out.obj_gap = model::primal_objective(prob, vars) - ref.objective;
  for (std::size_t t = 0; t < vars.y.size(); ++t) {
    if (vars.y[t].size() != ref.y_star[t].size())
      throw DimensionMismatch("stage vector sizes");
    const Vector diff = numerics::sub(vars.y[t], ref.y_star[t]);
    out.primal_dist += numerics::dot(diff, diff);
  }
  return out;
}

/// Maps the reference multipliers into the split-problem convention:
/// w_t = -p_t, v_t = p_t, lambda_t = -eta_t.
inline solvers::DualVars split_duals(const model::SplitProblem& s, const OracleSolution& sol) {
  solvers::DualVars d = solvers::DualVars::zeros(s);
  for (std::size_t t = 1; t <= s.N; ++t) {
    for (std::size_t i = 0; i < s.n; ++i) {
      d.w[t - 1][i] = -sol.p_dyn[t - 1][i];
      d.v[t - 1][i] = sol.p_dyn[t - 1][i];
    }
  }
  for (std::size_t t = 0; t <= s.N; ++t)
    for (std::size_t i = 0; i < s.p; ++i) d.lambda[t][i] = -sol.eta[t][i];
  return d;
}

}  // namespace dualsplit::oracle
