#pragma once

#include <cstddef>
#include <vector>

#include "dualsplit/model/time_split.hpp"
#include "dualsplit/numerics/dense.hpp"
#include "dualsplit/solvers/dual_vars.hpp"

namespace dualsplit::solvers::detail {

using model::SplitProblem;
using numerics::Vector;

// Direction rows associated with the stage blocks, in the convention of the
// dual gradient: exact rows are
//   w_t row:      -H1 y_t
//   v_t row:      -H2 y_{t-1}
//   lambda_t row: +G y_t
inline Vector w_row(const SplitProblem& s, const Vector& y_t) {
  Vector r(s.n);
  for (std::size_t i = 0; i < s.n; ++i) r[i] = -y_t[i];  // H1 = [I 0]
  return r;
}

inline Vector v_row(const SplitProblem& s, std::size_t t_minus_1, const Vector& y_prev) {
  Vector r = numerics::matvec(s.stage_at(t_minus_1).H2, y_prev);
  for (double& x : r) x = -x;
  return r;
}

inline Vector lambda_row(const SplitProblem& s, std::size_t t, const Vector& y_t) {
  return numerics::matvec(s.stage_at(t).G, y_t);
}

// Proximal update of one consensus pair (w_t, v_t) given direction rows bw,
// bv: project (w - tau bw, v - tau bv) onto the subspace w + v = 0. Also
// yields the consensus state z_t = 1/2 [-bw - bv + (w + v)/tau], which equals
// the averaging step of the synchronous sweep when the rows are exact.
struct PairUpdate {
  Vector w, v, z;
};

inline PairUpdate prox_pair(const Vector& w, const Vector& v, const Vector& bw, const Vector& bv,
                            double tau) {
  PairUpdate out;
  const std::size_t n = w.size();
  out.w.resize(n);
  out.v.resize(n);
  out.z.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double mw = w[i] - tau * bw[i];
    const double mv = v[i] - tau * bv[i];
    const double half = 0.5 * (mw - mv);
    out.w[i] = half;
    out.v[i] = -half;
    out.z[i] = 0.5 * (-bw[i] - bv[i] + (w[i] + v[i]) / tau);
  }
  return out;
}

// Proximal update of one multiplier block lambda_t given its direction row
// blam: lambda' = min(lambda - tau blam + tau d, 0). The slack
// sigma = max(d - blam + lambda/tau, 0) is the projected stage slack; it is
// nonnegative by construction after every update.
struct LambdaUpdate {
  Vector lambda, sigma;
};

inline LambdaUpdate prox_lambda(const Vector& lambda, const Vector& blam, const Vector& d,
                                double tau) {
  LambdaUpdate out;
  const std::size_t p = lambda.size();
  out.lambda.resize(p);
  out.sigma.resize(p);
  for (std::size_t i = 0; i < p; ++i) {
    const double unc = lambda[i] - tau * blam[i] + tau * d[i];
    out.lambda[i] = unc < 0.0 ? unc : 0.0;
    const double su = d[i] - blam[i] + lambda[i] / tau;
    out.sigma[i] = su > 0.0 ? su : 0.0;
  }
  return out;
}

// One synchronous sweep: all stage solves, then every block updated with its
// exact direction rows. Writes the new primal point into `vars`.
inline void ama_sweep(const SplitProblem& s, DualVars& duals, model::PrimalVars& vars,
                      double tau, std::vector<Vector>& stage_solutions) {
  stage_solutions.resize(s.N + 1);
  for (std::size_t t = 0; t <= s.N; ++t) stage_solutions[t] = solve_stage(s, duals, t);
  for (std::size_t t = 1; t <= s.N; ++t) {
    const Vector bw = w_row(s, stage_solutions[t]);
    const Vector bv = v_row(s, t - 1, stage_solutions[t - 1]);
    PairUpdate pu = prox_pair(duals.w[t - 1], duals.v[t - 1], bw, bv, tau);
    duals.w[t - 1] = std::move(pu.w);
    duals.v[t - 1] = std::move(pu.v);
    vars.z[t - 1] = std::move(pu.z);
  }
  for (std::size_t t = 0; t <= s.N; ++t) {
    const Vector bl = lambda_row(s, t, stage_solutions[t]);
    LambdaUpdate lu = prox_lambda(duals.lambda[t], bl, s.d, tau);
    duals.lambda[t] = std::move(lu.lambda);
    vars.sigma[t] = std::move(lu.sigma);
  }
  vars.y = stage_solutions;
}

inline bool duals_finite(const DualVars& d) {
  for (const auto& b : d.w)
    if (!numerics::all_finite(b)) return false;
  for (const auto& b : d.v)
    if (!numerics::all_finite(b)) return false;
  for (const auto& b : d.lambda)
    if (!numerics::all_finite(b)) return false;
  return true;
}

}  // namespace dualsplit::solvers::detail
