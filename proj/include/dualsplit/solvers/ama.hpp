#pragma once

#include <chrono>
#include <cmath>
#include <limits>
#include <vector>

#include "dualsplit/model/time_split.hpp"
#include "dualsplit/numerics/errors.hpp"
#include "dualsplit/solvers/config.hpp"
#include "dualsplit/solvers/detail/split_kernels.hpp"
#include "dualsplit/solvers/dual_vars.hpp"
#include "dualsplit/solvers/trace.hpp"

namespace dualsplit::solvers {

struct SplitSolveResult {
  model::PrimalVars primal;        // averaged output (last iterate for the synchronous loop)
  model::PrimalVars last_iterate;  // working primal point at termination
  DualVars duals;
  SolverTrace trace;
};

namespace detail {

inline void apply_exact_update(const model::SplitProblem& s, DualVars& duals,
                               model::PrimalVars& vars,
                               const std::vector<numerics::Vector>& ys, double tau) {
  for (std::size_t t = 1; t <= s.N; ++t) {
    const numerics::Vector bw = w_row(s, ys[t]);
    const numerics::Vector bv = v_row(s, t - 1, ys[t - 1]);
    PairUpdate pu = prox_pair(duals.w[t - 1], duals.v[t - 1], bw, bv, tau);
    duals.w[t - 1] = std::move(pu.w);
    duals.v[t - 1] = std::move(pu.v);
    vars.z[t - 1] = std::move(pu.z);
  }
  for (std::size_t t = 0; t <= s.N; ++t) {
    const numerics::Vector bl = lambda_row(s, t, ys[t]);
    LambdaUpdate lu = prox_lambda(duals.lambda[t], bl, s.d, tau);
    duals.lambda[t] = std::move(lu.lambda);
    vars.sigma[t] = std::move(lu.sigma);
  }
  vars.y = ys;
}

inline StageRecord scalar_record(const model::SplitProblem& s, int stage,
                                 const model::PrimalVars& vars,
                                 const std::vector<numerics::Vector>* reference = nullptr) {
  StageRecord rec;
  rec.stage = stage;
  rec.primal_objective = model::primal_objective(s, vars);
  const model::Residuals rr = model::residuals(s, vars, s.x_init);
  rec.consensus_res = rr.consensus_res;
  rec.ineq_violation = rr.ineq_violation;
  if (reference && reference->size() == vars.y.size()) {
    double dist = 0.0;
    for (std::size_t t = 0; t < vars.y.size(); ++t) {
      const numerics::Vector diff = numerics::sub(vars.y[t], (*reference)[t]);
      dist += numerics::dot(diff, diff);
    }
    rec.primal_dist = dist;
  }
  return rec;
}

}  // namespace detail

/// Synchronous dual solver: every iteration solves all stage subproblems in
/// closed form, recomputes the consensus states and slacks, and takes one
/// dual step. This is exactly a proximal gradient iteration on the dual, so
/// the classical step bound tau < sigma_f / eig_max(Hy'Hy) applies (bypass
/// with allow_uncertified_step).
///
/// With `accelerate` set, Nesterov momentum is applied to the duals between
/// iterations and reset whenever the dual objective fails to increase. The
/// momentum variant is experimental; it carries no contraction certificate.
///
/// config.s_bar counts iterations (T plays no role in the synchronous loop).
/// Trace: one record per iteration; record k holds the dual value of the
/// iterate it describes (filled from the following iteration's stage solves,
/// plus one extra sweep at the end).
inline SplitSolveResult ama_solve(const model::SplitProblem& s, const SolverConfig& config) {
  const double step_bound = s.sigma_f / s.eig_max_Hy;
  if (!(config.tau > 0.0)) throw InvalidParameter("tau must be positive");
  if (!config.allow_uncertified_step && !(config.tau < step_bound))
    throw StepTooLarge("ama_solve requires tau < sigma_f / eig_max(Hy)");

  SplitSolveResult res;
  res.primal = model::PrimalVars::zeros(s);
  res.trace.sample_counts.assign(s.N + 1, 0);

  DualVars iterate = init_duals(s);
  DualVars momentum_point = iterate;
  double theta = 1.0;
  double last_dual = -std::numeric_limits<double>::infinity();
  std::vector<numerics::Vector> ys(s.N + 1);

  const auto t0 = std::chrono::steady_clock::now();
  for (int k = 1; k <= config.s_bar; ++k) {
    if (config.accelerate) {
      const DualVars prev = iterate;
      for (std::size_t t = 0; t <= s.N; ++t) ys[t] = solve_stage(s, momentum_point, t);
      detail::apply_exact_update(s, momentum_point, res.primal, ys, config.tau);
      iterate = momentum_point;
      const DualValue dv = dual_surrogate(s, iterate, config.domain_tol);
      if (!dv.in_domain || dv.value < last_dual) {
        theta = 1.0;  // restart: drop the momentum
        momentum_point = iterate;
      } else {
        const double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
        const double gamma = (theta - 1.0) / theta_next;
        theta = theta_next;
        momentum_point = iterate;
        for (std::size_t t = 0; t < s.N; ++t) {
          numerics::axpy(gamma, numerics::sub(iterate.w[t], prev.w[t]), momentum_point.w[t]);
          numerics::axpy(gamma, numerics::sub(iterate.v[t], prev.v[t]), momentum_point.v[t]);
        }
        for (std::size_t t = 0; t <= s.N; ++t)
          numerics::axpy(gamma, numerics::sub(iterate.lambda[t], prev.lambda[t]),
                         momentum_point.lambda[t]);
      }
      if (dv.in_domain) last_dual = dv.value;
      StageRecord rec = detail::scalar_record(s, k, res.primal, config.primal_reference);
      rec.dual_value = dv.value;
      rec.dual_in_domain = dv.in_domain;
      res.trace.stages.push_back(rec);
    } else {
      for (std::size_t t = 0; t <= s.N; ++t) ys[t] = solve_stage(s, iterate, t);
      if (config.record_dual_value && k >= 2) {
        const DualValue dv = dual_surrogate(s, iterate, ys, config.domain_tol);
        res.trace.stages[k - 2].dual_value = dv.value;
        res.trace.stages[k - 2].dual_in_domain = dv.in_domain;
      }
      detail::apply_exact_update(s, iterate, res.primal, ys, config.tau);
      res.trace.stages.push_back(detail::scalar_record(s, k, res.primal, config.primal_reference));
    }
    if (!detail::duals_finite(iterate)) throw NonFiniteIterate("ama_solve iterate");
    res.trace.wall_seconds.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    if (config.record_vectors) {
      res.trace.dual_averages.push_back(iterate.stacked(s));
      res.trace.primal_averages.push_back(res.primal);
    }
  }
  if (!config.accelerate && config.record_dual_value && !res.trace.stages.empty()) {
    const DualValue dv = dual_surrogate(s, iterate, config.domain_tol);
    res.trace.stages.back().dual_value = dv.value;
    res.trace.stages.back().dual_in_domain = dv.in_domain;
  }
  res.duals = iterate;
  res.last_iterate = res.primal;
  return res;
}

}  // namespace dualsplit::solvers
