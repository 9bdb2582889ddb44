#pragma once

#include <chrono>
#include <cmath>
#include <limits>
#include <vector>

#include "dualsplit/model/time_split.hpp"
#include "dualsplit/numerics/errors.hpp"
#include "dualsplit/sampling/distribution.hpp"
#include "dualsplit/sampling/rng.hpp"
#include "dualsplit/solvers/ama.hpp"
#include "dualsplit/solvers/config.hpp"
#include "dualsplit/solvers/detail/split_kernels.hpp"
#include "dualsplit/solvers/dual_vars.hpp"
#include "dualsplit/solvers/trace.hpp"

namespace dualsplit::solvers {

namespace detail {

inline void add_into(const DualVars& src, DualVars& dst) {
  for (std::size_t t = 0; t < src.w.size(); ++t) {
    numerics::axpy(1.0, src.w[t], dst.w[t]);
    numerics::axpy(1.0, src.v[t], dst.v[t]);
  }
  for (std::size_t t = 0; t < src.lambda.size(); ++t)
    numerics::axpy(1.0, src.lambda[t], dst.lambda[t]);
}

inline void add_into(const model::PrimalVars& src, model::PrimalVars& dst) {
  for (std::size_t t = 0; t < src.y.size(); ++t) numerics::axpy(1.0, src.y[t], dst.y[t]);
  for (std::size_t t = 0; t < src.z.size(); ++t) numerics::axpy(1.0, src.z[t], dst.z[t]);
  for (std::size_t t = 0; t < src.sigma.size(); ++t)
    numerics::axpy(1.0, src.sigma[t], dst.sigma[t]);
}

inline DualVars scale_duals(const DualVars& src, double a) {
  DualVars out = src;
  for (auto& b : out.w)
    for (double& x : b) x *= a;
  for (auto& b : out.v)
    for (double& x : b) x *= a;
  for (auto& b : out.lambda)
    for (double& x : b) x *= a;
  return out;
}

inline model::PrimalVars scale_primals(const model::PrimalVars& src, double a) {
  model::PrimalVars out = src;
  for (auto& b : out.y)
    for (double& x : b) x *= a;
  for (auto& b : out.z)
    for (double& x : b) x *= a;
  for (auto& b : out.sigma)
    for (double& x : b) x *= a;
  return out;
}

}  // namespace detail

/// Randomized time-split dual solver. Each outer stage takes a snapshot of
/// the averaged multipliers, solves every stage subproblem once to form the
/// snapshot gradient, and then runs T cheap inner iterations: one sampled
/// stage solve, a variance-reduced direction for the rows (w_i, v_i,
/// lambda_i), and a proximal dual step on exactly those rows.
///
/// Details that matter:
///  - Direction rows are assembled as (snapshot - reference/pi) + current/pi
///    so a point-mass distribution cancels the correction bit for bit.
///  - The consensus/orthant step is evaluated at the variance-reduced
///    direction, which makes the inner update the exact proximal step of the
///    dual iteration; it coincides with the plain stage formulas whenever the
///    correction vanishes, and keeps every iterate (hence every average)
///    inside the dual domain.
///  - The v_i row couples to the neighbor stage: its correction uses the most
///    recently stored value of y_{i-1} (or the snapshot value, per config).
///    A sampled update touches the rows (w_i, v_i, lambda_i), so exactly the
///    stage-i and stage-(i-1) minimizers change; both stored values are
///    refreshed right after the update. The stage solve is linear in the
///    multipliers, so the averaged primal then coincides with the stage
///    solves at the averaged multipliers, which is what the averaged-primal
///    error bound is stated for.
///  - The variance-reduction reference for stage t is the stage minimizer at
///    the snapshot duals; the averaged primal is the solver output and is
///    tracked separately.
///  - With the adaptive flag, every T inner iterations (one outer stage) the
///    per-stage squared change of lambda since the previous check rebalances
///    the sampling distribution.
///  - `accelerate` extrapolates the snapshot between outer stages with a
///    dual-value restart. Experimental; off by default.
inline SplitSolveResult svr_ama_split_solve(const model::SplitProblem& s,
                                            const SolverConfig& config) {
  if (!(config.tau > 0.0)) throw InvalidParameter("tau must be positive");
  if (config.T < 1 || config.s_bar < 1)
    throw InvalidParameter("T and s_bar must be at least 1");
  const double eig = config.step_constant == StepConstantVariant::eig_max ? s.eig_max_Hy
                                                                          : s.eig_min_Hy;
  const double l_star = eig / s.sigma_f;
  if (!config.allow_uncertified_step && !(config.tau < 1.0 / (4.0 * l_star)))
    throw StepTooLarge("svr_ama_split_solve requires tau < 1/(4 L*)");

  sampling::Distribution dist =
      sampling::make_distribution(config.distribution_kind, config.distribution_params, s.N);
  const bool adaptive =
      config.adaptive_enabled || config.distribution_kind == sampling::DistributionKind::adaptive;
  sampling::Rng rng(config.seed);

  const double tau = config.tau;
  const double inv_T = 1.0 / static_cast<double>(config.T);
  const std::size_t N = s.N;

  SplitSolveResult res;
  res.trace.sample_counts.assign(N + 1, 0);

  DualVars average = init_duals(s);   // mu_tilde^{s-1}
  DualVars prev_average = average;
  DualVars snapshot = average;        // reference point fed to the stage (extrapolated if accelerated)
  DualVars iterate = average;
  double theta = 1.0;
  double last_dual = -std::numeric_limits<double>::infinity();

  std::vector<numerics::Vector> y_ref(N + 1);
  std::vector<numerics::Vector> bw_ref(N + 1);
  std::vector<numerics::Vector> bv_ref(N + 1);
  std::vector<numerics::Vector> bl_ref(N + 1);
  model::PrimalVars vars = model::PrimalVars::zeros(s);

  std::vector<numerics::Vector> lambda_mark = iterate.lambda;

  const auto t0 = std::chrono::steady_clock::now();
  int pending_record = -1;

  for (int stage = 1; stage <= config.s_bar; ++stage) {
    for (std::size_t t = 0; t <= N; ++t) y_ref[t] = solve_stage(s, snapshot, t);
    for (std::size_t t = 1; t <= N; ++t) {
      bw_ref[t] = detail::w_row(s, y_ref[t]);
      bv_ref[t] = detail::v_row(s, t - 1, y_ref[t - 1]);
    }
    for (std::size_t t = 0; t <= N; ++t) bl_ref[t] = detail::lambda_row(s, t, y_ref[t]);
    if (!config.accelerate && config.record_dual_value && pending_record >= 0) {
      // the snapshot equals the previous average here, so these solves also
      // price the previous record
      const DualValue dv = dual_surrogate(s, snapshot, y_ref, config.domain_tol);
      res.trace.stages[pending_record].dual_value = dv.value;
      res.trace.stages[pending_record].dual_in_domain = dv.in_domain;
    }

    iterate = snapshot;
    vars.y = y_ref;
    for (std::size_t t = 1; t <= N; ++t) {
      numerics::Vector z(s.n);
      for (std::size_t i = 0; i < s.n; ++i)
        z[i] = 0.5 * (-bw_ref[t][i] - bv_ref[t][i] +
                      (iterate.w[t - 1][i] + iterate.v[t - 1][i]) / tau);
      vars.z[t - 1] = std::move(z);
    }
    for (std::size_t t = 0; t <= N; ++t) {
      numerics::Vector sg(s.p);
      for (std::size_t i = 0; i < s.p; ++i) {
        const double su = s.d[i] - bl_ref[t][i] + iterate.lambda[t][i] / tau;
        sg[i] = su > 0.0 ? su : 0.0;
      }
      vars.sigma[t] = std::move(sg);
    }

    DualVars dual_sum = DualVars::zeros(s);
    model::PrimalVars primal_sum = model::PrimalVars::zeros(s);
    std::vector<std::uint64_t> stage_counts;
    std::vector<std::size_t> picks;
    if (config.record_vectors) stage_counts.assign(N + 1, 0);

    for (int k = 1; k <= config.T; ++k) {
      const std::size_t i = sampling::sample(dist, rng);
      ++res.trace.sample_counts[i];
      if (config.record_vectors) {
        ++stage_counts[i];
        picks.push_back(i);
      }
      const double inv_pi = 1.0 / dist.probs[i];

      // stored primals are kept consistent with the current multipliers, so
      // the stage-i minimizer is already at hand
      const numerics::Vector y_i = vars.y[i];

      numerics::Vector blam = bl_ref[i];
      {
        const numerics::Vector cur = detail::lambda_row(s, i, y_i);
        numerics::axpy(-inv_pi, bl_ref[i], blam);
        numerics::axpy(inv_pi, cur, blam);
      }
      if (i >= 1) {
        numerics::Vector bw = bw_ref[i];
        {
          const numerics::Vector cur = detail::w_row(s, y_i);
          numerics::axpy(-inv_pi, bw_ref[i], bw);
          numerics::axpy(inv_pi, cur, bw);
        }
        numerics::Vector bv = bv_ref[i];
        {
          const numerics::Vector& neighbor = config.stale_neighbor == StaleNeighborMode::latest
                                                 ? vars.y[i - 1]
                                                 : y_ref[i - 1];
          const numerics::Vector cur = detail::v_row(s, i - 1, neighbor);
          numerics::axpy(-inv_pi, bv_ref[i], bv);
          numerics::axpy(inv_pi, cur, bv);
        }
        detail::PairUpdate pu = detail::prox_pair(iterate.w[i - 1], iterate.v[i - 1], bw, bv, tau);
        iterate.w[i - 1] = std::move(pu.w);
        iterate.v[i - 1] = std::move(pu.v);
        vars.z[i - 1] = std::move(pu.z);
      }
      detail::LambdaUpdate lu = detail::prox_lambda(iterate.lambda[i], blam, s.d, tau);
      iterate.lambda[i] = std::move(lu.lambda);
      vars.sigma[i] = std::move(lu.sigma);
      // the update moved (w_i, v_i, lambda_i): re-solve the two stages whose
      // minimizers read those rows
      vars.y[i] = solve_stage(s, iterate, i);
      if (i >= 1) vars.y[i - 1] = solve_stage(s, iterate, i - 1);

      detail::add_into(iterate, dual_sum);
      detail::add_into(vars, primal_sum);
    }

    prev_average = average;
    average = detail::scale_duals(dual_sum, inv_T);
    const model::PrimalVars primal_avg = detail::scale_primals(primal_sum, inv_T);
    if (!detail::duals_finite(average)) throw NonFiniteIterate("svr_ama_split_solve average");

    StageRecord rec = detail::scalar_record(s, stage, primal_avg, config.primal_reference);
    res.trace.stages.push_back(rec);
    pending_record = static_cast<int>(res.trace.stages.size()) - 1;
    res.trace.wall_seconds.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    if (config.record_vectors) {
      res.trace.dual_averages.push_back(average.stacked(s));
      res.trace.primal_averages.push_back(primal_avg);
      res.trace.stage_sample_counts.push_back(std::move(stage_counts));
      res.trace.sampled_indices.push_back(std::move(picks));
    }
    if (stage == config.s_bar) {
      res.primal = primal_avg;
      res.last_iterate = vars;
      res.duals = average;
    }

    if (adaptive) {
      std::vector<double> change(N + 1, 0.0);
      for (std::size_t t = 0; t <= N; ++t) {
        const numerics::Vector diff = numerics::sub(iterate.lambda[t], lambda_mark[t]);
        change[t] = numerics::dot(diff, diff);
      }
      const sampling::Distribution updated =
          sampling::adapt(dist, change, config.adaptive_threshold);
      if (updated.probs != dist.probs) {
        AdaptationEvent ev;
        ev.stage = stage;
        ev.lambda_change_sq = std::move(change);
        ev.probs_after = updated.probs;
        res.trace.adaptations.push_back(std::move(ev));
      }
      dist = updated;
      lambda_mark = iterate.lambda;
    }

    if (config.accelerate) {
      const DualValue dv = dual_surrogate(s, average, config.domain_tol);
      if (config.record_dual_value && pending_record >= 0) {
        res.trace.stages[pending_record].dual_value = dv.value;
        res.trace.stages[pending_record].dual_in_domain = dv.in_domain;
        pending_record = -1;
      }
      if (!dv.in_domain || dv.value < last_dual) {
        theta = 1.0;
        snapshot = average;
      } else {
        const double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
        const double gamma = (theta - 1.0) / theta_next;
        theta = theta_next;
        snapshot = average;
        for (std::size_t t = 0; t < N; ++t) {
          numerics::axpy(gamma, numerics::sub(average.w[t], prev_average.w[t]), snapshot.w[t]);
          numerics::axpy(gamma, numerics::sub(average.v[t], prev_average.v[t]), snapshot.v[t]);
        }
        for (std::size_t t = 0; t <= N; ++t)
          numerics::axpy(gamma, numerics::sub(average.lambda[t], prev_average.lambda[t]),
                         snapshot.lambda[t]);
        // the extrapolated lambda can poke outside the orthant; clamp so the
        // stage solves stay in the dual domain
        for (std::size_t t = 0; t <= N; ++t)
          for (double& x : snapshot.lambda[t])
            if (x > 0.0) x = 0.0;
      }
      if (dv.in_domain) last_dual = dv.value;
    } else {
      snapshot = average;
    }
  }

  if (config.record_dual_value && pending_record >= 0) {
    const DualValue dv = dual_surrogate(s, average, config.domain_tol);
    res.trace.stages[pending_record].dual_value = dv.value;
    res.trace.stages[pending_record].dual_in_domain = dv.in_domain;
  }
  res.trace.final_probs = dist.probs;
  return res;
}

}  // namespace dualsplit::solvers
