#pragma once

#include <algorithm>
#include <chrono>
#include <functional>
#include <limits>
#include <vector>

#include "dualsplit/numerics/dense.hpp"
#include "dualsplit/numerics/errors.hpp"
#include "dualsplit/sampling/distribution.hpp"
#include "dualsplit/sampling/rng.hpp"
#include "dualsplit/solvers/config.hpp"
#include "dualsplit/solvers/trace.hpp"

namespace dualsplit::solvers {

using numerics::Vector;

/// Composite objective P(y) = F(y) + G(y) with F = sum_t F_t smooth and
/// strongly convex, G convex with a cheap proximal operator.
struct CompositeProblem {
  std::size_t dim = 0;
  std::size_t num_components = 0;
  std::function<Vector(std::size_t, const Vector&)> grad_component;  // grad F_i
  std::function<Vector(const Vector&)> grad_full;                    // grad F
  std::function<Vector(const Vector&, double)> prox;                 // prox_{tau G}
  std::function<double(const Vector&)> smooth_value;     // optional, for trace records
  std::function<double(const Vector&)> nonsmooth_value;  // optional
  double sigma_F = 0.0;
  std::vector<double> lipschitz;  // component constants L_t
};

struct CompositeSolveResult {
  Vector solution;  // averaged iterate of the final outer stage
  SolverTrace trace;
};

/// Multistage proximal stochastic gradient with variance reduction. Each
/// outer stage refreshes the full gradient at the averaged iterate of the
/// previous stage and then runs T inner iterations with the corrected
/// direction
///     beta = (beta_tilde - grad F_i(y_tilde)/pi_i) + grad F_i(y^{k-1})/pi_i,
/// assembled in exactly that order so that a point-mass distribution cancels
/// the snapshot terms bit for bit and the loop degenerates to deterministic
/// proximal gradient.
///
/// Requires tau < 1/(4 max_t L_t/pi_t) unless allow_uncertified_step is set.
inline CompositeSolveResult prox_svrg_solve(const CompositeProblem& prob,
                                            const SolverConfig& config,
                                            const Vector* initial = nullptr) {
  if (prob.dim == 0 || prob.num_components == 0)
    throw InvalidParameter("composite problem is empty");
  if (prob.lipschitz.size() != prob.num_components)
    throw DimensionMismatch("one Lipschitz constant per component");
  if (config.T < 1 || config.s_bar < 1)
    throw InvalidParameter("T and s_bar must be at least 1");

  sampling::Distribution dist = sampling::make_distribution(
      config.distribution_kind, config.distribution_params, prob.num_components - 1);

  double l_pi = 0.0;
  for (std::size_t t = 0; t < prob.num_components; ++t) {
    if (dist.probs[t] > 0.0)
      l_pi = std::max(l_pi, prob.lipschitz[t] / dist.probs[t]);
    else if (prob.lipschitz[t] > 0.0)
      l_pi = std::numeric_limits<double>::infinity();
  }
  if (!config.allow_uncertified_step && !(config.tau < 1.0 / (4.0 * l_pi)))
    throw StepTooLarge("prox_svrg_solve requires tau < 1/(4 L_Pi)");

  sampling::Rng rng(config.seed);
  const double inv_T = 1.0 / static_cast<double>(config.T);

  Vector y_avg = initial ? *initial : Vector(prob.dim, 0.0);  // y_tilde^{s-1}
  if (y_avg.size() != prob.dim) throw DimensionMismatch("initial point size");
  CompositeSolveResult res;
  res.trace.sample_counts.assign(prob.num_components, 0);

  const auto t0 = std::chrono::steady_clock::now();
  for (int stage = 1; stage <= config.s_bar; ++stage) {
    const Vector y_tilde = y_avg;
    const Vector beta_tilde = prob.grad_full(y_tilde);
    Vector y = y_tilde;
    Vector sum(prob.dim, 0.0);
    std::vector<std::size_t> picks;
    for (int k = 1; k <= config.T; ++k) {
      const std::size_t i = sampling::sample(dist, rng);
      ++res.trace.sample_counts[i];
      if (config.record_vectors) picks.push_back(i);
      const double inv_pi = 1.0 / dist.probs[i];
      const Vector g_snap = prob.grad_component(i, y_tilde);
      const Vector g_cur = prob.grad_component(i, y);
      Vector beta = beta_tilde;
      numerics::axpy(-inv_pi, g_snap, beta);
      numerics::axpy(inv_pi, g_cur, beta);
      Vector step = y;
      numerics::axpy(-config.tau, beta, step);
      y = prob.prox(step, config.tau);
      if (!numerics::all_finite(y)) throw NonFiniteIterate("prox_svrg_solve iterate");
      numerics::axpy(1.0, y, sum);
    }
    y_avg = numerics::scaled(sum, inv_T);

    StageRecord rec;
    rec.stage = stage;
    if (prob.smooth_value && prob.nonsmooth_value)
      rec.primal_objective = prob.smooth_value(y_avg) + prob.nonsmooth_value(y_avg);
    res.trace.stages.push_back(rec);
    res.trace.wall_seconds.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    if (config.record_vectors) {
      res.trace.dual_averages.push_back(y_avg);
      res.trace.sampled_indices.push_back(std::move(picks));
    }
  }
  res.solution = y_avg;
  return res;
}

}  // namespace dualsplit::solvers
