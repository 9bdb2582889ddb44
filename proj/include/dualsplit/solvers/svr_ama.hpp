#pragma once

#include <functional>
#include <vector>

#include "dualsplit/numerics/dense.hpp"
#include "dualsplit/solvers/prox_svrg.hpp"

namespace dualsplit::solvers {

using numerics::DenseMatrix;

/// One block of the separable smooth objective f(y) = sum_i f_i(y_i) in
///   minimize f(y) + g(z)   s.t.   A_y y + A_z z = b.
/// `coupling` is the block column of A_y acting on y_i; `minimize` returns
/// argmin_y f_i(y) + lin' y, i.e. the conjugate-gradient map of f_i.
struct AmaComponent {
  std::size_t y_dim = 0;
  DenseMatrix coupling;  // mu_dim x y_dim
  std::function<Vector(const Vector&)> minimize;
};

/// Dual-space description of the coupled problem. The nonsmooth dual part
/// (conjugate of g plus the linear b term) enters through its proximal
/// operator; `dual_value` optionally evaluates the dual objective for traces
/// and tests. dual_lipschitz holds the per-component Lipschitz constants of
/// the dual gradients (eig(H_{y_i}) / sigma_{f_i}).
struct AmaProblem {
  std::size_t mu_dim = 0;
  std::vector<AmaComponent> components;
  std::function<Vector(const Vector&, double)> prox_dual;  // prox of the nonsmooth dual part
  std::function<double(const Vector&)> dual_value;         // optional
  std::vector<double> dual_lipschitz;
};

struct AmaSolveResult {
  Vector dual;                       // averaged multipliers of the final stage
  std::vector<Vector> primal;        // per-component minimizers at `dual`
  SolverTrace trace;
};

/// Randomized dual solver for the coupled problem: Prox-SVRG running on the
/// dual objective, where the gradient of the sampled smooth component is
/// obtained from that component's primal minimizer,
///     grad F_i(mu) = -A_i argmin_y { f_i(y) + (A_i' mu)' y }.
/// A point-mass distribution reproduces the deterministic dual proximal
/// gradient method iterate for iterate.
inline AmaSolveResult svr_ama_solve(const AmaProblem& prob, const SolverConfig& config,
                                    const Vector* initial_dual = nullptr) {
  if (prob.components.empty()) throw InvalidParameter("no components");
  if (!prob.prox_dual) throw InvalidParameter("missing dual prox");
  if (prob.dual_lipschitz.size() != prob.components.size())
    throw DimensionMismatch("one dual Lipschitz constant per component");

  const auto grad_component = [&prob](std::size_t i, const Vector& mu) {
    const AmaComponent& c = prob.components[i];
    const Vector lin = numerics::matvec_transposed(c.coupling, mu);
    const Vector y = c.minimize(lin);
    Vector g = numerics::matvec(c.coupling, y);
    for (double& x : g) x = -x;
    return g;
  };

  CompositeProblem composite;
  composite.dim = prob.mu_dim;
  composite.num_components = prob.components.size();
  composite.grad_component = grad_component;
  composite.grad_full = [&prob, grad_component](const Vector& mu) {
    Vector g(prob.mu_dim, 0.0);
    for (std::size_t i = 0; i < prob.components.size(); ++i)
      numerics::axpy(1.0, grad_component(i, mu), g);
    return g;
  };
  composite.prox = prob.prox_dual;
  composite.sigma_F = 0.0;
  composite.lipschitz = prob.dual_lipschitz;

  CompositeSolveResult inner = prox_svrg_solve(composite, config, initial_dual);

  AmaSolveResult res;
  res.dual = std::move(inner.solution);
  res.trace = std::move(inner.trace);
  if (prob.dual_value) {
    for (std::size_t k = 0; k < res.trace.dual_averages.size() && k < res.trace.stages.size(); ++k)
      res.trace.stages[k].dual_value = prob.dual_value(res.trace.dual_averages[k]);
    if (!res.trace.stages.empty())
      res.trace.stages.back().dual_value = prob.dual_value(res.dual);
  }
  res.primal.reserve(prob.components.size());
  for (const AmaComponent& c : prob.components)
    res.primal.push_back(c.minimize(numerics::matvec_transposed(c.coupling, res.dual)));
  return res;
}

}  // namespace dualsplit::solvers
