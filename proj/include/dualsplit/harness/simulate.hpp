#pragma once

#include <chrono>
#include <string>
#include <vector>

#include "dualsplit/harness/problem_io.hpp"
#include "dualsplit/harness/trace_io.hpp"
#include "dualsplit/model/time_split.hpp"
#include "dualsplit/oracle/reference_qp.hpp"
#include "dualsplit/solvers/ama.hpp"
#include "dualsplit/solvers/svr_ama_split.hpp"

namespace dualsplit::harness {

struct ClosedLoopStep {
  int step = 0;
  numerics::Vector state;       // state the solve started from
  numerics::Vector u_applied;   // first input of the averaged iterate
  numerics::Vector u_last;      // first input of the last inner iterate
  double stage_cost = 0.0;      // 1/2 (x'Qx + u'Ru) at the applied pair
  TraceRow row;                 // per-step trace record
};

struct ClosedLoopRun {
  std::uint64_t seed = 0;
  std::vector<ClosedLoopStep> steps;
  double cumulative_cost = 0.0;
};

/// Receding-horizon simulation: at every step the configured solver runs with
/// its per-step budget from the current state, the first input block of the
/// averaged primal is applied, and the plant is propagated. Throws
/// NonFiniteIterate via the solver on blowups and Error("state diverged")
/// when the state leaves the divergence bound.
inline ClosedLoopRun simulate_closed_loop(const model::MpcProblem& prob0, const RunConfig& rc,
                                          std::uint64_t seed, int steps) {
  if (steps < 1) throw InvalidParameter("step count must be positive");
  model::MpcProblem prob = prob0;
  model::SplitProblem split = model::time_split(prob);
  const double bound =
      rc.divergence_factor * numerics::norm2(prob0.x_init) + 1.0;

  ClosedLoopRun run;
  run.seed = seed;
  numerics::Vector x = prob0.x_init;
  const auto t0 = std::chrono::steady_clock::now();
  double prev_elapsed = 0.0;

  for (int k = 0; k < steps; ++k) {
    split.x_init = x;
    prob.x_init = x;

    ClosedLoopStep st;
    st.step = k;
    st.state = x;

    solvers::SolverConfig cfg = rc.base;
    cfg.seed = seed;

    model::PrimalVars primal;
    model::PrimalVars last;
    solvers::StageRecord final_rec;
    if (rc.solver == SolverKind::oracle) {
      const auto ref = oracle::solve_reference(prob, rc.base.kkt_tol);
      primal.y = ref.y_star;
      primal.z.assign(split.N, numerics::Vector(split.n, 0.0));
      primal.sigma.assign(split.N + 1, numerics::Vector(split.p, 0.0));
      for (std::size_t t = 0; t < split.N; ++t)
        for (std::size_t i = 0; i < split.n; ++i) primal.z[t][i] = ref.y_star[t + 1][i];
      last = primal;
      final_rec.dual_value = ref.objective;  // strong duality at the optimum
      final_rec.dual_in_domain = true;
      final_rec.primal_objective = ref.objective;
    } else {
      const solvers::SplitSolveResult res = rc.solver == SolverKind::ama
                                                ? solvers::ama_solve(split, cfg)
                                                : solvers::svr_ama_split_solve(split, cfg);
      primal = res.primal;
      last = res.last_iterate;
      final_rec = res.trace.stages.back();
    }

    st.u_applied.assign(primal.y[0].begin() + split.n, primal.y[0].end());
    st.u_last.assign(last.y[0].begin() + split.n, last.y[0].end());

    const numerics::Vector qx = numerics::matvec(prob.Q, x);
    const numerics::Vector ru = numerics::matvec(prob.R, st.u_applied);
    st.stage_cost = 0.5 * (numerics::dot(x, qx) + numerics::dot(st.u_applied, ru));
    run.cumulative_cost += st.stage_cost;

    st.row.seed = seed;
    st.row.stage = k;
    st.row.dual_surrogate = final_rec.dual_value;
    st.row.dual_in_domain = final_rec.dual_in_domain;
    st.row.primal_objective = final_rec.primal_objective;
    if (rc.compute_reference && rc.solver != SolverKind::oracle) {
      const auto ref = oracle::solve_reference(prob, rc.base.kkt_tol);
      const auto sub = oracle::suboptimality(ref, primal, prob);
      st.row.obj_gap = sub.obj_gap;
      st.row.primal_dist = sub.primal_dist;
    } else {
      st.row.obj_gap = std::numeric_limits<double>::quiet_NaN();
      st.row.primal_dist = std::numeric_limits<double>::quiet_NaN();
    }
    const model::Residuals rr = model::residuals(split, primal, x);
    st.row.consensus_res = rr.consensus_res;
    st.row.ineq_violation = rr.ineq_violation;
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    st.row.wall_time = elapsed - prev_elapsed;
    prev_elapsed = elapsed;

    // propagate the plant
    numerics::Vector xn = numerics::matvec(prob.A, x);
    numerics::axpy(1.0, numerics::matvec(prob.B, st.u_applied), xn);
    x = xn;
    if (!numerics::all_finite(x) || numerics::norm2(x) > bound)
      throw StateDiverged("closed-loop state left the configured bound");
    run.steps.push_back(std::move(st));
  }
  return run;
}

}  // namespace dualsplit::harness
