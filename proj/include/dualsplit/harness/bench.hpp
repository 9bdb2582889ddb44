#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "dualsplit/harness/problem_io.hpp"
#include "dualsplit/harness/trace_io.hpp"
#include "dualsplit/model/time_split.hpp"
#include "dualsplit/oracle/reference_qp.hpp"
#include "dualsplit/solvers/ama.hpp"
#include "dualsplit/solvers/svr_ama_split.hpp"

namespace dualsplit::harness {

struct ScenarioSummary {
  std::string name;
  std::string trace_path;
  double mean_final_obj_gap = 0.0;
  double std_final_obj_gap = 0.0;
};

struct BenchResult {
  std::vector<ScenarioSummary> scenarios;
  std::string summary_path;
};

namespace detail {

struct ScenarioSpec {
  std::string name;
  SolverKind solver;
  sampling::DistributionKind dist;
  bool adaptive;
};

}  // namespace detail

/// Distribution benchmark: runs the randomized solver under the uniform,
/// Poisson, Pareto and adaptive samplers plus the synchronous baseline at an
/// iteration-matched budget floor(s_bar * T / divisor), all on the same
/// problem and seeds. Emits one trace file per scenario plus a summary of the
/// final objective gaps.
inline BenchResult bench_distributions(const model::MpcProblem& prob, const RunConfig& rc,
                                       const std::string& out_prefix) {
  const model::SplitProblem split = model::time_split(prob);
  const auto ref = oracle::solve_reference(prob, rc.base.kkt_tol);

  const std::size_t divisor = rc.iteration_matching_divisor ? rc.iteration_matching_divisor
                                                            : prob.N;
  const int ama_budget = static_cast<int>(
      std::floor(static_cast<double>(rc.base.s_bar) * rc.base.T / static_cast<double>(divisor)));

  const std::vector<detail::ScenarioSpec> specs = {
      {"uniform", SolverKind::svr_ama, sampling::DistributionKind::uniform, false},
      {"poisson", SolverKind::svr_ama, sampling::DistributionKind::poisson, false},
      {"pareto", SolverKind::svr_ama, sampling::DistributionKind::pareto, false},
      {"adaptive", SolverKind::svr_ama, sampling::DistributionKind::adaptive, true},
      {"ama", SolverKind::ama, sampling::DistributionKind::uniform, false},
  };

  BenchResult result;
  nlohmann::ordered_json summary;
  summary["scenarios"] = nlohmann::ordered_json::array();

  for (const auto& spec : specs) {
    const std::string trace_path = out_prefix + "_" + spec.name + ".csv";
    TraceWriter writer(trace_path);
    nlohmann::ordered_json meta;
    meta["scenario"] = spec.name;
    meta["started_at"] = timestamp_now();
    meta["seeds"] = nlohmann::ordered_json::array();

    std::vector<double> final_gaps;
    for (const std::uint64_t seed : rc.seeds) {
      solvers::SolverConfig cfg = rc.base;
      cfg.seed = seed;
      cfg.distribution_kind = spec.dist;
      cfg.adaptive_enabled = spec.adaptive;
      solvers::SplitSolveResult res;
      if (spec.solver == SolverKind::ama) {
        cfg.s_bar = ama_budget;
        res = solvers::ama_solve(split, cfg);
      } else {
        res = solvers::svr_ama_split_solve(split, cfg);
      }
      double last_gap = 0.0;
      for (std::size_t k = 0; k < res.trace.stages.size(); ++k) {
        const auto& rec = res.trace.stages[k];
        TraceRow row;
        row.seed = seed;
        row.stage = rec.stage;
        row.dual_surrogate = rec.dual_value;
        row.dual_in_domain = rec.dual_in_domain;
        row.primal_objective = rec.primal_objective;
        row.obj_gap = rec.primal_objective - ref.objective;
        row.primal_dist = std::numeric_limits<double>::quiet_NaN();
        row.consensus_res = rec.consensus_res;
        row.ineq_violation = rec.ineq_violation;
        row.wall_time = res.trace.wall_seconds[k];
        if (k + 1 == res.trace.stages.size()) {
          const auto sub = oracle::suboptimality(ref, res.primal, prob);
          row.primal_dist = sub.primal_dist;
          last_gap = sub.obj_gap;
        }
        writer.write(row);
      }
      final_gaps.push_back(last_gap);

      nlohmann::ordered_json seed_meta;
      seed_meta["seed"] = seed;
      seed_meta["final_probs"] = res.trace.final_probs;
      seed_meta["adaptation_events"] = adaptation_log(res.trace);
      meta["seeds"].push_back(std::move(seed_meta));
    }
    meta["finished_at"] = timestamp_now();
    std::ofstream mf(metadata_path(trace_path));
    mf << meta.dump(2) << "\n";

    ScenarioSummary sum;
    sum.name = spec.name;
    sum.trace_path = trace_path;
    double mean = 0.0;
    for (double g : final_gaps) mean += g;
    mean /= static_cast<double>(final_gaps.size());
    double var = 0.0;
    for (double g : final_gaps) var += (g - mean) * (g - mean);
    var = final_gaps.size() > 1 ? var / static_cast<double>(final_gaps.size() - 1) : 0.0;
    sum.mean_final_obj_gap = mean;
    sum.std_final_obj_gap = std::sqrt(var);
    result.scenarios.push_back(sum);

    nlohmann::ordered_json sj;
    sj["name"] = sum.name;
    sj["trace"] = sum.trace_path;
    sj["mean_final_obj_gap"] = sum.mean_final_obj_gap;
    sj["std_final_obj_gap"] = sum.std_final_obj_gap;
    if (spec.solver == SolverKind::ama) sj["iterations"] = ama_budget;
    summary["scenarios"].push_back(std::move(sj));
  }

  result.summary_path = out_prefix + "_summary.json";
  std::ofstream sf(result.summary_path);
  sf << summary.dump(2) << "\n";
  return result;
}

}  // namespace dualsplit::harness
