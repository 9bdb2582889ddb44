#pragma once

#include <cmath>
#include <vector>

#include "dualsplit/model/time_split.hpp"
#include "dualsplit/numerics/errors.hpp"
#include "dualsplit/oracle/reference_qp.hpp"
#include "dualsplit/solvers/trace.hpp"

namespace dualsplit::solvers {

struct BoundCheckStage {
  int stage = 0;
  double mean_primal_dist = 0.0;  // mean || y_avg^s - y* ||^2
  double mean_dual_gap = 0.0;     // D* - mean D(mu_avg^s)
  double bound = 0.0;             // (2/sigma_f) * mean_dual_gap
  double slack_3se = 0.0;         // 3 standard errors of the per-seed margin
  bool holds = false;
};

struct BoundCheckReport {
  std::vector<BoundCheckStage> stages;
  bool all_hold = true;
};

/// Checks the averaged-primal error bound
///     E ||y_avg^s - y*||^2  <=  (2/sigma_f) (D* - E D(mu_avg^s))
/// stage by stage, with D* = the reference optimum (strong duality) and both
/// expectations replaced by seed averages plus a three-standard-error Monte
/// Carlo slack on the per-seed margin. Traces must come from runs with
/// record_vectors enabled; at least two seeds are required.
inline BoundCheckReport primal_bound_check(const model::SplitProblem& split,
                                           const std::vector<SolverTrace>& traces,
                                           const oracle::OracleSolution& ref) {
  if (traces.size() < 2) throw InsufficientSeeds("need at least 2 seeds");
  const std::size_t num_stages = traces.front().stages.size();
  for (const SolverTrace& tr : traces) {
    if (tr.stages.size() != num_stages || tr.primal_averages.size() != num_stages)
      throw DimensionMismatch(
          "traces must share the stage count and retain primal averages");
  }
  const double dstar = ref.objective;
  const double seeds = static_cast<double>(traces.size());

  BoundCheckReport report;
  report.stages.reserve(num_stages);
  for (std::size_t sidx = 0; sidx < num_stages; ++sidx) {
    BoundCheckStage st;
    st.stage = traces.front().stages[sidx].stage;
    std::vector<double> margins(traces.size());
    double dist_acc = 0.0, gap_acc = 0.0;
    for (std::size_t j = 0; j < traces.size(); ++j) {
      const SolverTrace& tr = traces[j];
      if (!tr.stages[sidx].dual_in_domain)
        throw InvalidParameter("dual average left the domain; bound undefined");
      double dist = 0.0;
      const model::PrimalVars& pv = tr.primal_averages[sidx];
      for (std::size_t t = 0; t < pv.y.size(); ++t) {
        const numerics::Vector diff = numerics::sub(pv.y[t], ref.y_star[t]);
        dist += numerics::dot(diff, diff);
      }
      const double gap = dstar - tr.stages[sidx].dual_value;
      dist_acc += dist;
      gap_acc += gap;
      margins[j] = (2.0 / split.sigma_f) * gap - dist;
    }
    st.mean_primal_dist = dist_acc / seeds;
    st.mean_dual_gap = gap_acc / seeds;
    st.bound = (2.0 / split.sigma_f) * st.mean_dual_gap;
    double mean_margin = 0.0;
    for (double g : margins) mean_margin += g;
    mean_margin /= seeds;
    double var = 0.0;
    for (double g : margins) var += (g - mean_margin) * (g - mean_margin);
    var /= (seeds - 1.0);
    st.slack_3se = 3.0 * std::sqrt(var / seeds);
    st.holds = mean_margin >= -st.slack_3se;
    report.all_hold = report.all_hold && st.holds;
    report.stages.push_back(st);
  }
  return report;
}

}  // namespace dualsplit::solvers
