#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "dualsplit/model/time_split.hpp"

namespace dualsplit::solvers {

/// Scalar record per completed outer stage.
struct StageRecord {
  int stage = 0;
  double dual_value = 0.0;     // meaningful only when dual_in_domain
  bool dual_in_domain = true;
  double primal_objective = 0.0;
  double consensus_res = 0.0;
  double ineq_violation = 0.0;
  // squared distance to the configured reference point; NaN when unset
  double primal_dist = std::numeric_limits<double>::quiet_NaN();
};

struct AdaptationEvent {
  int stage = 0;                         // outer stage after which the update fired
  std::vector<double> lambda_change_sq;  // per-stage squared multiplier change
  std::vector<double> probs_after;
};

/// Per-run history. Vector histories (averaged duals/primals, per-stage
/// sample counts) are retained only when the config asks for them; scalar
/// records and cumulative sample counts are always kept. Wall time lives in
/// its own array so trace comparisons can ignore it.
struct SolverTrace {
  std::vector<StageRecord> stages;
  std::vector<double> wall_seconds;  // one entry per stage record
  std::vector<std::uint64_t> sample_counts;        // cumulative, N+1 bins
  std::vector<AdaptationEvent> adaptations;
  std::vector<double> final_probs;

  // populated when record_vectors is set
  std::vector<std::vector<double>> dual_averages;    // stacked mu per stage
  std::vector<model::PrimalVars> primal_averages;
  std::vector<std::vector<std::uint64_t>> stage_sample_counts;
  std::vector<std::vector<std::size_t>> sampled_indices;  // per stage, T entries
};

}  // namespace dualsplit::solvers
