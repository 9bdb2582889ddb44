#pragma once

#include <cstdint>
#include <vector>

#include "dualsplit/numerics/dense.hpp"
#include "dualsplit/sampling/distribution.hpp"

namespace dualsplit::solvers {

/// Which spectral constant enters the step-size certificate. The theory
/// statements disagree between the largest and smallest eigenvalue of Hy'Hy;
/// both are computed and the conservative (largest) one is the default.
enum class StepConstantVariant { eig_max, eig_min };

/// Where the neighbor-stage primal in the variance-reduced direction comes
/// from: the most recently stored value (default) or the snapshot value.
enum class StaleNeighborMode { latest, snapshot };

struct SolverConfig {
  double tau = 0.1;       // dual step size
  int T = 10;             // inner iterations per outer stage
  int s_bar = 100;        // outer stages
  sampling::DistributionKind distribution_kind = sampling::DistributionKind::uniform;
  sampling::DistributionParams distribution_params;
  bool adaptive_enabled = false;
  double adaptive_threshold = 0.01;
  bool accelerate = false;  // Nesterov momentum on the duals; experimental
  std::uint64_t seed = 0;
  double kkt_tol = 1e-8;
  double domain_tol = 1e-9;
  // Runs with a step size that fails the certificate instead of throwing
  // StepTooLarge. Mirrors the empirically tuned large-step configurations.
  bool allow_uncertified_step = false;
  StepConstantVariant step_constant = StepConstantVariant::eig_max;
  StaleNeighborMode stale_neighbor = StaleNeighborMode::latest;
  // Retains averaged duals/primals and per-stage sample counts in the trace.
  // Off by default: long runs only need the scalar records.
  bool record_vectors = false;
  // Evaluate and record the dual value each outer stage.
  bool record_dual_value = true;
  // Optional reference stage vectors; when set, each stage record carries the
  // squared distance of the averaged primal to this point.
  const std::vector<numerics::Vector>* primal_reference = nullptr;
};

}  // namespace dualsplit::solvers
