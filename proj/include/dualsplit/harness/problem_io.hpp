#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dualsplit/model/mpc_problem.hpp"
#include "dualsplit/numerics/errors.hpp"
#include "dualsplit/solvers/config.hpp"

namespace dualsplit::harness {

using json = nlohmann::ordered_json;

namespace detail {

inline numerics::DenseMatrix parse_matrix(const json& j, const std::string& name) {
  if (!j.is_array() || j.empty() || !j.front().is_array())
    throw ParseError(name + " must be a nested array of rows");
  const std::size_t rows = j.size();
  const std::size_t cols = j.front().size();
  numerics::DenseMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (j[i].size() != cols) throw ParseError(name + " has ragged rows");
    for (std::size_t c = 0; c < cols; ++c) {
      if (!j[i][c].is_number()) throw ParseError(name + " holds a non-numeric entry");
      m(i, c) = j[i][c].get<double>();
      if (!std::isfinite(m(i, c))) throw ParseError(name + " holds a non-finite entry");
    }
  }
  return m;
}

inline numerics::Vector parse_vector(const json& j, const std::string& name) {
  if (!j.is_array()) throw ParseError(name + " must be an array");
  numerics::Vector v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ParseError(name + " holds a non-numeric entry");
    v[i] = j[i].get<double>();
    if (!std::isfinite(v[i])) throw ParseError(name + " holds a non-finite entry");
  }
  return v;
}

inline json matrix_json(const numerics::DenseMatrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(m(i, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline const json& at(const json& j, const std::string& key) {
  const auto it = j.find(key);
  if (it == j.end()) throw ParseError("missing key '" + key + "'");
  return *it;
}

}  // namespace detail

inline json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

/// Problem document: system {A, B}, constraints {C, D, d}, weights {Q, R,
/// optional terminal}, horizon, x_init.
inline model::MpcProblem problem_from_json(const json& j) {
  const json& sys = detail::at(j, "system");
  const json& con = detail::at(j, "constraints");
  const json& wts = detail::at(j, "weights");
  std::optional<numerics::DenseMatrix> terminal;
  if (wts.contains("terminal")) terminal = detail::parse_matrix(wts["terminal"], "terminal");
  if (!detail::at(j, "horizon").is_number_unsigned())
    throw ParseError("horizon must be a nonnegative integer");
  try {
    return model::build_problem(
        detail::parse_matrix(detail::at(sys, "A"), "A"),
        detail::parse_matrix(detail::at(sys, "B"), "B"),
        detail::parse_matrix(detail::at(con, "C"), "C"),
        detail::parse_matrix(detail::at(con, "D"), "D"),
        detail::parse_vector(detail::at(con, "d"), "d"),
        detail::parse_matrix(detail::at(wts, "Q"), "Q"),
        detail::parse_matrix(detail::at(wts, "R"), "R"),
        detail::at(j, "horizon").get<std::size_t>(),
        detail::parse_vector(detail::at(j, "x_init"), "x_init"), std::move(terminal));
  } catch (const DimensionMismatch& e) {
    throw ParseError(std::string("problem validation: ") + e.what());
  } catch (const NotPositiveDefinite& e) {
    throw ParseError(std::string("problem validation: ") + e.what());
  }
}

inline model::MpcProblem load_problem(const std::string& path) {
  return problem_from_json(load_json(path));
}

inline json problem_to_json(const model::MpcProblem& prob) {
  json j;
  j["system"] = {{"A", detail::matrix_json(prob.A)}, {"B", detail::matrix_json(prob.B)}};
  j["constraints"] = {{"C", detail::matrix_json(prob.C)},
                      {"D", detail::matrix_json(prob.D)},
                      {"d", prob.d}};
  j["weights"] = {{"Q", detail::matrix_json(prob.Q)}, {"R", detail::matrix_json(prob.R)}};
  if (prob.terminal_weight) j["weights"]["terminal"] = detail::matrix_json(*prob.terminal_weight);
  j["horizon"] = prob.N;
  j["x_init"] = prob.x_init;
  return j;
}

enum class SolverKind { ama, svr_ama, oracle };

/// Run configuration document mapped onto SolverConfig plus the harness-side
/// fields (seed list, iteration-matching divisor, solver choice).
struct RunConfig {
  SolverKind solver = SolverKind::svr_ama;
  solvers::SolverConfig base;
  std::vector<std::uint64_t> seeds;
  std::size_t iteration_matching_divisor = 0;  // 0 = use the horizon length
  bool compute_reference = true;
  double divergence_factor = 1e6;  // closed-loop bound: factor * ||x_init|| + 1
};

inline RunConfig run_config_from_json(const json& j) {
  RunConfig rc;
  const std::string solver = detail::at(j, "solver").get<std::string>();
  if (solver == "ama")
    rc.solver = SolverKind::ama;
  else if (solver == "svr_ama")
    rc.solver = SolverKind::svr_ama;
  else if (solver == "oracle")
    rc.solver = SolverKind::oracle;
  else
    throw ParseError("unknown solver '" + solver + "'");

  rc.base.tau = detail::at(j, "tau").get<double>();
  rc.base.T = detail::at(j, "T").get<int>();
  rc.base.s_bar = detail::at(j, "s_bar").get<int>();

  if (j.contains("distribution")) {
    const json& d = j["distribution"];
    const std::string kind = detail::at(d, "kind").get<std::string>();
    if (kind == "uniform")
      rc.base.distribution_kind = sampling::DistributionKind::uniform;
    else if (kind == "poisson")
      rc.base.distribution_kind = sampling::DistributionKind::poisson;
    else if (kind == "pareto")
      rc.base.distribution_kind = sampling::DistributionKind::pareto;
    else if (kind == "custom")
      rc.base.distribution_kind = sampling::DistributionKind::custom;
    else if (kind == "adaptive")
      rc.base.distribution_kind = sampling::DistributionKind::adaptive;
    else
      throw ParseError("unknown distribution kind '" + kind + "'");
    if (d.contains("rate")) rc.base.distribution_params.rate = d["rate"].get<double>();
    if (d.contains("shape")) rc.base.distribution_params.shape = d["shape"].get<double>();
    if (d.contains("scale")) rc.base.distribution_params.scale = d["scale"].get<double>();
    if (d.contains("probs"))
      rc.base.distribution_params.weights = detail::parse_vector(d["probs"], "probs");
  }
  if (j.contains("adaptive")) {
    rc.base.adaptive_enabled = detail::at(j["adaptive"], "enabled").get<bool>();
    if (j["adaptive"].contains("threshold"))
      rc.base.adaptive_threshold = j["adaptive"]["threshold"].get<double>();
  }
  if (j.contains("accelerate")) rc.base.accelerate = j["accelerate"].get<bool>();
  if (j.contains("allow_uncertified_step"))
    rc.base.allow_uncertified_step = j["allow_uncertified_step"].get<bool>();
  if (j.contains("tolerances")) {
    if (j["tolerances"].contains("kkt_tol"))
      rc.base.kkt_tol = j["tolerances"]["kkt_tol"].get<double>();
    if (j["tolerances"].contains("domain_tol"))
      rc.base.domain_tol = j["tolerances"]["domain_tol"].get<double>();
  }
  if (j.contains("step_constant")) {
    const std::string v = j["step_constant"].get<std::string>();
    if (v == "eig_max")
      rc.base.step_constant = solvers::StepConstantVariant::eig_max;
    else if (v == "eig_min")
      rc.base.step_constant = solvers::StepConstantVariant::eig_min;
    else
      throw ParseError("unknown step_constant '" + v + "'");
  }
  if (j.contains("stale_neighbor")) {
    const std::string v = j["stale_neighbor"].get<std::string>();
    if (v == "latest")
      rc.base.stale_neighbor = solvers::StaleNeighborMode::latest;
    else if (v == "snapshot")
      rc.base.stale_neighbor = solvers::StaleNeighborMode::snapshot;
    else
      throw ParseError("unknown stale_neighbor '" + v + "'");
  }

  const json& seeds = detail::at(j, "seeds");
  if (!seeds.is_array() || seeds.empty()) throw ParseError("seeds must be a nonempty array");
  for (const auto& s : seeds) rc.seeds.push_back(s.get<std::uint64_t>());

  if (j.contains("iteration_matching_divisor"))
    rc.iteration_matching_divisor = j["iteration_matching_divisor"].get<std::size_t>();
  if (j.contains("compute_reference")) rc.compute_reference = j["compute_reference"].get<bool>();
  if (j.contains("divergence_factor")) rc.divergence_factor = j["divergence_factor"].get<double>();
  return rc;
}

inline RunConfig load_run_config(const std::string& path) {
  return run_config_from_json(load_json(path));
}

}  // namespace dualsplit::harness
