#pragma once

#include <iostream>
#include <string>

#include "dualsplit/harness/bench.hpp"
#include "dualsplit/harness/log.hpp"
#include "dualsplit/harness/problem_io.hpp"
#include "dualsplit/harness/simulate.hpp"
#include "dualsplit/harness/synthetic.hpp"
#include "dualsplit/harness/trace_io.hpp"
#include "dualsplit/solvers/constants.hpp"

namespace dualsplit::harness {

// exit codes: 0 success, 1 parse/validation failure, 2 solver failure
inline constexpr int kExitOk = 0;
inline constexpr int kExitParse = 1;
inline constexpr int kExitSolver = 2;

namespace detail {

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const InvalidParameter& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolver;
  }
}

}  // namespace detail

/// Open-loop solve: runs the configured solver for every seed on the problem
/// and writes the trace plus a companion metadata file.
inline int run_solve(const std::string& problem_path, const std::string& config_path,
                     const std::string& out_path) {
  return detail::guarded([&] {
    const model::MpcProblem prob = load_problem(problem_path);
    const RunConfig rc = load_run_config(config_path);
    const model::SplitProblem split = model::time_split(prob);
    log_info("solve: N=" + std::to_string(prob.N) + " seeds=" + std::to_string(rc.seeds.size()));

    std::optional<oracle::OracleSolution> ref;
    if (rc.compute_reference) ref = oracle::solve_reference(prob, rc.base.kkt_tol);

    TraceWriter writer(out_path);
    nlohmann::ordered_json meta;
    meta["command"] = "solve";
    meta["started_at"] = timestamp_now();
    meta["seeds"] = nlohmann::ordered_json::array();

    for (const std::uint64_t seed : rc.seeds) {
      solvers::SolverConfig cfg = rc.base;
      cfg.seed = seed;
      if (ref) cfg.primal_reference = &ref->y_star;
      const solvers::SplitSolveResult res = rc.solver == SolverKind::ama
                                                ? solvers::ama_solve(split, cfg)
                                                : solvers::svr_ama_split_solve(split, cfg);
      for (std::size_t k = 0; k < res.trace.stages.size(); ++k) {
        const auto& rec = res.trace.stages[k];
        TraceRow row;
        row.seed = seed;
        row.stage = rec.stage;
        row.dual_surrogate = rec.dual_value;
        row.dual_in_domain = rec.dual_in_domain;
        row.primal_objective = rec.primal_objective;
        row.obj_gap = ref ? rec.primal_objective - ref->objective
                          : std::numeric_limits<double>::quiet_NaN();
        row.primal_dist = rec.primal_dist;
        row.consensus_res = rec.consensus_res;
        row.ineq_violation = rec.ineq_violation;
        row.wall_time = res.trace.wall_seconds[k];
        writer.write(row);
      }
      nlohmann::ordered_json seed_meta;
      seed_meta["seed"] = seed;
      seed_meta["final_probs"] = res.trace.final_probs;
      seed_meta["adaptation_events"] = adaptation_log(res.trace);
      seed_meta["sample_counts"] = res.trace.sample_counts;
      meta["seeds"].push_back(std::move(seed_meta));
    }
    meta["finished_at"] = timestamp_now();
    std::ofstream mf(metadata_path(out_path));
    mf << meta.dump(2) << "\n";
    return kExitOk;
  });
}

/// Closed-loop simulation over a fixed number of steps per seed.
inline int run_simulate(const std::string& problem_path, const std::string& config_path,
                        int steps, const std::string& out_path) {
  return detail::guarded([&] {
    const model::MpcProblem prob = load_problem(problem_path);
    const RunConfig rc = load_run_config(config_path);
    if (steps < 1) throw InvalidParameter("steps must be at least 1");

    TraceWriter writer(out_path);
    nlohmann::ordered_json meta;
    meta["command"] = "simulate";
    meta["started_at"] = timestamp_now();
    meta["seeds"] = nlohmann::ordered_json::array();

    for (const std::uint64_t seed : rc.seeds) {
      const ClosedLoopRun run = simulate_closed_loop(prob, rc, seed, steps);
      nlohmann::ordered_json seed_meta;
      seed_meta["seed"] = seed;
      seed_meta["cumulative_cost"] = run.cumulative_cost;
      nlohmann::ordered_json steps_meta = nlohmann::ordered_json::array();
      for (const auto& st : run.steps) {
        writer.write(st.row);
        nlohmann::ordered_json sm;
        sm["step"] = st.step;
        sm["stage_cost"] = st.stage_cost;
        sm["u_applied"] = st.u_applied;
        sm["u_last_iterate"] = st.u_last;
        steps_meta.push_back(std::move(sm));
      }
      seed_meta["steps"] = std::move(steps_meta);
      meta["seeds"].push_back(std::move(seed_meta));
    }
    meta["finished_at"] = timestamp_now();
    std::ofstream mf(metadata_path(out_path));
    mf << meta.dump(2) << "\n";
    return kExitOk;
  });
}

/// Distribution benchmark over the five scenarios.
inline int run_bench(const std::string& problem_path, const std::string& config_path,
                     const std::string& out_prefix) {
  return detail::guarded([&] {
    const model::MpcProblem prob = load_problem(problem_path);
    const RunConfig rc = load_run_config(config_path);
    const BenchResult res = bench_distributions(prob, rc, out_prefix);
    for (const auto& sc : res.scenarios)
      std::cout << sc.name << ": mean_final_obj_gap = " << format_number(sc.mean_final_obj_gap)
                << " (std " << format_number(sc.std_final_obj_gap) << ")\n";
    std::cout << "summary written to " << res.summary_path << "\n";
    return kExitOk;
  });
}

/// Synthetic problem generation.
inline int run_gen(std::size_t n, std::size_t m, std::size_t N, double kappa, std::uint64_t seed,
                   const GenOptions& opts, const std::string& out_path) {
  return detail::guarded([&] {
    const SyntheticProblem sp = gen_synthetic(n, m, N, kappa, seed, opts);
    std::ofstream out(out_path);
    if (!out) throw ParseError("cannot open output " + out_path);
    out << sp.file.dump(2) << "\n";
    const model::SplitProblem split = model::time_split(sp.problem);
    std::cout << "generated " << out_path << " (measured kappa = "
              << format_number(split.L_f / split.sigma_f) << ")\n";
    return kExitOk;
  });
}

/// Prints the problem constants and both contraction certificates for the
/// given configuration.
inline int run_check_constants(const std::string& problem_path, const std::string& config_path) {
  return detail::guarded([&] {
    const model::MpcProblem prob = load_problem(problem_path);
    const RunConfig rc = load_run_config(config_path);
    const model::SplitProblem split = model::time_split(prob);
    const solvers::ProblemConstants c = solvers::compute_constants(split);
    const sampling::Distribution dist = sampling::make_distribution(
        rc.base.distribution_kind, rc.base.distribution_params, prob.N);

    const double l_star_cfg = (rc.base.step_constant == solvers::StepConstantVariant::eig_max
                                   ? c.eig_max_Hy
                                   : c.eig_min_Hy) /
                              c.sigma_f;
    std::cout << "sigma_f = " << format_number(c.sigma_f) << "\n";
    std::cout << "L_f = " << format_number(c.L_f) << "\n";
    std::cout << "L_grad_F = " << format_number(c.grad_lipschitz) << "\n";
    std::cout << "eig_max_Hy = " << format_number(c.eig_max_Hy) << "\n";
    std::cout << "eig_min_Hy = " << format_number(c.eig_min_Hy) << "\n";
    std::cout << "sigma_F_dual = " << format_number(c.dual_strong_convexity) << "\n";
    std::cout << "L_star = " << format_number(l_star_cfg) << "\n";
    std::cout << "L_star_pi_eig_max = "
              << format_number(solvers::l_star(c, dist, solvers::StepConstantVariant::eig_max))
              << "\n";
    std::cout << "L_star_pi_eig_min = "
              << format_number(solvers::l_star(c, dist, solvers::StepConstantVariant::eig_min))
              << "\n";
    const auto print_rho = [&](const char* name, solvers::RhoVariant variant, double second) {
      try {
        const auto cert = solvers::compute_rho(rc.base.tau, rc.base.T, l_star_cfg, second, variant);
        std::cout << name << " = " << format_number(cert.rho)
                  << " certificate_valid = " << (cert.certificate_valid ? "true" : "false")
                  << "\n";
      } catch (const StepTooLarge&) {
        std::cout << name << " = step_too_large\n";
      }
    };
    print_rho("rho_thm1", solvers::RhoVariant::thm1, c.dual_strong_convexity);
    print_rho("rho_thm2", solvers::RhoVariant::thm2, c.L_f);
    return kExitOk;
  });
}

}  // namespace dualsplit::harness
