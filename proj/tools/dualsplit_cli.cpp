// Command line front end: solve, simulate, bench, gen, check-constants.
// File formats and exit codes are documented in the README.

#include <cstdint>
#include <string>

#include <CLI11.hpp>

#include "dualsplit/harness/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"dual first-order MPC solver toolkit"};
  app.require_subcommand(1);

  std::string problem_path, config_path, out_path;
  int steps = 1;

  auto* solve = app.add_subcommand("solve", "run the configured solver on a problem");
  solve->add_option("--problem", problem_path, "problem JSON")->required();
  solve->add_option("--config", config_path, "run configuration JSON")->required();
  solve->add_option("--out", out_path, "trace CSV output path")->required();

  auto* simulate = app.add_subcommand("simulate", "closed-loop receding-horizon simulation");
  simulate->add_option("--problem", problem_path, "problem JSON")->required();
  simulate->add_option("--config", config_path, "run configuration JSON")->required();
  simulate->add_option("--steps", steps, "closed-loop steps")->required();
  simulate->add_option("--out", out_path, "trace CSV output path")->required();

  auto* bench = app.add_subcommand("bench", "distribution benchmark (five scenarios)");
  bench->add_option("--problem", problem_path, "problem JSON")->required();
  bench->add_option("--config", config_path, "run configuration JSON")->required();
  bench->add_option("--out", out_path, "output prefix for the per-scenario traces")->required();

  std::size_t gn = 2, gm = 1, gN = 10;
  double kappa = 10.0;
  std::uint64_t seed = 0;
  dualsplit::harness::GenOptions gopts;
  auto* gen = app.add_subcommand("gen", "generate a synthetic ill-conditioned problem");
  gen->add_option("--n", gn, "state dimension");
  gen->add_option("--m", gm, "input dimension");
  gen->add_option("--horizon", gN, "horizon length");
  gen->add_option("--kappa", kappa, "target condition number of the stage weights");
  gen->add_option("--seeds,--seed", seed, "generator seed");
  gen->add_option("--extra-rows", gopts.extra_rows, "additional random constraint rows");
  gen->add_option("--init-fraction", gopts.init_fraction,
                  "initial state as a fraction of the state bounds");
  gen->add_option("--out", out_path, "problem JSON output path")->required();

  auto* check = app.add_subcommand("check-constants",
                                   "print problem constants and contraction certificates");
  check->add_option("--problem", problem_path, "problem JSON")->required();
  check->add_option("--config", config_path, "run configuration JSON")->required();

  CLI11_PARSE(app, argc, argv);

  if (solve->parsed()) return dualsplit::harness::run_solve(problem_path, config_path, out_path);
  if (simulate->parsed())
    return dualsplit::harness::run_simulate(problem_path, config_path, steps, out_path);
  if (bench->parsed()) return dualsplit::harness::run_bench(problem_path, config_path, out_path);
  if (gen->parsed())
    return dualsplit::harness::run_gen(gn, gm, gN, kappa, seed, gopts, out_path);
  if (check->parsed()) return dualsplit::harness::run_check_constants(problem_path, config_path);
  return dualsplit::harness::kExitParse;
}
