#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dualsplit/dualsplit.hpp"
#include "dualsplit/harness/bench.hpp"
#include "dualsplit/harness/commands.hpp"
#include "dualsplit/harness/problem_io.hpp"
#include "dualsplit/harness/simulate.hpp"
#include "dualsplit/harness/synthetic.hpp"

using namespace dualsplit;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() /
                 ("dualsplit_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& content) {
  std::ofstream out(p);
  out << content;
}

/// CSV body with the wall_time column removed (the only nondeterministic
/// column; run timestamps live in the metadata file).
std::string strip_wall_time(const std::string& csv) {
  std::stringstream in(csv), out;
  std::string line;
  while (std::getline(in, line)) {
    const auto pos = line.rfind(',');
    out << line.substr(0, pos) << "\n";
  }
  return out.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(DUALSPLIT_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string config_text(const std::string& extra = "") {
  return std::string("{\"solver\": \"svr_ama\", \"tau\": 0.03, \"T\": 10, \"s_bar\": 12, "
                     "\"distribution\": {\"kind\": \"uniform\"}, \"seeds\": [1, 2]") +
         extra + "}";
}

}  // namespace

TEST_CASE("problem documents round-trip through JSON") {
  const auto sp = harness::gen_synthetic(3, 2, 4, 25.0, 77);
  const model::MpcProblem back = harness::problem_from_json(sp.file);
  CHECK(back.N == sp.problem.N);
  CHECK(back.A.data() == sp.problem.A.data());
  CHECK(back.B.data() == sp.problem.B.data());
  CHECK(back.C.data() == sp.problem.C.data());
  CHECK(back.d == sp.problem.d);
  CHECK(back.Q.data() == sp.problem.Q.data());
  CHECK(back.x_init == sp.problem.x_init);
}

TEST_CASE("malformed documents raise ParseError") {
  CHECK_THROWS_AS(harness::problem_from_json(harness::json::parse("{}")), ParseError);
  CHECK_THROWS_AS(harness::run_config_from_json(harness::json::parse("{\"solver\": \"x\"}")),
                  ParseError);
  const auto no_seeds = harness::json::parse(
      "{\"solver\": \"ama\", \"tau\": 0.1, \"T\": 1, \"s_bar\": 1, \"seeds\": []}");
  CHECK_THROWS_AS(harness::run_config_from_json(no_seeds), ParseError);
}

TEST_CASE("run configuration carries solver and sampling choices") {
  const auto j = harness::json::parse(R"({
    "solver": "svr_ama", "tau": 0.9, "T": 10, "s_bar": 15000,
    "distribution": {"kind": "pareto", "shape": 1.5, "scale": 15.0},
    "adaptive": {"enabled": true, "threshold": 0.02},
    "accelerate": false, "allow_uncertified_step": true,
    "seeds": [4, 5, 6], "iteration_matching_divisor": 60
  })");
  const harness::RunConfig rc = harness::run_config_from_json(j);
  CHECK(rc.base.tau == 0.9);
  CHECK(rc.base.T == 10);
  CHECK(rc.base.s_bar == 15000);
  CHECK(rc.base.distribution_kind == sampling::DistributionKind::pareto);
  CHECK(rc.base.distribution_params.shape == 1.5);
  CHECK(rc.base.adaptive_enabled);
  CHECK(rc.base.adaptive_threshold == 0.02);
  CHECK(rc.base.allow_uncertified_step);
  CHECK(rc.seeds == std::vector<std::uint64_t>{4, 5, 6});
  CHECK(rc.iteration_matching_divisor == 60);
}

TEST_CASE("synthetic generation is deterministic and hits the target conditioning") {
  const auto a = harness::gen_synthetic(3, 2, 5, 1e3, 11);
  const auto b = harness::gen_synthetic(3, 2, 5, 1e3, 11);
  CHECK(a.file.dump() == b.file.dump());
  const auto c = harness::gen_synthetic(3, 2, 5, 1e3, 12);
  CHECK(a.file.dump() != c.file.dump());

  const model::SplitProblem s = model::time_split(a.problem);
  const double measured = s.L_f / s.sigma_f;
  CHECK(measured > 0.5e3);
  CHECK(measured < 2e3);
}

TEST_CASE("unit conditioning gives unit weights") {
  const auto sp = harness::gen_synthetic(1, 1, 3, 1.0, 5);
  CHECK(sp.problem.Q(0, 0) == 1.0);
  CHECK(sp.problem.R(0, 0) == 1.0);
}

TEST_CASE("synthetic problems are strictly feasible") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto sp = harness::gen_synthetic(4, 2, 8, 1e4, seed);
    CHECK_NOTHROW(oracle::solve_reference(sp.problem));
  }
}

TEST_CASE("cli exit codes follow the contract") {
  const fs::path dir = temp_dir();
  const fs::path prob = dir / "prob.json";
  const fs::path cfg = dir / "cfg.json";
  const fs::path bad = dir / "bad.json";
  const fs::path out = dir / "out.csv";

  REQUIRE(run_cli("gen --n 2 --m 1 --horizon 4 --kappa 10 --seed 1 --out " + prob.string()) == 0);
  spit(cfg, config_text());
  spit(bad, "{ not json");

  CHECK(run_cli("solve --problem " + prob.string() + " --config " + cfg.string() + " --out " +
                out.string()) == 0);
  CHECK(fs::exists(out));
  CHECK(run_cli("solve --problem " + bad.string() + " --config " + cfg.string() + " --out " +
                out.string()) == 1);
  // a step size beyond the certificate without the override flag
  spit(cfg, "{\"solver\": \"svr_ama\", \"tau\": 0.9, \"T\": 10, \"s_bar\": 5, "
            "\"distribution\": {\"kind\": \"uniform\"}, \"seeds\": [1]}");
  CHECK(run_cli("solve --problem " + prob.string() + " --config " + cfg.string() + " --out " +
                out.string()) == 2);
}

TEST_CASE("trace bodies are deterministic and well-formed") {
  const fs::path dir = temp_dir();
  const fs::path prob = dir / "det_prob.json";
  const fs::path cfg = dir / "det_cfg.json";
  const fs::path out1 = dir / "det1.csv";
  const fs::path out2 = dir / "det2.csv";
  REQUIRE(run_cli("gen --n 2 --m 1 --horizon 4 --kappa 10 --seed 3 --out " + prob.string()) == 0);
  spit(cfg, config_text());
  REQUIRE(harness::run_solve(prob.string(), cfg.string(), out1.string()) == 0);
  REQUIRE(harness::run_solve(prob.string(), cfg.string(), out2.string()) == 0);
  const std::string b1 = strip_wall_time(slurp(out1));
  const std::string b2 = strip_wall_time(slurp(out2));
  CHECK(b1 == b2);

  // header plus s_bar rows per seed, stages monotone without gaps
  std::stringstream in(slurp(out1));
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == harness::kTraceHeader);
  int rows = 0;
  long prev_seed = -1, prev_stage = 0;
  while (std::getline(in, line)) {
    ++rows;
    std::stringstream ls(line);
    std::string seed_s, stage_s;
    std::getline(ls, seed_s, ',');
    std::getline(ls, stage_s, ',');
    const long seed = std::stol(seed_s), stage = std::stol(stage_s);
    if (seed != prev_seed) {
      CHECK(stage == 1);
      prev_seed = seed;
    } else {
      CHECK(stage == prev_stage + 1);
    }
    prev_stage = stage;
  }
  CHECK(rows == 2 * 12);
}

TEST_CASE("uniform and adaptive runs share the index stream before adaptation") {
  const auto sp = harness::gen_synthetic(2, 1, 6, 30.0, 9);
  const model::SplitProblem s = model::time_split(sp.problem);
  solvers::SolverConfig cfg;
  cfg.tau = 0.3 / (4.0 * s.LgradF);
  cfg.T = 8;
  cfg.s_bar = 10;
  cfg.seed = 42;
  cfg.record_vectors = true;
  cfg.distribution_kind = sampling::DistributionKind::uniform;
  const auto uni = solvers::svr_ama_split_solve(s, cfg);
  cfg.distribution_kind = sampling::DistributionKind::adaptive;
  cfg.adaptive_enabled = true;
  const auto ada = solvers::svr_ama_split_solve(s, cfg);
  REQUIRE(!ada.trace.adaptations.empty());
  const int first_adapt_stage = ada.trace.adaptations.front().stage;
  for (int st = 0; st < first_adapt_stage; ++st)
    CHECK(uni.trace.sampled_indices[st] == ada.trace.sampled_indices[st]);
}

TEST_CASE("bench emits five scenarios and a consistent summary") {
  const fs::path dir = temp_dir();
  const fs::path prob = dir / "bench_prob.json";
  const fs::path cfg = dir / "bench_cfg.json";
  REQUIRE(run_cli("gen --n 2 --m 1 --horizon 5 --kappa 10 --seed 2 --out " + prob.string()) == 0);
  spit(cfg, config_text(", \"iteration_matching_divisor\": 5"));
  const std::string prefix = (dir / "bench").string();
  REQUIRE(harness::run_bench(prob.string(), cfg.string(), prefix) == 0);

  const std::vector<std::string> names = {"uniform", "poisson", "pareto", "adaptive", "ama"};
  const auto summary = harness::load_json(prefix + "_summary.json");
  REQUIRE(summary["scenarios"].size() == 5);
  for (std::size_t i = 0; i < names.size(); ++i) {
    const fs::path trace = prefix + "_" + names[i] + ".csv";
    REQUIRE(fs::exists(trace));
    CHECK(summary["scenarios"][i]["name"] == names[i]);

    // recompute the final-gap mean from the trace body
    std::stringstream in(slurp(trace));
    std::string line;
    std::getline(in, line);  // header
    std::map<long, double> final_gap;
    while (std::getline(in, line)) {
      std::stringstream ls(line);
      std::string cell;
      std::vector<std::string> cells;
      while (std::getline(ls, cell, ',')) cells.push_back(cell);
      final_gap[std::stol(cells[0])] = std::stod(cells[4]);
    }
    double mean = 0.0;
    for (const auto& [seed, gap] : final_gap) mean += gap;
    mean /= static_cast<double>(final_gap.size());
    CHECK(summary["scenarios"][i]["mean_final_obj_gap"].get<double>() ==
          Catch::Approx(mean).margin(1e-12));
  }
  // iteration matching: floor(12 * 10 / 5) = 24 synchronous iterations
  CHECK(summary["scenarios"][4]["iterations"].get<int>() == 24);
}

TEST_CASE("closed loop from the origin applies zero inputs") {
  auto sp = harness::gen_synthetic(2, 1, 4, 10.0, 21);
  sp.problem.x_init = {0.0, 0.0};
  harness::RunConfig rc;
  rc.solver = harness::SolverKind::svr_ama;
  rc.base.tau = 0.03;
  rc.base.T = 5;
  rc.base.s_bar = 5;
  rc.compute_reference = false;
  const auto run = harness::simulate_closed_loop(sp.problem, rc, 1, 6);
  CHECK(run.cumulative_cost == Catch::Approx(0.0).margin(1e-18));
  for (const auto& st : run.steps) CHECK(numerics::norm_inf(st.u_applied) < 1e-12);
}

TEST_CASE("oracle-in-the-loop reproduces the optimal closed-loop baseline") {
  const auto sp = harness::gen_synthetic(2, 1, 4, 2.0, 31);
  harness::RunConfig rc;
  rc.solver = harness::SolverKind::oracle;
  const auto run = harness::simulate_closed_loop(sp.problem, rc, 1, 8);
  CHECK(run.steps.size() == 8);
  // a long, certified randomized run lands at the same cumulative cost
  harness::RunConfig rc2;
  rc2.solver = harness::SolverKind::svr_ama;
  const model::SplitProblem s = model::time_split(sp.problem);
  rc2.base.tau = 0.5 / (4.0 * s.LgradF);
  rc2.base.T = 50;
  rc2.base.s_bar = 4000;
  rc2.compute_reference = false;
  const auto run2 = harness::simulate_closed_loop(sp.problem, rc2, 1, 8);
  CHECK(run2.cumulative_cost == Catch::Approx(run.cumulative_cost).epsilon(1e-4));
}

TEST_CASE("divergent closed loops are reported") {
  // an unstable scalar plant with almost no input authority and a token
  // budget cannot be stabilized
  const model::MpcProblem prob = model::build_problem(
      numerics::DenseMatrix(1, 1, {1.5}), numerics::DenseMatrix(1, 1, {1e-4}),
      numerics::DenseMatrix(1, 1, {1e-3}), numerics::DenseMatrix(1, 1, {0.0}), {1e6},
      numerics::DenseMatrix::identity(1), numerics::DenseMatrix::identity(1), 2, {1.0});
  harness::RunConfig rc;
  rc.solver = harness::SolverKind::ama;
  rc.base.tau = 1e-3;
  rc.base.s_bar = 2;
  rc.base.allow_uncertified_step = true;
  rc.compute_reference = false;
  rc.divergence_factor = 1e3;
  CHECK_THROWS_AS(harness::simulate_closed_loop(prob, rc, 1, 60), StateDiverged);
}

TEST_CASE("check-constants prints the certificate lines") {
  const fs::path dir = temp_dir();
  const fs::path prob = dir / "cc_prob.json";
  const fs::path cfg = dir / "cc_cfg.json";
  REQUIRE(run_cli("gen --n 1 --m 1 --horizon 2 --kappa 1 --seed 1 --out " + prob.string()) == 0);
  spit(cfg, config_text());
  const fs::path outtxt = dir / "cc.txt";
  const std::string cmd = std::string(DUALSPLIT_CLI_PATH) + " check-constants --problem " +
                          prob.string() + " --config " + cfg.string() + " > " + outtxt.string();
  REQUIRE(WEXITSTATUS(std::system(cmd.c_str())) == 0);
  const std::string text = slurp(outtxt);
  for (const char* key : {"sigma_f = ", "L_f = ", "L_grad_F = ", "L_star = ", "rho_thm1 = ",
                          "rho_thm2 = "})
    CHECK(text.find(key) != std::string::npos);
}
