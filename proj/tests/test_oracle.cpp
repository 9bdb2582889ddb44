#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "dualsplit/model/mpc_problem.hpp"
#include "dualsplit/model/time_split.hpp"
#include "dualsplit/oracle/reference_qp.hpp"
#include "dualsplit/sampling/rng.hpp"
#include "test_oracles.hpp"

using namespace dualsplit;
using model::MpcProblem;
using numerics::DenseMatrix;
using numerics::Vector;

namespace {

/// Stacked equality-constrained KKT solve over y = (y_0..y_N):
/// minimize 1/2 y' Qbar y  s.t.  H1 y_0 = x_init,  H1 y_{t+1} - H2 y_t = 0.
/// Solved densely with Gaussian elimination; independent of the oracle path.
Vector equality_kkt_solve(const MpcProblem& prob) {
  const std::size_t n = prob.n(), m = prob.m(), N = prob.N;
  const std::size_t ydim = n + m, ny = (N + 1) * ydim, nc = (N + 1) * n;
  DenseMatrix kkt(ny + nc, ny + nc);
  Vector rhs(ny + nc, 0.0);
  for (std::size_t t = 0; t <= N; ++t) {
    const DenseMatrix& Qw = (prob.terminal_weight && t == N) ? *prob.terminal_weight : prob.Q;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) kkt(t * ydim + i, t * ydim + j) = Qw(i, j);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) kkt(t * ydim + n + i, t * ydim + n + j) = prob.R(i, j);
  }
  // constraint rows: first the initial state, then the dynamics
  for (std::size_t i = 0; i < n; ++i) {
    kkt(ny + i, i) = 1.0;
    rhs[ny + i] = prob.x_init[i];
  }
  for (std::size_t t = 0; t < N; ++t)
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t r = ny + (t + 1) * n + i;
      kkt(r, (t + 1) * ydim + i) = 1.0;  // x_{t+1}
      for (std::size_t j = 0; j < n; ++j) kkt(r, t * ydim + j) -= prob.A(i, j);
      for (std::size_t j = 0; j < m; ++j) kkt(r, t * ydim + n + j) -= prob.B(i, j);
    }
  // symmetrize the KKT blocks
  for (std::size_t r = 0; r < nc; ++r)
    for (std::size_t c = 0; c < ny; ++c) kkt(c, ny + r) = kkt(ny + r, c);
  const Vector sol = testref::gauss_solve(kkt, rhs);
  return Vector(sol.begin(), sol.begin() + ny);
}

MpcProblem wide_bounds_problem(std::size_t n, std::size_t m, std::size_t N, sampling::Rng& rng,
                               double dscale, bool terminal = false) {
  DenseMatrix A = testref::random_matrix(n, n, rng, 0.6);
  DenseMatrix B = testref::random_matrix(n, m, rng, 0.6);
  DenseMatrix C(2 * n, n);
  DenseMatrix D(2 * n, m);
  Vector d(2 * n, dscale);
  for (std::size_t i = 0; i < n; ++i) {
    C(i, i) = 1.0;
    C(n + i, i) = -1.0;
  }
  DenseMatrix Q = testref::random_spd(n, rng);
  DenseMatrix R = testref::random_spd(m, rng);
  Vector x0 = testref::random_vector(n, rng, 1.0);
  std::optional<DenseMatrix> QN;
  if (terminal) QN = testref::random_spd(n, rng);
  return model::build_problem(A, B, C, D, d, Q, R, N, x0, QN);
}

}  // namespace

TEST_CASE("reference solve matches the dense KKT on inactive constraints") {
  sampling::Rng rng(17);
  for (int rep = 0; rep < 6; ++rep) {
    const MpcProblem prob = wide_bounds_problem(2, 1, 3, rng, 1e4, rep % 2 == 1);
    const auto sol = oracle::solve_reference(prob);
    const Vector expected = equality_kkt_solve(prob);
    const Vector got = sol.stacked_y();
    REQUIRE(got.size() == expected.size());
    for (std::size_t i = 0; i < got.size(); ++i)
      CHECK(got[i] == Catch::Approx(expected[i]).margin(1e-8));
    for (const auto& eta : sol.eta)
      for (double e : eta) CHECK(e >= -1e-8);
    CHECK(sol.kkt_residual <= 1e-8);
  }
}

TEST_CASE("origin-feasible zero start solves to zero") {
  sampling::Rng rng(19);
  MpcProblem prob = wide_bounds_problem(2, 2, 4, rng, 1.0);
  prob.x_init = {0.0, 0.0};
  const auto sol = oracle::solve_reference(prob);
  CHECK(sol.objective == Catch::Approx(0.0).margin(1e-10));
  for (const auto& y : sol.y_star)
    for (double v : y) CHECK(std::abs(v) < 1e-6);
}

TEST_CASE("reference solve matches brute-force active-set enumeration") {
  // n = m = 1, N = 2, box on the input: small enough to enumerate all
  // candidate active sets of the condensed problem.
  sampling::Rng rng(23);
  for (int rep = 0; rep < 8; ++rep) {
    const double a = rng.uniform(0.5, 1.4), b = rng.uniform(0.5, 1.0);
    const double umax = 0.4;
    MpcProblem prob = model::build_problem(
        DenseMatrix(1, 1, {a}), DenseMatrix(1, 1, {b}), DenseMatrix(1, 1, {0.0}),
        DenseMatrix(1, 1, {1.0}), {umax}, DenseMatrix(1, 1, {1.0}), DenseMatrix(1, 1, {0.1}), 2,
        {rng.uniform(0.8, 1.6)});
    // one-sided bound u <= umax plus its mirror -u <= umax
    DenseMatrix C(2, 1), D(2, 1);
    D(0, 0) = 1.0;
    D(1, 0) = -1.0;
    prob.C = C;
    prob.D = D;
    prob.d = {umax, umax};

    const auto sol = oracle::solve_reference(prob);

    // condensed data assembled with naive loops
    const std::size_t nu = 3;
    auto xs = [&](const Vector& u) {
      Vector x(4);
      x[0] = prob.x_init[0];
      for (int t = 0; t < 3; ++t) x[t + 1] = a * x[t] + b * u[t];
      return x;
    };
    auto objective = [&](const Vector& u) {
      const Vector x = xs(u);
      double acc = 0.0;
      for (int t = 0; t <= 2; ++t) acc += 0.5 * (x[t] * x[t] + 0.1 * u[t] * u[t]);
      return acc;
    };
    // enumerate active sets over the 6 constraint rows
    double best = 1e300;
    Vector best_u;
    for (int mask = 0; mask < 64; ++mask) {
      std::vector<int> active;
      for (int r = 0; r < 6; ++r)
        if (mask & (1 << r)) active.push_back(r);
      const std::size_t na = active.size();
      if (na > nu) continue;
      DenseMatrix kkt(nu + na, nu + na);
      Vector rhs(nu + na, 0.0);
      // gradient of the condensed objective via finite structure: P u + q
      // built numerically from the quadratic form
      for (std::size_t i = 0; i < nu; ++i) {
        Vector ei(nu, 0.0);
        ei[i] = 1.0;
        Vector zero(nu, 0.0);
        const double f0 = objective(zero);
        for (std::size_t j = 0; j < nu; ++j) {
          Vector ej(nu, 0.0);
          ej[j] = 1.0;
          Vector eij(nu, 0.0);
          eij[i] += 1.0;
          eij[j] += 1.0;
          kkt(i, j) = objective(eij) - objective(ei) - objective(ej) + f0;
        }
        rhs[i] = -(objective(ei) - f0 - 0.5 * kkt(i, i));
      }
      auto crow = [&](int r, std::size_t j) {  // row r of M: sign * u_{r/2 choosing stage}
        const int stage = r / 2;
        const double sign = (r % 2 == 0) ? 1.0 : -1.0;
        return (j == static_cast<std::size_t>(stage)) ? sign : 0.0;
      };
      for (std::size_t k = 0; k < na; ++k) {
        for (std::size_t j = 0; j < nu; ++j) {
          kkt(nu + k, j) = crow(active[k], j);
          kkt(j, nu + k) = crow(active[k], j);
        }
        rhs[nu + k] = umax;
      }
      Vector sol_as;
      bool ok = true;
      sol_as = testref::gauss_solve(kkt, rhs);
      if (!std::isfinite(sol_as[0])) ok = false;
      if (!ok) continue;
      const Vector u(sol_as.begin(), sol_as.begin() + nu);
      for (std::size_t k = 0; k < na && ok; ++k)
        if (sol_as[nu + k] < -1e-9) ok = false;  // multiplier sign
      for (int r = 0; r < 6 && ok; ++r) {
        double mu_r = 0.0;
        for (std::size_t j = 0; j < nu; ++j) mu_r += crow(r, j) * u[j];
        if (mu_r > umax + 1e-9) ok = false;
      }
      if (ok && objective(u) < best) {
        best = objective(u);
        best_u = u;
      }
    }
    REQUIRE(!best_u.empty());
    CHECK(sol.objective == Catch::Approx(best).margin(1e-8));
    for (int t = 0; t <= 2; ++t)
      CHECK(sol.y_star[t][1] == Catch::Approx(best_u[t]).margin(1e-7));
  }
}

TEST_CASE("suboptimality at the reference point is zero") {
  sampling::Rng rng(29);
  const MpcProblem prob = wide_bounds_problem(2, 1, 3, rng, 5.0);
  const auto sol = oracle::solve_reference(prob);
  model::PrimalVars vars;
  vars.y = sol.y_star;
  const auto sub = oracle::suboptimality(sol, vars, prob);
  CHECK(sub.obj_gap == Catch::Approx(0.0).margin(1e-12));
  CHECK(sub.primal_dist == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("a unit perturbation moves the squared distance by one") {
  sampling::Rng rng(31);
  const MpcProblem prob = wide_bounds_problem(2, 1, 3, rng, 5.0);
  const auto sol = oracle::solve_reference(prob);
  model::PrimalVars vars;
  vars.y = sol.y_star;
  vars.y[1][0] += 1.0;
  const auto sub = oracle::suboptimality(sol, vars, prob);
  CHECK(sub.primal_dist == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("suboptimality matches a scalar-loop recomputation") {
  sampling::Rng rng(37);
  const MpcProblem prob = wide_bounds_problem(2, 2, 3, rng, 5.0);
  const auto sol = oracle::solve_reference(prob);
  model::PrimalVars vars;
  vars.y = sol.y_star;
  for (auto& y : vars.y)
    for (double& x : y) x += rng.uniform(-0.5, 0.5);
  const auto sub = oracle::suboptimality(sol, vars, prob);
  double dist = 0.0;
  for (std::size_t t = 0; t < vars.y.size(); ++t)
    for (std::size_t i = 0; i < vars.y[t].size(); ++i) {
      const double diff = vars.y[t][i] - sol.y_star[t][i];
      dist += diff * diff;
    }
  CHECK(sub.primal_dist == Catch::Approx(dist).epsilon(1e-12));
  CHECK(sub.obj_gap ==
        Catch::Approx(model::primal_objective(prob, vars) - sol.objective).epsilon(1e-12));
}

TEST_CASE("infeasible state constraints are detected") {
  // a state-only constraint violated at the fixed initial state cannot be
  // repaired by any input
  MpcProblem prob = model::build_problem(
      DenseMatrix(1, 1, {1.0}), DenseMatrix(1, 1, {0.0}), DenseMatrix(1, 1, {1.0}),
      DenseMatrix(1, 1, {0.0}), {1.0}, DenseMatrix(1, 1, {1.0}), DenseMatrix(1, 1, {1.0}), 2,
      {2.0});
  CHECK_THROWS_AS(oracle::solve_reference(prob), Infeasible);
}
