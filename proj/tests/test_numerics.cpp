#include <catch2/catch_amalgamated.hpp>

#include "dualsplit/numerics/cholesky.hpp"
#include "dualsplit/numerics/dense.hpp"
#include "dualsplit/numerics/errors.hpp"
#include "dualsplit/numerics/spectral.hpp"
#include "dualsplit/sampling/rng.hpp"
#include "test_oracles.hpp"

using namespace dualsplit;
using numerics::DenseMatrix;
using numerics::Vector;

TEST_CASE("cholesky of the identity is the identity") {
  const auto f = numerics::cholesky(DenseMatrix::identity(3));
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      CHECK(f.lower()(i, j) == Catch::Approx(i == j ? 1.0 : 0.0).margin(1e-15));
}

TEST_CASE("cholesky of a diagonal matrix takes square roots") {
  const auto f = numerics::cholesky(DenseMatrix::diagonal({4.0, 9.0}));
  CHECK(f.lower()(0, 0) == Catch::Approx(2.0));
  CHECK(f.lower()(1, 1) == Catch::Approx(3.0));
  CHECK(f.lower()(1, 0) == 0.0);
}

TEST_CASE("cholesky reconstructs random SPD matrices") {
  sampling::Rng rng(42);
  for (int rep = 0; rep < 50; ++rep) {
    const DenseMatrix m = testref::random_spd(5, rng);
    const auto f = numerics::cholesky(m);
    const DenseMatrix r = f.reconstruct();
    double err = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t j = 0; j < 5; ++j) {
        err += (r(i, j) - m(i, j)) * (r(i, j) - m(i, j));
        scale += m(i, j) * m(i, j);
      }
    CHECK(std::sqrt(err / scale) < 1e-10);
  }
}

TEST_CASE("cholesky solve hits 1e-9 relative residual") {
  sampling::Rng rng(7);
  for (int rep = 0; rep < 20; ++rep) {
    const DenseMatrix m = testref::random_spd(6, rng);
    const Vector b = testref::random_vector(6, rng);
    const Vector x = numerics::cholesky(m).solve(b);
    const Vector res = numerics::sub(numerics::matvec(m, x), b);
    CHECK(numerics::norm2(res) <= 1e-9 * std::max(1.0, numerics::norm2(b)));
  }
}

TEST_CASE("cholesky rejects indefinite and asymmetric input") {
  DenseMatrix m = DenseMatrix::diagonal({1.0, -2.0});
  CHECK_THROWS_AS(numerics::cholesky(m), NotPositiveDefinite);
  DenseMatrix sing = DenseMatrix(2, 2, {1.0, 1.0, 1.0, 1.0});
  CHECK_THROWS_AS(numerics::cholesky(sing), NotPositiveDefinite);
  DenseMatrix asym = DenseMatrix(2, 2, {1.0, 0.5, -0.5, 1.0});
  CHECK_THROWS_AS(numerics::cholesky(asym), InvalidParameter);
}

TEST_CASE("extreme singular values on identity and diagonals") {
  const auto id = numerics::extreme_singular_values(DenseMatrix::identity(4));
  CHECK(id.sv_max == Catch::Approx(1.0));
  CHECK(id.sv_min == Catch::Approx(1.0));

  // values are eigenvalues of M'M: diag(3, 0.5) -> (9, 0.25)
  const auto dg = numerics::extreme_singular_values(DenseMatrix::diagonal({3.0, 0.5}));
  CHECK(dg.sv_max == Catch::Approx(9.0).epsilon(1e-10));
  CHECK(dg.sv_min == Catch::Approx(0.25).epsilon(1e-10));
}

TEST_CASE("extreme singular values match a Jacobi eigensweep") {
  sampling::Rng rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    const DenseMatrix m = testref::random_matrix(4, 6, rng);
    const auto ext = numerics::extreme_singular_values(m);
    const auto ev = testref::jacobi_eigenvalues(numerics::gram(m));
    CHECK(ext.sv_max == Catch::Approx(ev.back()).epsilon(1e-6));
    CHECK(ext.sv_min == Catch::Approx(std::max(0.0, ev.front())).margin(1e-6));
  }
}

TEST_CASE("diagonal gram extremes are exact") {
  const auto ext = numerics::extreme_singular_values(DenseMatrix::diagonal({2.0, 5.0, 0.7}));
  CHECK(std::abs(ext.sv_max - 25.0) < 1e-10 * 25.0);
  CHECK(std::abs(ext.sv_min - 0.49) < 1e-10);
}

TEST_CASE("spectral estimate surfaces NoConvergence at a tiny iteration cap") {
  numerics::NumericsOptions opts;
  opts.spectral_max_iter = 2;
  sampling::Rng rng(11);
  const DenseMatrix m = testref::random_matrix(5, 5, rng);
  CHECK_THROWS_AS(numerics::extreme_singular_values(m, opts), NoConvergence);
}

TEST_CASE("zero matrices are rejected") {
  CHECK_THROWS_AS(numerics::extreme_singular_values(DenseMatrix(3, 3)), InvalidParameter);
}

TEST_CASE("project_nonneg clamps componentwise") {
  CHECK(numerics::project_nonneg({-1.0, 2.0, 0.0}) == Vector{0.0, 2.0, 0.0});
  CHECK(numerics::project_nonneg({-3.0, -0.5}) == Vector{0.0, 0.0});
}

TEST_CASE("project_nonneg equals the scalar loop, is idempotent and nonexpansive") {
  sampling::Rng rng(5);
  for (int rep = 0; rep < 200; ++rep) {
    const Vector x = testref::random_vector(8, rng, 3.0);
    const Vector y = testref::random_vector(8, rng, 3.0);
    const Vector px = numerics::project_nonneg(x);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(px[i] == std::max(x[i], 0.0));
    CHECK(numerics::project_nonneg(px) == px);
    const Vector py = numerics::project_nonneg(y);
    CHECK(numerics::norm2(numerics::sub(px, py)) <=
          numerics::norm2(numerics::sub(x, y)) + 1e-15);
  }
}
