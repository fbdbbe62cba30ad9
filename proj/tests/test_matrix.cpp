// Copyright 2026 The PCM Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <catch2/catch_amalgamated.hpp>

#include "pcm/errors.hpp"
#include "pcm/matrix.hpp"
#include "pcm/rng.hpp"

using pcm::Matrix;
using pcm::Vector;

TEST_CASE("matrix shape, access and transpose", "[matrix]") {
  Matrix a{{1.0, 2.0, 3.0}, {4.0, 5.0, 6.0}};
  REQUIRE(a.rows() == 2);
  REQUIRE(a.cols() == 3);
  REQUIRE(a(0, 2) == 3.0);
  REQUIRE(a(1, 0) == 4.0);

  const Matrix t = a.transposed();
  REQUIRE(t.rows() == 3);
  REQUIRE(t.cols() == 2);
  REQUIRE(t(2, 1) == 6.0);

  const Matrix id = Matrix::identity(3);
  REQUIRE(id(0, 0) == 1.0);
  REQUIRE(id(0, 1) == 0.0);
}

TEST_CASE("matrix product and matvec agree with hand values", "[matrix]") {
  const Matrix a{{1.0, 2.0}, {3.0, 4.0}};
  const Matrix b{{5.0, 6.0}, {7.0, 8.0}};
  const Matrix c = a * b;
  REQUIRE(c(0, 0) == 19.0);
  REQUIRE(c(0, 1) == 22.0);
  REQUIRE(c(1, 0) == 43.0);
  REQUIRE(c(1, 1) == 50.0);

  const Vector x{1.0, -1.0};
  const Vector y = pcm::matvec(a, x);
  REQUIRE(y[0] == -1.0);
  REQUIRE(y[1] == -1.0);
  const Vector yt = pcm::matvec_transposed(a, x);
  REQUIRE(yt[0] == -2.0);
  REQUIRE(yt[1] == -2.0);

  REQUIRE_THROWS_AS(pcm::matvec(a, Vector{1.0, 2.0, 3.0}), pcm::ContractError);
}

TEST_CASE("vector norms and dot products", "[matrix]") {
  const Vector v{1.0, -2.0, 3.0};
  REQUIRE(pcm::norm_l1(v) == 6.0);
  REQUIRE(pcm::norm_linf(v) == 3.0);
  REQUIRE_THAT(pcm::norm_l2(v), Catch::Matchers::WithinAbs(std::sqrt(14.0), 1e-15));
  REQUIRE(pcm::dot(v, Vector{1.0, 1.0, 1.0}) == 2.0);
  REQUIRE_THAT(pcm::frobenius_norm(Matrix{{3.0, 0.0}, {0.0, 4.0}}),
               Catch::Matchers::WithinAbs(5.0, 1e-15));
}

TEST_CASE("all_finite rejects NaN and infinity", "[matrix]") {
  REQUIRE(pcm::all_finite(Vector{0.0, 1.0}));
  REQUIRE_FALSE(pcm::all_finite(Vector{0.0, std::numeric_limits<double>::quiet_NaN()}));
  REQUIRE_FALSE(pcm::all_finite(Vector{std::numeric_limits<double>::infinity()}));
}

TEST_CASE("LU factorization solves dense systems", "[matrix]") {
  // Fixed well-conditioned system, checked by residual.
  const Matrix a{{4.0, -2.0, 1.0}, {-2.0, 4.0, -2.0}, {1.0, -2.0, 4.0}};
  const Vector b{1.0, -3.0, 2.0};
  const pcm::LuFactorization lu(a);
  const Vector x = lu.solve(b);
  const Vector ax = pcm::matvec(a, x);
  for (std::size_t i = 0; i < 3; ++i)
    REQUIRE_THAT(ax[i], Catch::Matchers::WithinAbs(b[i], 1e-12));

  const Vector xt = lu.solve_transposed(b);
  const Vector atx = pcm::matvec(a.transposed(), xt);
  for (std::size_t i = 0; i < 3; ++i)
    REQUIRE_THAT(atx[i], Catch::Matchers::WithinAbs(b[i], 1e-12));
}

TEST_CASE("LU rejects singular matrices", "[matrix]") {
  const Matrix a{{1.0, 2.0}, {2.0, 4.0}};
  REQUIRE_THROWS_AS(pcm::LuFactorization(a), pcm::NumericalError);
}

TEST_CASE("LU handles permutation-heavy input", "[matrix]") {
  // Zero on the first diagonal entry forces pivoting.
  const Matrix a{{0.0, 1.0}, {1.0, 0.0}};
  const Vector x = pcm::LuFactorization(a).solve(Vector{2.0, 3.0});
  REQUIRE_THAT(x[0], Catch::Matchers::WithinAbs(3.0, 1e-15));
  REQUIRE_THAT(x[1], Catch::Matchers::WithinAbs(2.0, 1e-15));
}

TEST_CASE("Cholesky solves SPD systems and rejects indefinite ones", "[matrix]") {
  const Matrix spd{{4.0, 1.0, 0.0}, {1.0, 3.0, -1.0}, {0.0, -1.0, 2.0}};
  const Vector b{1.0, 2.0, 3.0};
  const Vector x = pcm::CholeskyFactorization(spd).solve(b);
  const Vector ax = pcm::matvec(spd, x);
  for (std::size_t i = 0; i < 3; ++i)
    REQUIRE_THAT(ax[i], Catch::Matchers::WithinAbs(b[i], 1e-12));

  const Matrix indefinite{{1.0, 2.0}, {2.0, 1.0}};
  REQUIRE_THROWS_AS(pcm::CholeskyFactorization(indefinite), pcm::NumericalError);
}

TEST_CASE("random systems solve to small residuals", "[matrix]") {
  pcm::Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(rng.next_u64() % 8);
    Matrix a(n, n);
    Vector b(n);
    for (std::size_t i = 0; i < n; ++i) {
      b[i] = rng.next_normal();
      for (std::size_t j = 0; j < n; ++j) a(i, j) = rng.next_normal();
    }
    Vector x;
    try {
      x = pcm::LuFactorization(a).solve(b);
    } catch (const pcm::NumericalError&) {
      continue;  // nearly singular draw
    }
    Vector r = pcm::matvec(a, x);
    for (std::size_t i = 0; i < n; ++i) r[i] -= b[i];
    REQUIRE(pcm::norm_linf(r) <= 1e-9 * std::max(1.0, pcm::norm_linf(b)));
  }
}
