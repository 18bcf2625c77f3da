// Copyright 2026 The mcrelax Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <cmath>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "mcrelax/sym_matrix.h"

namespace mcrelax {
namespace {

SymMatrix Random(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g(0.0, 1.0);
  SymMatrix m(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) m(i, j) = g(rng);
  }
  return m;
}

double Dist(const SymMatrix& a, const SymMatrix& b) { return FrobNorm(a - b); }

TEST_CASE("eigen examples") {
  auto e = EigSym(SymMatrix::Identity(3));
  for (int i = 0; i < 3; ++i) CHECK(e.values[i] == doctest::Approx(1.0));
  e = EigSym(SymMatrix::Diagonal({-3.0, 2.0}));
  CHECK(e.values[0] == doctest::Approx(-3.0));
  CHECK(e.values[1] == doctest::Approx(2.0));
  SymMatrix swap(2);
  swap(0, 1) = 1.0;
  e = EigSym(swap);
  CHECK(e.values[0] == doctest::Approx(-1.0));
  CHECK(e.values[1] == doctest::Approx(1.0));
  const double r = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(e.vectors(0, 1)) == doctest::Approx(r));
  CHECK(e.vectors(0, 1) * e.vectors(1, 1) > 0.0);  // (1, 1)/sqrt2 for +1
  CHECK(e.vectors(0, 0) * e.vectors(1, 0) < 0.0);  // (1, -1)/sqrt2 for -1

  SymMatrix bad(2);
  bad(0, 0) = std::nan("");
  CHECK_THROWS_AS(EigSym(bad), std::invalid_argument);
  CHECK_THROWS_AS(ProjPsd(bad), std::invalid_argument);
}

TEST_CASE("eigen reconstruction and orthogonality") {
  std::mt19937_64 rng(1);
  for (int n : {1, 2, 5, 19, 40}) {
    const SymMatrix m = Random(rng, n);
    const auto e = EigSym(m);
    const Eigen::MatrixXd rec = e.vectors * e.values.asDiagonal() * e.vectors.transpose();
    CHECK((rec - m.ToDense()).norm() <= 1e-10 * (1.0 + FrobNorm(m)));
    CHECK((e.vectors.transpose() * e.vectors - Eigen::MatrixXd::Identity(n, n)).norm() <= 1e-10);
    for (int i = 1; i < n; ++i) CHECK(e.values[i - 1] <= e.values[i]);
  }
}

TEST_CASE("psd projection examples") {
  const SymMatrix p = ProjPsd(SymMatrix::Diagonal({2.0, -3.0}));
  CHECK(Dist(p, SymMatrix::Diagonal({2.0, 0.0})) <= 1e-12);
  SymMatrix swap(2);
  swap(0, 1) = 1.0;
  const SymMatrix q = ProjPsd(swap);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) CHECK(q(i, j) == doctest::Approx(0.5));
  }
  std::mt19937_64 rng(2);
  const SymMatrix a = Random(rng, 6);
  SymMatrix psd = ProjPsd(a);
  CHECK(Dist(ProjPsd(psd), psd) <= 1e-10);
}

TEST_CASE("moreau decomposition and nonexpansiveness") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 2 + trial % 12;
    const SymMatrix m = Random(rng, n);
    const SymMatrix plus = ProjPsd(m);
    const SymMatrix minus = ProjPsd(-1.0 * m);
    CHECK(Dist(plus - minus, m) <= 1e-10 * (1.0 + FrobNorm(m)));
    CHECK(std::abs(Frob(plus, minus)) <= 1e-8 * Frob(m, m));
    CHECK(MinEigenvalue(plus) >= -1e-10);
    // Distance optimality against random PSD points.
    for (int k = 0; k < 5; ++k) {
      const SymMatrix other = ProjPsd(Random(rng, n));
      CHECK(Dist(m, plus) <= Dist(m, other) + 1e-12);
    }
    const SymMatrix m2 = Random(rng, n);
    CHECK(Dist(ProjPsd(m), ProjPsd(m2)) <= Dist(m, m2) + 1e-12);
  }
}

TEST_CASE("frobenius inner product") {
  CHECK(Frob(SymMatrix::Identity(2), SymMatrix::Identity(2)) == 2.0);
  CHECK(Frob(SymMatrix::Diagonal({1.0, 2.0}), SymMatrix::Diagonal({3.0, 4.0})) == 11.0);
  CHECK(FrobNorm(SymMatrix(4)) == 0.0);
  std::mt19937_64 rng(4);
  const SymMatrix a = Random(rng, 5), b = Random(rng, 5), c = Random(rng, 5);
  CHECK(Frob(a, a) == doctest::Approx(FrobNorm(a) * FrobNorm(a)));
  CHECK(Frob(a, b) == doctest::Approx(Frob(b, a)));
  CHECK(Frob(a + 2.0 * b, c) == doctest::Approx(Frob(a, c) + 2.0 * Frob(b, c)));
  CHECK(Frob(a, b) == doctest::Approx((a.ToDense().transpose() * b.ToDense()).trace()));
  CHECK_THROWS_AS(Frob(SymMatrix(2), SymMatrix(3)), std::invalid_argument);
}

}  // namespace
}  // namespace mcrelax
