// Copyright 2026 The mechcat Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mechcat/banded.hpp"
#include "test_support.hpp"

using namespace mechcat;
using namespace mechcat::testing;

namespace {

Matrix banded_random(Index n, std::initializer_list<Index> offsets, std::mt19937_64& rng) {
  const Matrix full = random_matrix(n, rng);
  Matrix m = Matrix::Zero(n, n);
  for (Index k : offsets)
    for (Index i = 0; i < n; ++i)
      if (i + k >= 0 && i + k < n) m(i, i + k) = full(i, i + k);
  return m;
}

}  // namespace

TEST_CASE("dense round trip and arithmetic match dense algebra") {
  std::mt19937_64 rng(7);
  const Matrix a = banded_random(9, {-2, 0, 1}, rng);
  const Matrix b = banded_random(9, {-1, 2}, rng);
  const BandedOperator A = BandedOperator::from_dense(a), B = BandedOperator::from_dense(b);
  CHECK((A.to_dense() - a).norm() == 0.0);
  CHECK((A.adjoint().to_dense() - a.adjoint()).norm() < 1e-15);
  CHECK(((A * B).to_dense() - a * b).norm() < 1e-12);
  BandedOperator C = A;
  C += B;
  CHECK((C.to_dense() - (a + b)).norm() < 1e-14);
  C *= cplx(0.0, 2.0);
  CHECK((C.to_dense() - cplx(0.0, 2.0) * (a + b)).norm() < 1e-13);
  CHECK(A.norm_bound() >= a.jacobiSvd().singularValues()(0) * (1 - 1e-12));
}

TEST_CASE("left and right multiply-add agree with dense products") {
  std::mt19937_64 rng(8);
  const Matrix a = banded_random(8, {-3, -1, 0, 2}, rng);
  const Matrix x = random_matrix(8, rng);
  const BandedOperator A = BandedOperator::from_dense(a);
  Matrix out = Matrix::Zero(8, 8);
  A.left_multiply_add(x, out, 0.5);
  CHECK((out - 0.5 * a * x).norm() < 1e-13);
  out.setZero();
  A.right_multiply_add(x, out, cplx(0, 1));
  CHECK((out - cplx(0, 1) * x * a).norm() < 1e-13);
}

TEST_CASE("property: banded Lindblad generator equals the dense reference") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 15; ++trial) {
    const Index n = 4 + trial % 6;
    const Matrix h0 = banded_random(n, {0}, rng);
    const Matrix h1 = banded_random(n, {-1, 1}, rng);
    const Matrix h0h = 0.5 * (h0 + h0.adjoint());
    BandedSum sum(n);
    sum.add(h0h, cplx(1.3));
    const double w = 0.7;
    // h1 e^{i w t} + h1^dagger e^{-i w t} stays Hermitian.
    sum.add(h1, [w](double t) { return std::polar(1.0, w * t); }, 1.0);
    sum.add(Matrix(h1.adjoint()), [w](double t) { return std::polar(1.0, -w * t); }, 1.0);
    const Matrix l1 = banded_random(n, {-1}, rng), l2 = banded_random(n, {-2, 0}, rng);
    std::vector<BandedJump> jumps{{0.4, BandedOperator::from_dense(l1)},
                                  {0.0, BandedOperator::from_dense(l2)},
                                  {1.1, BandedOperator::from_dense(l2)}};
    BandedLindblad gen(sum, jumps);
    const double t = 0.37 * trial;
    const Matrix rho = random_density(n, rng);
    Matrix out;
    gen.apply(t, rho, out);
    const Matrix h = 1.3 * h0h + std::polar(1.0, w * t) * h1 + std::polar(1.0, -w * t) * Matrix(h1.adjoint());
    std::vector<DissipatorSpec> d{{0.4, l1}, {1.1, l2}};
    const Matrix ref = lindblad_rhs(h, d, rho);
    CHECK((out - ref).norm() < 1e-12 * ref.norm());
    CHECK((out - out.adjoint()).norm() == 0.0);
  }
}

TEST_CASE("RK4 reproduces exponential decay to fourth order") {
  // Scalar y' = -y embedded as 1x1 matrix.
  auto run = [](int steps) {
    Rk4Stepper s([](double, const Matrix& y, Matrix& out) { out = -y; });
    Matrix y = Matrix::Ones(1, 1);
    const double dt = 1.0 / steps;
    for (int k = 0; k < steps; ++k) s.step(k * dt, dt, y);
    return std::abs(y(0, 0).real() - std::exp(-1.0));
  };
  const double e1 = run(10), e2 = run(20);
  CHECK(e1 / e2 > 14.0);
  CHECK(e1 / e2 < 18.0);
}
