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

#include "mechcat/operator_core.hpp"
#include "test_support.hpp"

using namespace mechcat;
using namespace mechcat::testing;

TEST_CASE("ladder operators act on Fock states") {
  const Index n = 6;
  const Matrix a = fock_destroy(n);
  for (Index k = 1; k < n; ++k) {
    const Eigen::VectorXcd v = a * fock_ket(n, k);
    CHECK(std::abs(v(k - 1) - std::sqrt(double(k))) < 1e-15);
    CHECK(std::abs(v.norm() - std::sqrt(double(k))) < 1e-15);
  }
  CHECK((fock_create(n) - Matrix(a.adjoint())).norm() == 0.0);
  CHECK((number_operator(n) - Matrix(a.adjoint() * a)).norm() < 1e-14);
}

TEST_CASE("commutator on a 4-level truncation is diag(1, 1, 1, -3)") {
  const Matrix a = fock_destroy(4);
  const Matrix c = a * a.adjoint() - a.adjoint() * a;
  const double expect[] = {1, 1, 1, -3};
  for (Index i = 0; i < 4; ++i) CHECK(std::abs(c(i, i) - expect[i]) < 1e-14);
  CHECK((c - Matrix(c.diagonal().asDiagonal())).norm() < 1e-15);
}

TEST_CASE("Pauli conventions: sigma_z = diag(1, -1), sigma_- lowers e to g") {
  const Matrix sz = pauli(PauliAxis::z);
  CHECK(sz(0, 0) == cplx(1.0));
  CHECK(sz(1, 1) == cplx(-1.0));
  const Matrix sm = pauli(PauliAxis::minus);
  CHECK(sm(1, 0) == cplx(1.0));
  CHECK(sm(0, 1) == cplx(0.0));
  const Matrix sx = pauli(PauliAxis::x), sy = pauli(PauliAxis::y);
  CHECK((sx * sy - sy * sx - 2.0 * kI * sz).norm() < 1e-15);
}

TEST_CASE("kron dimension and capacity limit") {
  const Matrix k = kron(pauli(PauliAxis::x), fock_destroy(5));
  CHECK(k.rows() == 10);
  CHECK(std::abs(k(0, 5 + 0)) == 0.0);
  CHECK(std::abs(k(1, 5 + 2) - std::sqrt(2.0)) < 1e-15);  // |e,1><g,2| sqrt(2)
  CHECK_THROWS_AS(kron(Matrix::Identity(100, 100), Matrix::Identity(100, 100), 4096),
                  CapacityError);
}

TEST_CASE("partial trace of a product state returns the mechanical factor") {
  std::mt19937_64 rng(1);
  const Matrix q = random_density(2, rng);
  const Matrix m = random_density(7, rng);
  const Matrix r = partial_trace_qubit(Matrix(kron(q, m)), 7);
  CHECK((r - m).norm() < 1e-14);
  CHECK_THROWS_AS(partial_trace_qubit(Matrix::Identity(5, 5), 3), ShapeError);
}

TEST_CASE("density matrix contract") {
  Matrix bad = Matrix::Zero(2, 2);
  bad(0, 0) = 1.0;
  bad(0, 1) = 0.5;
  CHECK_THROWS_AS(DensityMatrix{bad}, InvalidState);  // not Hermitian

  Matrix trace2 = Matrix::Identity(2, 2);
  CHECK_THROWS_AS(DensityMatrix{trace2}, InvalidState);

  Matrix negative = Matrix::Zero(2, 2);
  negative(0, 0) = 1.5;
  negative(1, 1) = -0.5;
  CHECK_THROWS_AS(DensityMatrix{negative}, InvalidState);

  std::mt19937_64 rng(2);
  const DensityMatrix ok(random_density(5, rng));
  CHECK(ok.diagnostics().trace_error < 1e-14);
  CHECK((ok.matrix() - ok.matrix().adjoint()).norm() == 0.0);
}

TEST_CASE("coherent, cat and thermal states") {
  const Index n = 40;
  const cplx alpha(1.0, -0.5);
  const Eigen::VectorXcd c = coherent_ket(n, alpha);
  CHECK(std::abs(c.norm() - 1.0) < 1e-14);
  const cplx mean_a = c.dot(fock_destroy(n) * c);
  CHECK(std::abs(mean_a - alpha) < 1e-10);

  const Matrix P = parity_operator(n);
  const Eigen::VectorXcd even = cat_ket(n, 2.0, +1), odd = cat_ket(n, 2.0, -1);
  CHECK(std::abs(even.dot(P * even) - 1.0) < 1e-12);
  CHECK(std::abs(odd.dot(P * odd) + 1.0) < 1e-12);

  const DensityMatrix th = thermal_state(n, 0.7);
  CHECK(std::abs((th.matrix() * number_operator(n)).trace().real() - 0.7) < 1e-8);
}

TEST_CASE("dense Lindblad right-hand side: amplitude damping of a two-level system") {
  const Matrix h = Matrix::Zero(2, 2);
  std::vector<DissipatorSpec> d{{2.0, pauli(PauliAxis::minus)}};
  Matrix rho = Matrix::Zero(2, 2);
  rho(0, 0) = 1.0;
  const Matrix out = lindblad_rhs(h, d, rho);
  CHECK(std::abs(out(0, 0) + 2.0) < 1e-15);
  CHECK(std::abs(out(1, 1) - 2.0) < 1e-15);
  std::vector<DissipatorSpec> neg{{-1.0, pauli(PauliAxis::minus)}};
  CHECK_THROWS_AS(lindblad_rhs(h, neg, rho), InvalidDissipator);
}

TEST_CASE("property: Lindblad output is traceless and Hermitian for random inputs") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = 3 + trial % 5;
    const Matrix h = random_hermitian(n, rng);
    std::vector<DissipatorSpec> d{{0.7, random_matrix(n, rng)}, {0.2, random_matrix(n, rng)}};
    const Matrix rho = random_density(n, rng);
    const Matrix out = lindblad_rhs(h, d, rho);
    CHECK(std::abs(out.trace()) < 1e-12 * out.norm());
    CHECK((out - out.adjoint()).norm() < 1e-12 * out.norm());
  }
}

TEST_CASE("truncation requirement") {
  CHECK_THROWS_AS(require_truncation(1), InvalidTruncation);
  CHECK_NOTHROW(require_truncation(2));
  CHECK_THROWS_AS(fock_destroy(0), InvalidTruncation);
}
