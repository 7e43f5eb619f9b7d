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

// Randomized invariants that cut across modules.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "mechcat/effective_model.hpp"
#include "mechcat/full_model.hpp"
#include "mechcat/harness.hpp"
#include "mechcat/observables.hpp"
#include "test_support.hpp"

using namespace mechcat;
using namespace mechcat::testing;

namespace {

SystemParams random_scaled_point(std::mt19937_64& rng, Index n_trunc) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SystemParams p;
  p.omega_m = kTwoPi * 10e6;
  p.omega_d = 2.0 * p.omega_m;
  p.kappa = p.omega_m * (5e-4 + 2e-3 * u(rng));
  p.omega_q = p.omega_d + (u(rng) - 0.5) * 2.0 * p.kappa;
  p.g_z = p.omega_m * (0.03 + 0.05 * u(rng));
  p.g_x = 0.1 * p.g_z;
  p.Omega = 2.0 * (1.0 + 3.0 * u(rng)) * p.g_x * p.g_z / p.omega_m;
  p.gamma = p.kappa * 1e-3 * u(rng);
  p.n_th = u(rng);
  p.gamma_phi = 0.2 * p.kappa * u(rng);
  p.n_trunc = n_trunc;
  return p;
}

}  // namespace

TEST_CASE("property: partial trace is linear") {
  std::mt19937_64 rng(1);
  for (int k = 0; k < 20; ++k) {
    const Index n = 2 + k % 7;
    const Matrix r1 = random_density(2 * n, rng), r2 = random_density(2 * n, rng);
    const cplx a(0.3, -0.2), b(1.7, 0.4);
    const Matrix lhs = partial_trace_qubit(Matrix(a * r1 + b * r2), n);
    const Matrix rhs = a * partial_trace_qubit(r1, n) + b * partial_trace_qubit(r2, n);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("property: [a, a^dag] differs from identity only in the last diagonal entry") {
  for (Index n = 2; n <= 40; ++n) {
    const Matrix a = fock_destroy(n);
    Matrix d = a * a.adjoint() - a.adjoint() * a - Matrix::Identity(n, n);
    CHECK(std::abs(d(n - 1, n - 1) + double(n)) < 1e-12);
    d(n - 1, n - 1) = 0.0;
    CHECK(d.cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("property: quartic identities away from the two top Fock levels") {
  for (Index n : {5, 12, 30}) {
    const Matrix a = fock_destroy(n), ad = a.adjoint(), num = ad * a;
    const Matrix id = Matrix::Identity(n, n);
    CHECK((ad * ad * a * a - (num * num - num)).cwiseAbs().maxCoeff() < 1e-10);
    const Matrix d = a * a * ad * ad - (num * num + 3.0 * num + 2.0 * id);
    CHECK(d.topLeftCorner(n - 2, n - 2).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(d.bottomRightCorner(2, 2).cwiseAbs().maxCoeff() > 1.0);
  }
}

TEST_CASE("property: induced rates are non-negative and chi peaks at zero drive detuning") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  SystemParams p = reference_params();
  for (int k = 0; k < 200; ++k) {
    SystemParams q = p;
    q.kappa = p.kappa * std::pow(10.0, 2.0 * u(rng));
    q.omega_q = p.omega_q * (1.0 + 0.5 * u(rng));
    q.gamma_phi = q.kappa * std::abs(u(rng));
    const EffectiveParams e = effective_params(q);
    CHECK(e.Gamma1_minus >= 0.0);
    CHECK(e.Gamma1_plus >= 0.0);
    CHECK(e.Gamma2_minus >= 0.0);
    CHECK(e.Gamma2_plus >= 0.0);
  }
  const double peak = std::abs(effective_params(p).chi);
  const EffectiveParams e0 = effective_params(p);
  CHECK(rel_diff(peak, 2.0 * e0.eps * e0.g / p.kappa) < 1e-12);
  for (double d : {-2.0, -1.0, -0.3, -0.01, 0.01, 0.3, 1.0, 2.0}) {
    SystemParams q = p;
    q.omega_q = p.omega_d + d * p.kappa;
    CHECK(std::abs(effective_params(q).chi) < peak);
  }
}

TEST_CASE("property: effective Liouvillian is dissipative") {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 6; ++k) {
    SystemParams p = random_scaled_point(rng, 8 + k);
    const Matrix l = build_effective_liouvillian(effective_params(p), p, k % 2 == 0);
    Eigen::ComplexEigenSolver<Matrix> es(l, false);
    const double scale = es.eigenvalues().cwiseAbs().maxCoeff();
    CHECK(es.eigenvalues().real().maxCoeff() <= 1e-10 * scale);
  }
}

TEST_CASE("property: conservation on random full and effective runs") {
  std::mt19937_64 rng(2027);
  for (int k = 0; k < 3; ++k) {
    const SystemParams p = random_scaled_point(rng, 8);
    const Frame frame = k == 0 ? Frame::lab : (k == 1 ? Frame::mech_rot : Frame::double_rot);
    PropagationOptions o;
    o.record_every = 500;
    const DensityMatrix start(kron(Matrix(DensityMatrix::pure(fock_ket(2, 1)).matrix()),
                                   thermal_state(8, 0.3).matrix()));
    const auto rec = propagate_full(p, start, 0.5 / p.kappa, frame, o);
    CHECK(rec.conservation.samples == rec.size());
    CHECK(rec.conservation.within(1e-8, 1e-9, -1e-7));

    const EffectiveParams e = effective_params(p);
    const auto eff = propagate_effective(e, p, DensityMatrix::pure(coherent_ket(8, 0.8)),
                                         2.0 / e.Gamma2_minus);
    CHECK(eff.conservation.within(1e-8, 1e-9, -1e-7));
  }
}

TEST_CASE("property: fidelity bounds and symmetry over mixed-rank pairs") {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 30; ++k) {
    const Index n = 3 + k % 6;
    Matrix a = random_density(n, rng);
    if (k % 3 == 0) a = DensityMatrix::pure(coherent_ket(n, cplx(0.2 * k / 30.0, 0.1))).matrix();
    const Matrix b = random_density(n, rng);
    const double f = uhlmann_fidelity(a, b);
    CHECK(f >= 0.0);
    CHECK(f <= 1.0 + 1e-9);
    CHECK(std::abs(f - uhlmann_fidelity(b, a)) < 1e-9);
    CHECK(std::abs(uhlmann_fidelity(a, a) - 1.0) < 1e-10);
  }
}

TEST_CASE("property: dimensionless observables are invariant under rescaling every rate") {
  std::mt19937_64 rng(4);
  SystemParams p = random_scaled_point(rng, 10);
  p.gamma = 0.0;
  p.n_th = 0.0;
  SystemParams q = p;
  for (double* r : {&q.omega_m, &q.omega_q, &q.omega_d, &q.g_x, &q.g_z, &q.Omega, &q.kappa,
                    &q.gamma_phi})
    *r *= 10.0;
  const EffectiveParams ep = effective_params(p), eq = effective_params(q);
  CHECK(rel_diff(eq.Gamma2_minus, 10.0 * ep.Gamma2_minus) < 1e-12);
  CHECK(rel_diff(std::abs(eq.chi), 10.0 * std::abs(ep.chi)) < 1e-12);

  const DensityMatrix start(kron(Matrix(DensityMatrix::pure(fock_ket(2, 1)).matrix()),
                                 Matrix(DensityMatrix::pure(fock_ket(10, 0)).matrix())));
  PropagationOptions o;
  o.record_every = 100;
  const auto a = propagate_full(p, start, 0.3 / p.kappa, Frame::mech_rot, o);
  const auto b = propagate_full(q, start, 0.3 / q.kappa, Frame::mech_rot, o);
  REQUIRE(a.size() == b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(std::abs(a.at("mean_phonon")[k] - b.at("mean_phonon")[k]) < 1e-9);
    CHECK(std::abs(a.kappa_t()[k] - b.kappa_t()[k]) < 1e-12);
  }
}
