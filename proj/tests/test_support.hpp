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

#pragma once

#include <cmath>
#include <random>

#include "mechcat/operator_core.hpp"

namespace mechcat::testing {

inline constexpr double kTwoPi = 2.0 * M_PI;

inline Matrix random_matrix(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Matrix m(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) m(i, j) = cplx(normal(rng), normal(rng));
  return m;
}

/// Full-rank random density matrix.
inline Matrix random_density(Index n, std::mt19937_64& rng) {
  const Matrix x = random_matrix(n, rng);
  Matrix rho = x * x.adjoint();
  rho /= rho.trace().real();
  return 0.5 * (rho + rho.adjoint());
}

inline Matrix random_hermitian(Index n, std::mt19937_64& rng) {
  const Matrix x = random_matrix(n, rng);
  return 0.5 * (x + x.adjoint());
}

inline double rel_diff(double a, double b) {
  const double d = std::max(std::abs(a), std::abs(b));
  return d == 0.0 ? 0.0 : std::abs(a - b) / d;
}

/// Position eigenfunctions psi_n(x) of the convention x = (a + a^dagger)/sqrt(2).
inline std::vector<double> hermite_functions(int n_max, double x) {
  std::vector<double> psi(std::size_t(n_max) + 1);
  psi[0] = std::pow(M_PI, -0.25) * std::exp(-0.5 * x * x);
  if (n_max >= 1) psi[1] = std::sqrt(2.0) * x * psi[0];
  for (int n = 1; n < n_max; ++n)
    psi[n + 1] = std::sqrt(2.0 / (n + 1)) * x * psi[n] - std::sqrt(double(n) / (n + 1)) * psi[n - 1];
  return psi;
}

/**
 * W(x, p) = (1/pi) int dy <x + y|rho|x - y> e^{-2 i p y}, by trapezoidal
 * quadrature on [-y_max, y_max]. Independent of the Laguerre closed form.
 */
inline double wigner_by_integration(const Matrix& rho, double x, double p, double y_max = 12.0,
                                    int points = 4001) {
  const int n = int(rho.rows());
  const double h = 2.0 * y_max / (points - 1);
  cplx total = 0.0;
  for (int k = 0; k < points; ++k) {
    const double y = -y_max + k * h;
    const auto a = hermite_functions(n - 1, x + y);
    const auto b = hermite_functions(n - 1, x - y);
    cplx m = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m += a[i] * rho(i, j) * b[j];
    const double w = (k == 0 || k == points - 1) ? 0.5 : 1.0;
    total += w * m * std::exp(cplx(0.0, -2.0 * p * y));
  }
  return (total * h).real() / M_PI;
}

}  // namespace mechcat::testing
