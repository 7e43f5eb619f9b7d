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

// Second-order memory-kernel reconstruction by explicit term enumeration.
//
// Each interaction-picture Hamiltonian is a list of c e^{i nu t} Q (x) B terms
// with Q in {sigma_+, sigma_-} and B a ladder word. The kernel
//   M_ij rho = -int_0^inf dtau Tr_q [H_i(t), e^{L0 tau} [H_j(t - tau), |g><g| (x) rho]]
// is expanded pair by pair; the qubit factor is propagated with the
// eigendecomposition of the 4x4 qubit Liouvillian, so every tau-integral is a
// sum of 1/(i nu - lambda) terms. Nothing here reuses the closed forms of
// effective_model.

#pragma once

#include <string>
#include <vector>

#include "mechcat/full_model.hpp"
#include "mechcat/operator_core.hpp"

namespace mechcat {

/// Ladder word, leftmost operator first; `true` is a^dagger.
struct LadderWord {
  std::vector<bool> ops;

  static LadderWord identity() { return {}; }
  static LadderWord parse(const std::string& text);  ///< e.g. "a a+ a"
  LadderWord operator*(const LadderWord& rhs) const;
  bool operator==(const LadderWord& rhs) const = default;
  int phonon_change() const;  ///< creations minus annihilations
  std::string str() const;
  Matrix matrix(Index n_trunc) const;
};

enum class Placement { left, right, sandwich };

/// One term  prefactor * e^{i t_phase t} * L rho R  of a kernel.
struct KernelTerm {
  double qubit_phase = 0.0;  ///< nu of the inner Hamiltonian term, integrand e^{-i nu tau}
  double t_phase = 0.0;      ///< net e^{i omega t} frequency, drives the secular filter
  cplx coupling;             ///< product of the two Hamiltonian coefficients
  cplx response;             ///< tau-integral including the qubit trace, seconds
  cplx prefactor;            ///< -sign * coupling * response
  Placement placement = Placement::left;
  LadderWord left, right;
  bool near_resonant = true;  ///< inner term is not the far (omega_q + omega_d) drive sideband
  std::string origin;         ///< readable label of the Hamiltonian term pair
};

/// Numeric int_0^inf e^{-kappa tau/2} e^{-i Delta tau} dtau on [0, 40/kappa].
cplx response_integral_numeric(double Delta, double kappa);

/// Raw kernel terms before filtering. `i`, `j` in {1, 2, 3}.
std::vector<KernelTerm> enumerate_kernel(const SystemParams& p, int i, int j);

struct SecularSplit {
  std::vector<KernelTerm> retained;
  std::vector<KernelTerm> discarded;
  double max_retained_phase = 0.0;
  double min_discarded_phase = 0.0;
  std::vector<std::string> warnings;
};

/// Keeps |t_phase| < threshold; warns about 0 < |t_phase| < 10 kappa.
SecularSplit secular_filter(const std::vector<KernelTerm>& terms, double threshold, double kappa);

struct M11Result {
  double Gamma1_minus = 0, Gamma1_plus = 0, delta1 = 0;
  SecularSplit split;
};
struct M22Result {
  double Gamma2_minus = 0, Gamma2_plus = 0, delta2 = 0, delta_k = 0;
  SecularSplit split;
};
struct M23Result {
  cplx chi;          ///< dominant near-resonant response only
  cplx chi_far;      ///< contribution of the far drive sideband
  double far_ratio;  ///< |S(omega_d + omega_q)| / |S(omega_d - omega_q)|
  SecularSplit split;
};

/// `threshold_scale` multiplies the default secular thresholds (omega_m, 2 omega_m, omega_m).
M11Result assemble_M11(const SystemParams& p, double threshold_scale = 1.0);
M22Result assemble_M22(const SystemParams& p, double threshold_scale = 1.0);
M23Result assemble_M23(const SystemParams& p, double threshold_scale = 1.0);

/// Superoperator sum of kernel terms with t_phase evaluated at t, column-major vec.
Matrix kernel_superoperator(const std::vector<KernelTerm>& terms, Index n_trunc, double t = 0.0);

struct IdentityCheck {
  std::string name;
  double closed_form = 0.0;
  double oracle = 0.0;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct ProofReport {
  std::vector<IdentityCheck> checks;
  bool all_pass() const;
  std::string text() const;
};

/// Trace-of-commutator identities behind the vanishing drive-outer kernel.
ProofReport verify_M32_zero(unsigned seed = 12345, int random_draws = 100);

}  // namespace mechcat
