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

#include <optional>
#include <vector>

#include "mechcat/banded.hpp"
#include "mechcat/full_model.hpp"
#include "mechcat/operator_core.hpp"
#include "mechcat/trajectory.hpp"

namespace mechcat {

/// Qubit susceptibilities 1/(kappa/2 + Gamma_phi + i Delta), in seconds.
struct ResponseFunctions {
  cplx S_minus, S_plus, S2_minus, S2_plus;
};

/// Coefficients of the resonator-only master equation. Rates in rad/s.
struct EffectiveParams {
  cplx S_minus, S_plus, S2_minus, S2_plus;
  double Delta_minus = 0, Delta_plus = 0, Delta2_minus = 0, Delta2_plus = 0, Delta_d = 0;
  double g = 0;    ///< g_x g_z / omega_m
  double eps = 0;  ///< Omega / 2
  double Gamma1_minus = 0, Gamma1_plus = 0, Gamma2_minus = 0, Gamma2_plus = 0;
  double delta1 = 0, delta2 = 0, delta_k = 0;
  cplx chi;
  double omega_m_eff = 0;
};

/// kappa/2 + Gamma_phi; the dephasing-broadened half linewidth.
double half_linewidth(const SystemParams& p);

ResponseFunctions response_functions(const SystemParams& p);
EffectiveParams effective_params(const SystemParams& p);

/**
 * Multiplies the two-phonon coupling g by `factor` in every coefficient it
 * enters: chi by factor, Gamma2_+-, delta2 and delta_k by factor^2. A
 * diagnostic for the coupling normalisation; the default model uses 1.
 */
EffectiveParams scale_two_phonon(EffectiveParams e, double factor);

/// Residual a^dagger a coefficient in the chosen frame: delta1 + delta2, or 0.
double frame_detuning(const EffectiveParams& e, bool include_frame_term);

OperatorMatrix effective_hamiltonian(const EffectiveParams& e, Index n_trunc,
                                     bool include_frame_term = true);
std::vector<DissipatorSpec> effective_dissipators(const EffectiveParams& e,
                                                  const SystemParams& p);

/**
 * Dense N^2 x N^2 generator acting on column-major vec(rho).
 *
 * Uses vec(A X B) = (B^T (x) A) vec(X), so entry (i + N j) of the vector is rho(i, j).
 */
Matrix build_effective_liouvillian(const EffectiveParams& e, const SystemParams& p,
                                   bool include_frame_term = true);

/// Banded form of the same generator, for propagation and residuals.
BandedLindblad effective_generator(const EffectiveParams& e, const SystemParams& p,
                                   bool include_frame_term = true);

/// Rate rule fraction / max(rates) capped by the RK4 stability bound.
double effective_auto_step(const EffectiveParams& e, const SystemParams& p,
                           const StepRule& rule = {}, bool include_frame_term = true);

TrajectoryRecord propagate_effective(const EffectiveParams& e, const SystemParams& p,
                                     const DensityMatrix& rho0_m, double t_final,
                                     const PropagationOptions& opts = {},
                                     bool include_frame_term = true);

/// rho -> e^{-i theta n} rho e^{i theta n}
Matrix rotate_phase_space(const Matrix& rho_m, double theta);

enum class SteadyMethod { propagation, null_space };

struct SteadyStateOptions {
  SteadyMethod method = SteadyMethod::propagation;
  std::optional<DensityMatrix> initial;   ///< vacuum when empty (propagation)
  double residual_tol = 1e-10;            ///< on ||L rho||_F / ||L||_F
  double chunk_time = 0.0;                ///< seconds per convergence check; 0 = 1/Gamma2_-
  double max_time = 0.0;                  ///< seconds; 0 = 200 / Gamma2_-
  double null_tol = 1e-10;                ///< |lambda| / max |lambda| counted as zero
  Index max_null_space_dim = 40;          ///< n_trunc limit of the dense method
  bool include_frame_term = true;
  StepRule rule;
};

struct SteadyStateResult {
  DensityMatrix state;
  double residual = 0.0;       ///< ||L rho||_F / ||L||_F
  bool converged = false;
  double elapsed_time = 0.0;   ///< simulated seconds (propagation method)
  Index null_dimension = 0;    ///< near-zero eigenvalues (null-space method)
};

SteadyStateResult steady_state(const EffectiveParams& e, const SystemParams& p,
                               const SteadyStateOptions& opts = {});

/// Frobenius norm of the generator as an N^2 x N^2 matrix.
double generator_frobenius_norm(BandedLindblad& gen);

}  // namespace mechcat
