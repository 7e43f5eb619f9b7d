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

// Cooper-pair-box circuit parameters to qubit/mechanics model parameters.
//
// Energies are in rad/s (hbar = 1). The couplings keep the circuit's overall
// minus sign; the master equation is invariant under a -> -a, so simulations
// may use magnitudes.

#pragma once

#include <optional>

#include "mechcat/full_model.hpp"

namespace mechcat {

struct CircuitParams {
  double E_C = 0.0;
  double E_J = 0.0;
  double n_g0 = 0.0;
  std::optional<double> lambda;  ///< electromechanical coupling; computed from the SI inputs if empty
  double n_d = 0.0;              ///< gate drive amplitude
  std::optional<double> V_g;     ///< volts
  std::optional<double> dCg_dx;  ///< farads per metre
  std::optional<double> mass;    ///< kilograms
  std::optional<double> omega_m; ///< rad/s
  double Gamma_phi = 0.0;

  void validate() const;
};

struct QubitEigenbasis {
  double omega_q = 0.0;
  double theta0 = 0.0;       ///< atan2(E_J, charge_bias), in (0, pi)
  double charge_bias = 0.0;  ///< 4 E_C (1 - 2 n_g0)
};

QubitEigenbasis qubit_eigenbasis(const CircuitParams& c);

/**
 * (V_g / 2e) dC_g/dx x_zpf with x_zpf = sqrt(hbar / (2 m omega_m)), in SI.
 *
 * The Hamiltonian convention sets hbar = 1; restoring it puts hbar inside the
 * zero-point length and leaves lambda dimensionless.
 */
double zpf_lambda(const CircuitParams& c);

struct Couplings {
  double g_x = 0.0;
  double g_z = 0.0;
};

/// g_x = -4 E_C lambda sin theta0, g_z = -4 E_C lambda cos theta0.
Couplings electromech_couplings(const CircuitParams& c, double theta0);
/// Same map with cos and sin taken as charge_bias / omega_q and E_J / omega_q,
/// so g_z vanishes exactly at charge degeneracy.
Couplings electromech_couplings(const CircuitParams& c, const QubitEigenbasis& q);

struct DriveMatching {
  double delta_EJ = 0.0;      ///< flux drive amplitude that removes the longitudinal drive
  double Omega = 0.0;         ///< resulting transverse Rabi amplitude
  double A_z_residual = 0.0;  ///< 4 E_C n_d cos theta0 - (delta_EJ / 2) sin theta0
};

DriveMatching drive_matching(const CircuitParams& c, double theta0);

/// kappa/2 + Gamma_phi
double broadened_kappa_half(double kappa, double Gamma_phi);

/// theta0 that gives g_x / g_z = ratio, for a chosen coupling ratio.
double theta_for_coupling_ratio(double ratio);

/// Lambda needed for |g_z| = target at theta0.
double lambda_for_gz(double E_C, double theta0, double g_z_target);

/// Fills omega_q, g_x, g_z, Omega and gamma_phi of `base` from the circuit.
SystemParams apply_circuit(const CircuitParams& c, SystemParams base);

}  // namespace mechcat
