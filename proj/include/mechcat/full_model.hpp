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

#include <string>
#include <utility>
#include <vector>

#include "mechcat/banded.hpp"
#include "mechcat/operator_core.hpp"
#include "mechcat/trajectory.hpp"

namespace mechcat {

/// Model parameters. Frequencies and rates in rad/s.
struct SystemParams {
  double omega_m = 0.0;
  double omega_q = 0.0;
  double omega_d = 0.0;
  double g_x = 0.0;
  double g_z = 0.0;
  double Omega = 0.0;      ///< drive amplitude; eps = Omega / 2
  double kappa = 0.0;
  double gamma = 0.0;
  double gamma_phi = 0.0;  ///< pure dephasing
  double n_th = 0.0;
  Index n_trunc = 60;

  /// Throws InvalidParameter / InvalidTruncation on contract violations.
  void validate() const;
  /// Non-fatal: couplings above 0.2 omega_m leave the perturbative regime.
  std::vector<std::string> warnings() const;
};

enum class Frame { lab, mech_rot, double_rot };

const char* frame_name(Frame f);
Frame parse_frame(const std::string& name);

/// (gamma_-, gamma_+) = (gamma (n_th + 1), gamma n_th)
std::pair<double, double> gamma_rates(const SystemParams& p);

/// Dense Hamiltonian of dimension 2 n_trunc at time t.
OperatorMatrix build_full_hamiltonian(const SystemParams& p, double t, Frame frame);

/// Same Hamiltonian as a coefficient-times-operator sum for propagation.
BandedSum full_hamiltonian_terms(const SystemParams& p, Frame frame);

/// Jump operators {(kappa, sigma_-), (gamma_phi/2, sigma_z), (gamma_-, a), (gamma_+, a^dagger)}.
std::vector<DissipatorSpec> full_dissipators(const SystemParams& p);

/// Largest oscillation frequency present in `frame`.
double full_max_frequency(const SystemParams& p, Frame frame);

/// Automatic step: spectral rule, decay cap and RK4 stability cap.
double full_auto_step(const SystemParams& p, Frame frame, const StepRule& rule = {});

TrajectoryRecord propagate_full(const SystemParams& p, const DensityMatrix& rho0,
                                double t_final, Frame frame,
                                const PropagationOptions& opts = {});

/// Sign of the two-phonon term in the transformed Hamiltonian.
enum class SwBranch {
  cancelling,  ///< generator S = +(g_z/w_m) sigma_z (a^dag - a): V cancels, term +2ig sigma_y (a^dag^2 - a^2)
  flipped,     ///< generator S = -(g_z/w_m) sigma_z (a^dag - a) with term -2ig sigma_y (a^dag^2 - a^2)
};

OperatorMatrix sw_generator(const SystemParams& p, SwBranch branch = SwBranch::cancelling);

/// H0(t) plus the leading two-phonon term, lab frame.
OperatorMatrix sw_transformed_hamiltonian(const SystemParams& p, double t,
                                          SwBranch branch = SwBranch::cancelling);

/// || e^S H(t) e^{-S} - H'(t) ||_F with the matrix exponential from an eigendecomposition.
double sw_residual(const SystemParams& p, double t, SwBranch branch = SwBranch::cancelling);

}  // namespace mechcat
