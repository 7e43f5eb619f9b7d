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

#include "mechcat/circuit_map.hpp"

#include <cmath>
#include <string>

#include "mechcat/errors.hpp"

namespace mechcat {

namespace {

// CODATA 2018 exact values.
constexpr double kHbar = 1.054571817e-34;
constexpr double kElementaryCharge = 1.602176634e-19;

void require_positive(const std::optional<double>& v, const char* name) {
  if (v && !(*v > 0.0 && std::isfinite(*v)))
    throw InvalidParameter(std::string(name) + " must be positive when provided");
}

}  // namespace

void CircuitParams::validate() const {
  if (!(E_C > 0.0 && std::isfinite(E_C))) throw InvalidParameter("E_C must be positive");
  if (!(E_J > 0.0 && std::isfinite(E_J))) throw InvalidParameter("E_J must be positive");
  if (!std::isfinite(n_g0) || !std::isfinite(n_d)) throw InvalidParameter("n_g0, n_d must be finite");
  if (!(Gamma_phi >= 0.0)) throw InvalidParameter("Gamma_phi must be non-negative");
  require_positive(V_g, "V_g");
  require_positive(dCg_dx, "dCg_dx");
  require_positive(mass, "mass");
  require_positive(omega_m, "omega_m");
  if (lambda && !std::isfinite(*lambda)) throw InvalidParameter("lambda must be finite");
}

QubitEigenbasis qubit_eigenbasis(const CircuitParams& c) {
  QubitEigenbasis q;
  q.charge_bias = 4.0 * c.E_C * (1.0 - 2.0 * c.n_g0);
  if (c.E_J == 0.0 && q.charge_bias == 0.0)
    throw DegenerateQubit("E_J and the charge bias both vanish");
  q.theta0 = std::atan2(c.E_J, q.charge_bias);
  q.omega_q = std::hypot(c.E_J, q.charge_bias);
  return q;
}

double zpf_lambda(const CircuitParams& c) {
  if (!c.V_g || !c.dCg_dx || !c.mass || !c.omega_m)
    throw InsufficientData("lambda needs V_g, dCg_dx, mass and omega_m");
  require_positive(c.V_g, "V_g");
  require_positive(c.dCg_dx, "dCg_dx");
  require_positive(c.mass, "mass");
  require_positive(c.omega_m, "omega_m");
  const double x_zpf = std::sqrt(kHbar / (2.0 * *c.mass * *c.omega_m));
  return *c.V_g / (2.0 * kElementaryCharge) * *c.dCg_dx * x_zpf;
}

Couplings electromech_couplings(const CircuitParams& c, double theta0) {
  const double lambda = c.lambda ? *c.lambda : zpf_lambda(c);
  return {-4.0 * c.E_C * lambda * std::sin(theta0), -4.0 * c.E_C * lambda * std::cos(theta0)};
}

Couplings electromech_couplings(const CircuitParams& c, const QubitEigenbasis& q) {
  const double lambda = c.lambda ? *c.lambda : zpf_lambda(c);
  return {-4.0 * c.E_C * lambda * (c.E_J / q.omega_q),
          -4.0 * c.E_C * lambda * (q.charge_bias / q.omega_q)};
}

DriveMatching drive_matching(const CircuitParams& c, double theta0) {
  const double s = std::sin(theta0);
  if (std::abs(s) < 1e-12) throw MatchingImpossible("drive matching needs sin(theta0) != 0");
  DriveMatching m;
  m.delta_EJ = 8.0 * c.E_C * c.n_d * std::cos(theta0) / s;
  m.Omega = 4.0 * c.E_C * c.n_d / s;
  m.A_z_residual = 4.0 * c.E_C * c.n_d * std::cos(theta0) - 0.5 * m.delta_EJ * s;
  return m;
}

double broadened_kappa_half(double kappa, double Gamma_phi) { return 0.5 * kappa + Gamma_phi; }

double theta_for_coupling_ratio(double ratio) { return std::atan(ratio); }

double lambda_for_gz(double E_C, double theta0, double g_z_target) {
  const double denom = 4.0 * E_C * std::abs(std::cos(theta0));
  if (denom == 0.0) throw InvalidParameter("g_z vanishes at theta0 = pi/2");
  return std::abs(g_z_target) / denom;
}

SystemParams apply_circuit(const CircuitParams& c, SystemParams base) {
  c.validate();
  const QubitEigenbasis q = qubit_eigenbasis(c);
  const Couplings g = electromech_couplings(c, q);
  base.omega_q = q.omega_q;
  base.g_x = g.g_x;
  base.g_z = g.g_z;
  base.Omega = drive_matching(c, q.theta0).Omega;
  base.gamma_phi = c.Gamma_phi;
  if (c.omega_m) base.omega_m = *c.omega_m;
  return base;
}

}  // namespace mechcat
