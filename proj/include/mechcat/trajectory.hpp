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

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mechcat/operator_core.hpp"

namespace mechcat {

struct Snapshot {
  double time = 0.0;
  DensityMatrix state;
};

/// Worst residuals seen over every checked sample of a propagation.
struct ConservationLog {
  double max_trace_error = 0.0;
  double max_hermiticity = 0.0;
  double min_eigenvalue = 1.0;
  std::size_t samples = 0;

  void absorb(const StateDiagnostics& d);
  bool within(double trace_tol, double herm_tol, double eig_floor) const;
};

/// Time grid plus observable series of one propagation.
struct TrajectoryRecord {
  double kappa = 0.0;          ///< rad/s, scales the kappa_t column
  double gamma2_minus = 0.0;   ///< rad/s, scales the gamma2_t column
  double dt = 0.0;             ///< integrator step actually used, seconds
  std::size_t steps = 0;

  std::vector<double> times;   ///< seconds
  std::map<std::string, std::vector<double>> series;
  std::vector<Snapshot> snapshots;
  ConservationLog conservation;

  std::size_t size() const { return times.size(); }
  std::vector<double> kappa_t() const;
  std::vector<double> gamma2_t() const;

  /// Throws InvalidParameter if the series is absent.
  const std::vector<double>& at(const std::string& name) const;

  /// Strictly increasing times and equal series lengths.
  void check_consistency() const;
};

/// Constants of the automatic step rules. Every field is config-overridable.
struct StepRule {
  double steps_per_period = 24.0;   ///< full model: dt = 2 pi / (steps * Omega_max)
  double decay_fraction = 0.1;      ///< full model: dt <= fraction / max(kappa, gamma_-)
  double rate_fraction = 0.02;      ///< effective model: dt = fraction / max(rates)
  double stability_limit = 2.5;     ///< both: dt * generator bound <= limit
};

using SampleObserver = std::function<void(double t, const Matrix& rho)>;

struct PropagationOptions {
  std::optional<double> dt;   ///< seconds; automatic when empty
  std::size_t record_every = 200;
  bool keep_snapshots = false;
  StepRule rule;
  /// Abort threshold. Smaller excursions are only recorded in the conservation log.
  StateTolerances tolerances{1e-3, 1e-3, -1e-3};
  SampleObserver observer;    ///< called with the full state at each recorded sample
};

/// Steps n and step size t_final / n with n = ceil(t_final / dt_max).
std::pair<std::size_t, double> fit_steps(double t_final, double dt_max);

}  // namespace mechcat
