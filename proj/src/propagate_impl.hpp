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

#include <sstream>

#include "mechcat/banded.hpp"
#include "mechcat/trajectory.hpp"

namespace mechcat::detail {

/// Fixed-step RK4 loop shared by both propagators. `sample(t, rho)` appends
/// the model-specific observables for one recorded state.
template <typename Sample>
void integrate(BandedLindblad& generator, Matrix rho, double t_final, double dt_max,
               const PropagationOptions& opts, TrajectoryRecord& rec, Sample&& sample) {
  const auto [n_steps, dt] = fit_steps(t_final, dt_max);
  rec.dt = dt;
  rec.steps = n_steps;
  const std::size_t every = opts.record_every == 0 ? 1 : opts.record_every;

  Rk4Stepper stepper(
      [&generator](double t, const Matrix& y, Matrix& out) { generator.apply(t, y, out); });

  auto record = [&](std::size_t step) {
    const double t = double(step) * dt;
    if (!rho.allFinite()) {
      std::ostringstream os;
      os << "non-finite density matrix at t = " << t << " s";
      throw NumericalOverflow(os.str(), t);
    }
    const StateDiagnostics d = diagnose_state(rho);
    rec.conservation.absorb(d);
    const auto& tol = opts.tolerances;
    if (d.trace_error > tol.trace || d.hermiticity > tol.hermiticity ||
        d.min_eigenvalue < tol.min_eigenvalue) {
      std::ostringstream os;
      os << "state left the density-matrix cone at t = " << t << " s (trace error "
         << d.trace_error << ", hermiticity " << d.hermiticity << ", min eigenvalue "
         << d.min_eigenvalue << ")";
      throw IntegrationDiverged(os.str(), t);
    }
    rec.times.push_back(t);
    sample(t, rho);
    if (opts.keep_snapshots) rec.snapshots.push_back({t, DensityMatrix::trusted(rho)});
    if (opts.observer) opts.observer(t, rho);
  };

  record(0);
  for (std::size_t step = 1; step <= n_steps; ++step) {
    stepper.step(double(step - 1) * dt, dt, rho);
    if (step % every == 0 || step == n_steps) {
      record(step);
    } else if (step % 64 == 0 && !std::isfinite(std::abs(rho(0, 0)))) {
      const double t = double(step) * dt;
      std::ostringstream os;
      os << "non-finite density matrix at t = " << t << " s";
      throw NumericalOverflow(os.str(), t);
    }
  }
}

}  // namespace mechcat::detail
