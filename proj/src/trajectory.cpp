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

#include "mechcat/trajectory.hpp"

#include <algorithm>
#include <cmath>

namespace mechcat {

void ConservationLog::absorb(const StateDiagnostics& d) {
  max_trace_error = std::max(max_trace_error, d.trace_error);
  max_hermiticity = std::max(max_hermiticity, d.hermiticity);
  min_eigenvalue = std::min(min_eigenvalue, d.min_eigenvalue);
  ++samples;
}

bool ConservationLog::within(double trace_tol, double herm_tol, double eig_floor) const {
  return max_trace_error < trace_tol && max_hermiticity < herm_tol && min_eigenvalue > eig_floor;
}

std::vector<double> TrajectoryRecord::kappa_t() const {
  std::vector<double> out(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) out[i] = kappa * times[i];
  return out;
}

std::vector<double> TrajectoryRecord::gamma2_t() const {
  std::vector<double> out(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) out[i] = gamma2_minus * times[i];
  return out;
}

const std::vector<double>& TrajectoryRecord::at(const std::string& name) const {
  auto it = series.find(name);
  if (it == series.end()) throw InvalidParameter("trajectory has no series '" + name + "'");
  return it->second;
}

void TrajectoryRecord::check_consistency() const {
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1])) throw InvalidState("trajectory times not increasing");
  for (const auto& [name, values] : series)
    if (values.size() != times.size())
      throw InvalidState("series '" + name + "' length differs from time grid");
}

std::pair<std::size_t, double> fit_steps(double t_final, double dt_max) {
  if (!(t_final > 0.0)) throw InvalidParameter("final time must be positive");
  if (!(dt_max > 0.0) || !std::isfinite(dt_max)) throw InvalidParameter("step must be positive");
  const double n = std::ceil(t_final / dt_max * (1.0 - 1e-12));
  const auto steps = static_cast<std::size_t>(std::max(1.0, n));
  return {steps, t_final / double(steps)};
}

}  // namespace mechcat
