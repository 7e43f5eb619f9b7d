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

// Run configuration and the command pipelines behind the CLI.

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "mechcat/effective_model.hpp"
#include "mechcat/full_model.hpp"
#include "mechcat/nz_oracle.hpp"
#include "mechcat/observables.hpp"

namespace mechcat {

struct InitialState {
  enum class Kind { vacuum, fock, coherent, thermal };
  Kind kind = Kind::vacuum;
  Index fock = 0;
  cplx alpha{0.0, 0.0};
  double n_th = 0.0;

  /// `vacuum`, `fock:N`, `coherent:RE,IM` or `thermal:NTH`.
  static InitialState parse(const std::string& text);
  std::string str() const;
  DensityMatrix mechanical(Index n_trunc) const;
};

enum class HorizonUnit { kappa_t, gamma2_t };

enum class SteadyChoice { automatic, propagation, null_space };

/// Parsed run description. Physics fields are in rad/s; the file holds Hz.
struct RunConfig {
  SystemParams params;
  Frame frame = Frame::mech_rot;
  InitialState initial;
  double horizon = 1.0;
  HorizonUnit horizon_unit = HorizonUnit::gamma2_t;
  std::size_t samples = 200;
  bool include_frame_term = true;
  double two_phonon_scale = 1.0;
  std::optional<double> dt;  ///< seconds, overrides the automatic step
  StepRule rule;

  bool emit_timeseries = true;
  std::vector<double> wigner_times;  ///< in horizon units
  bool emit_steady_state = false;
  bool emit_report = true;
  WignerGridSpec grid;

  SteadyChoice steady_method = SteadyChoice::automatic;
  double steady_residual_tol = 1e-10;

  /// Canonical `section.key` -> value text as read; sweeps edit and re-parse it.
  std::map<std::string, std::string> entries;

  EffectiveParams effective() const;
  /// Seconds corresponding to a dimensionless time in `horizon_unit`.
  double to_seconds(double dimensionless) const;
  double horizon_seconds() const { return to_seconds(horizon); }
};

/// Flat `section.key = value` lines or `[section]` headers; `#` starts a comment.
RunConfig parse_config(const std::filesystem::path& path);
RunConfig parse_config_text(const std::string& text);
RunConfig config_from_entries(const std::map<std::string, std::string>& entries);

/// Every accepted key with its default, one per line.
std::string config_reference();

/// Reference parameters: g_z/2pi = 6 MHz, g_x = 0.1 g_z, omega_m/2pi = 100 MHz,
/// kappa/2pi = 100 kHz, omega_q = omega_d = 2 omega_m, eps = 4 g, n_trunc = 60.
SystemParams reference_params();

struct RunContext {
  std::filesystem::path out_dir;  ///< nothing is written when empty
  int threads = 1;
  std::ostream* log = nullptr;
};

struct RateRow {
  std::string symbol;
  double rad_s = 0.0;
  std::string role;
};

std::vector<RateRow> rate_rows(const RunConfig& cfg);
/// `symbol,value_hz,value_rad_s,role`
std::string rates_table(const std::vector<RateRow>& rows);

std::vector<RateRow> cmd_rates(const RunConfig& cfg, const RunContext& ctx);

enum class ModelKind { full, effective };

struct EvolveResult {
  TrajectoryRecord record;
  std::vector<WignerGrid> frames;
  std::vector<double> frame_times;  ///< seconds, sample nearest to each request
};

EvolveResult cmd_evolve(const RunConfig& cfg, ModelKind model, const RunContext& ctx);

struct CompareResult {
  double kappa = 0.0, gamma2_minus = 0.0;
  std::vector<double> times;
  std::vector<double> fidelity, n_full, n_eff, parity_full, parity_eff;
  std::vector<double> frame_times;
  std::vector<WignerGrid> frames_full, frames_eff;
  ConservationLog conservation_full, conservation_eff;
  std::size_t steps_full = 0, steps_eff = 0;
};

/**
 * Full model from |g> (x) rho_m against the effective model from rho_m on one
 * sample grid. The effective state is rotated by (delta1 + delta2) t only when
 * its frame term is switched off; otherwise both already share a frame.
 */
CompareResult cmd_compare(const RunConfig& cfg, const RunContext& ctx);

struct SteadyReport {
  SteadyStateResult result;
  double mean_phonon = 0.0, parity = 0.0, purity = 0.0, negativity = 0.0;
  CatFit cat;
};

SteadyReport cmd_steady(const RunConfig& cfg, const RunContext& ctx);

struct VerifyOptions {
  double perturb_Gamma2_minus = 0.0;  ///< relative offset applied to the closed form, test hook
  unsigned seed = 12345;
};

/// Kernel reconstruction, quadrature, M32, SW scaling and invariant checks.
ProofReport cmd_verify(const SystemParams& p, const VerifyOptions& opts, const RunContext& ctx);

struct SweepRow {
  std::string value;
  double Gamma2_minus = 0.0;
  double abs_chi = 0.0;
  double mean_phonon = 0.0, parity = 0.0, negativity = 0.0;
  std::string error;  ///< empty on success
};

/// One point per value, run concurrently on ctx.threads workers.
std::vector<SweepRow> cmd_sweep(const RunConfig& cfg, const std::string& key,
                                const std::vector<std::string>& values, const RunContext& ctx);

}  // namespace mechcat
