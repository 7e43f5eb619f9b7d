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

// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.
//
//   acceptance [--full-scale] [--only N]
//
// --full-scale runs criterion 6 on configs/compare_full_scale.conf (n_trunc = 50,
// tens of minutes) instead of the ratio-preserving CI preset.

#include <chrono>
#include <cstring>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mechcat/circuit_map.hpp"
#include "mechcat/effective_model.hpp"
#include "mechcat/full_model.hpp"
#include "mechcat/harness.hpp"
#include "mechcat/nz_oracle.hpp"
#include "mechcat/observables.hpp"
#include "test_support.hpp"

using namespace mechcat;
using namespace mechcat::testing;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 6) {
  std::ostringstream s;
  s << std::setprecision(digits) << v;
  return s.str();
}

// Conservation logs of criteria 4-6, checked by criterion 7.
std::vector<std::pair<std::string, ConservationLog>> g_logs;

bool g_full_scale = false;

Outcome criterion1() {
  const SystemParams p = reference_params();
  const EffectiveParams e = effective_params(p);
  const M22Result m22 = assemble_M22(p);
  const M23Result m23 = assemble_M23(p);
  const double g_err = rel_diff(e.g / kTwoPi, 36e3);
  const double g2_closed = rel_diff(e.Gamma2_minus, 4.0 * e.g * e.g / p.kappa);
  const double g2_oracle = rel_diff(e.Gamma2_minus, m22.Gamma2_minus);
  const double chi_closed = rel_diff(std::abs(e.chi), 2.0 * e.eps * e.g / p.kappa);
  const double chi_oracle = std::abs(e.chi - m23.chi) / std::abs(e.chi);
  const double worst = std::max({g_err, g2_closed, g2_oracle, chi_closed, chi_oracle});
  return {worst < 1e-9, "g/2pi = " + fmt(e.g / kTwoPi, 10) + " Hz, Gamma2_-/2pi = " +
                            fmt(e.Gamma2_minus / kTwoPi, 10) + " Hz, |chi|/2pi = " +
                            fmt(std::abs(e.chi) / kTwoPi, 10) + " Hz, worst rel residual " +
                            fmt(worst, 3)};
}

Outcome criterion2() {
  const SystemParams p = reference_params();
  double worst = 0.0;
  for (double m : {0.0, 1.0, 2.0, 4.0}) {
    const double d = m * p.omega_m;
    const cplx exact = 1.0 / cplx(0.5 * p.kappa, d);
    worst = std::max(worst, std::abs(response_integral_numeric(d, p.kappa) - exact) / std::abs(exact));
  }
  return {worst < 1e-6, "worst rel error " + fmt(worst, 3) + " over Delta/omega_m in {0,1,2,4}"};
}

Outcome criterion3() {
  SystemParams p = reference_params();
  p.n_trunc = 15;
  const double t = M_PI / (2.0 * p.omega_d);
  const double r1 = sw_residual(p, t);
  p.g_z *= 0.5;
  const double r2 = sw_residual(p, t);
  const double ratio = r1 / r2;
  return {std::abs(ratio - 4.0) <= 0.8, "residual ratio under g_z/2 = " + fmt(ratio)};
}

// Reference point in the parity-protected limit.
std::pair<EffectiveParams, SystemParams> protected_point(Index n) {
  SystemParams p = reference_params();
  p.n_trunc = n;
  p.gamma = 0.0;
  EffectiveParams e = effective_params(p);
  e.Gamma1_minus = e.Gamma1_plus = 0.0;
  return {e, p};
}

Outcome criterion4() {
  const auto [e, p] = protected_point(60);
  const double T = 5.0 / e.Gamma2_minus;
  PropagationOptions o;
  o.record_every = 20;
  double worst_even = 0.0, worst_odd = 0.0;
  const auto even = propagate_effective(e, p, DensityMatrix::pure(fock_ket(60, 0)), T, o);
  for (double v : even.at("parity")) worst_even = std::max(worst_even, std::abs(v - 1.0));
  const auto odd = propagate_effective(e, p, DensityMatrix::pure(fock_ket(60, 1)), T, o);
  for (double v : odd.at("parity")) worst_odd = std::max(worst_odd, std::abs(v + 1.0));
  g_logs.emplace_back("criterion 4 vacuum", even.conservation);
  g_logs.emplace_back("criterion 4 one phonon", odd.conservation);
  return {worst_even < 1e-8 && worst_odd < 1e-8,
          "max |<P>-1| = " + fmt(worst_even, 3) + ", max |<P>+1| = " + fmt(worst_odd, 3) + " over " +
              std::to_string(even.size()) + " samples to Gamma2_- t = 5"};
}

Outcome criterion5() {
  // Oracle: brute-force steady state of the protected model reached from vacuum.
  const auto [ep, pp] = protected_point(40);
  SteadyStateOptions so;
  so.max_time = 400.0 / ep.Gamma2_minus;
  const SteadyStateResult ss = steady_state(ep, pp, so);
  const double candidate = std::sqrt(2.0 * std::abs(ep.chi) / ep.Gamma2_minus);
  const double oracle_alpha = std::abs(best_fit_even_cat(ss.state.matrix()).alpha);
  const bool candidate_ok = ss.converged && std::abs(oracle_alpha / candidate - 1.0) <= 0.15;

  const RunConfig cfg = parse_config(std::string(MECHCAT_CONFIG_DIR) + "/cat_formation.conf");
  const EffectiveParams e = cfg.effective();
  PropagationOptions o;
  o.keep_snapshots = true;
  o.record_every = 1u << 30;  // initial and final state only
  const auto rec = propagate_effective(e, cfg.params, cfg.initial.mechanical(cfg.params.n_trunc),
                                       cfg.horizon_seconds(), o, cfg.include_frame_term);
  g_logs.emplace_back("criterion 5 reference run", rec.conservation);
  const Matrix& rho = rec.snapshots.back().state.matrix();

  const WignerGrid w = wigner(rho, cfg.grid, 4);
  const double neg = negativity_volume(w);
  const auto lobes = local_maxima(husimi_q(rho, cfg.grid));
  bool axis = false;
  std::string where;
  if (lobes.size() == 2) {
    // Mirror images through the origin, both on the x axis or both on the p axis.
    const double tol = 3.0 * cfg.grid.dx();
    const double sx = lobes[0].x + lobes[1].x, sp = lobes[0].p + lobes[1].p;
    const bool on_x = std::abs(lobes[0].p) <= tol && std::abs(lobes[1].p) <= tol;
    const bool on_p = std::abs(lobes[0].x) <= tol && std::abs(lobes[1].x) <= tol;
    axis = std::hypot(sx, sp) <= tol && (on_x || on_p);
    where = " at (" + fmt(lobes[0].x, 3) + ", " + fmt(lobes[0].p, 3) + ") and (" +
            fmt(lobes[1].x, 3) + ", " + fmt(lobes[1].p, 3) + ")";
  }
  const CatFit fit = best_fit_even_cat(rho);
  const double alpha_err = std::abs(std::abs(fit.alpha) / oracle_alpha - 1.0);
  const bool pass = candidate_ok && lobes.size() == 2 && axis && neg > 0.05 &&
                    fit.fidelity > 0.95 && alpha_err <= 0.15;
  return {pass, "oracle |alpha| = " + fmt(oracle_alpha, 4) + " (candidate " + fmt(candidate, 4) +
                    "), " + std::to_string(lobes.size()) + " lobes" + where +
                    ", negativity " + fmt(neg, 4) + ", cat fidelity " + fmt(fit.fidelity, 4) +
                    ", |alpha| = " + fmt(std::abs(fit.alpha), 4)};
}

Outcome criterion6() {
  const std::string file = g_full_scale ? "/compare_full_scale.conf" : "/compare_ci.conf";
  RunConfig cfg = parse_config(std::string(MECHCAT_CONFIG_DIR) + file);
  cfg.wigner_times.clear();
  const auto t0 = std::chrono::steady_clock::now();
  const CompareResult r = cmd_compare(cfg, {});
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  g_logs.emplace_back("criterion 6 full model", r.conservation_full);
  g_logs.emplace_back("criterion 6 effective model", r.conservation_eff);

  double min_f15 = 1.0, worst_n = 0.0;
  for (std::size_t k = 0; k < r.times.size(); ++k) {
    const double kt = r.times[k] * r.kappa;
    if (kt >= 15.0 - 1e-9) min_f15 = std::min(min_f15, r.fidelity[k]);
    if (kt >= 5.0 - 1e-9 && kt <= 39.0 + 1e-9)
      worst_n = std::max(worst_n, std::abs(r.n_full[k] - r.n_eff[k]) / std::max(r.n_full[k], 1e-12));
  }
  const double f_end = r.fidelity.back();
  const bool time_ok = g_full_scale || secs < 60.0;
  const bool pass = min_f15 >= 0.95 && f_end >= 0.97 && worst_n <= 0.10 && time_ok;
  return {pass, std::string(g_full_scale ? "full scale" : "CI preset") + ": min F(kappa t >= 15) = " +
                    fmt(min_f15, 4) + ", F(39) = " + fmt(f_end, 4) + ", <n> full/eff at 39 = " +
                    fmt(r.n_full.back(), 4) + "/" + fmt(r.n_eff.back(), 4) +
                    ", worst <n> rel diff = " + fmt(worst_n, 3) + ", " + fmt(secs, 3) + " s"};
}

Outcome criterion7() {
  if (g_logs.empty()) return {false, "no propagation logs (run criteria 4-6 first)"};
  bool pass = true;
  std::string worst;
  double tr = 0.0, herm = 0.0, eig = 1.0;
  for (const auto& [name, log] : g_logs) {
    if (!log.within(1e-8, 1e-9, -1e-7)) {
      pass = false;
      worst += " [" + name + " out of bounds]";
    }
    tr = std::max(tr, log.max_trace_error);
    herm = std::max(herm, log.max_hermiticity);
    eig = std::min(eig, log.min_eigenvalue);
  }
  return {pass, std::to_string(g_logs.size()) + " runs: max |Tr-1| = " + fmt(tr, 3) +
                    ", max Hermiticity residual = " + fmt(herm, 3) + ", min eigenvalue = " +
                    fmt(eig, 3) + worst};
}

Outcome criterion8() {
  const Matrix vac = DensityMatrix::pure(fock_ket(20, 0)).matrix();
  const Matrix one = DensityMatrix::pure(fock_ket(20, 1)).matrix();
  const double wv = wigner_point(vac, 0, 0), w1 = wigner_point(one, 0, 0);
  const double ov = wigner_by_integration(vac, 0, 0), o1 = wigner_by_integration(one, 0, 0);
  const double err = std::max({std::abs(wv - 1.0 / M_PI), std::abs(w1 + 1.0 / M_PI),
                               std::abs(ov - 1.0 / M_PI), std::abs(o1 + 1.0 / M_PI)});
  const double nv = std::abs(wigner(vac).integral() - 1.0);
  const double n1 = std::abs(wigner(one).integral() - 1.0);
  return {err < 1e-9 && nv < 5e-3 && n1 < 5e-3,
          "W_0(0,0) = " + fmt(wv, 12) + ", W_1(0,0) = " + fmt(w1, 12) +
              ", worst anchor error (kernel and oracle) " + fmt(err, 3) +
              ", normalization errors " + fmt(nv, 3) + ", " + fmt(n1, 3)};
}

Outcome criterion9() {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.05, M_PI - 0.05);
  CircuitParams c;
  c.E_C = kTwoPi * 5e9;
  c.E_J = kTwoPi * 7e9;
  c.n_g0 = 0.5;
  c.lambda = 2e-5;
  c.n_d = 3e-4;
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const DriveMatching m = drive_matching(c, u(rng));
    worst = std::max(worst, std::abs(m.A_z_residual) / m.Omega);
  }
  const SystemParams p = apply_circuit(c, reference_params());
  const bool degenerate_ok = p.g_z == 0.0 && p.omega_q == c.E_J;
  return {worst <= 1e-12 && degenerate_ok,
          "worst |A_z|/Omega = " + fmt(worst, 3) + " over 100 angles; at n_g0 = 1/2 g_z = " +
              fmt(p.g_z, 3) + ", omega_q - E_J = " + fmt(p.omega_q - c.E_J, 3)};
}

Outcome criterion10() {
  const ProofReport r = cmd_verify(reference_params(), {}, {});
  std::size_t n = 0;
  double worst = 0.0;
  bool pass = true;
  for (const auto& c : r.checks) {
    if (c.name.rfind("M32", 0) != 0) continue;
    ++n;
    worst = std::max(worst, c.residual);
    pass = pass && c.pass && c.residual < 1e-14;
  }
  return {pass && n >= 4, std::to_string(n) + " M32 identities, worst residual " + fmt(worst, 3)};
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (!std::strcmp(argv[i], "--full-scale")) {
      g_full_scale = true;
    } else if (!std::strcmp(argv[i], "--only") && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::cerr << "usage: acceptance [--full-scale] [--only N]\n";
      return 64;
    }
  }

  const std::vector<std::function<Outcome()>> criteria = {
      criterion1, criterion2, criterion3, criterion4, criterion5,
      criterion6, criterion7, criterion8, criterion9, criterion10};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = int(i) + 1;
    if (only && id != only) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[i]();
    } catch (const std::exception& e) {
      out = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!out.pass) ++failed;
    std::cout << "criterion " << id << ": " << (out.pass ? "PASS" : "FAIL") << "  " << out.detail
              << "  [" << fmt(secs, 3) << " s]" << std::endl;
  }
  return failed;
}
