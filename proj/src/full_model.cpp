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

#include "mechcat/full_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "mechcat/effective_model.hpp"
#include "mechcat/observables.hpp"
#include "propagate_impl.hpp"

namespace mechcat {

namespace {

void require_finite(double v, const char* name) {
  if (!std::isfinite(v)) throw InvalidParameter(std::string(name) + " must be finite");
}

cplx phase(double w, double t) { return std::polar(1.0, w * t); }

}  // namespace

void SystemParams::validate() const {
  for (auto [v, name] : {std::pair{omega_m, "omega_m"}, {omega_q, "omega_q"}, {omega_d, "omega_d"},
                         {g_x, "g_x"}, {g_z, "g_z"}, {Omega, "Omega"}, {kappa, "kappa"},
                         {gamma, "gamma"}, {gamma_phi, "gamma_phi"}, {n_th, "n_th"}})
    require_finite(v, name);
  if (!(omega_m > 0.0)) throw InvalidParameter("omega_m must be positive");
  if (!(kappa > 0.0)) throw InvalidParameter("kappa must be positive");
  if (gamma < 0.0 || gamma_phi < 0.0 || n_th < 0.0)
    throw InvalidParameter("gamma, gamma_phi and n_th must be non-negative");
  require_truncation(n_trunc, 2);
}

std::vector<std::string> SystemParams::warnings() const {
  std::vector<std::string> out;
  if (std::abs(g_z) > 0.2 * omega_m)
    out.push_back("g_z/omega_m exceeds 0.2; the two-phonon expansion is not perturbative");
  if (std::abs(g_x) > 0.2 * omega_m)
    out.push_back("g_x/omega_m exceeds 0.2; the two-phonon expansion is not perturbative");
  return out;
}

const char* frame_name(Frame f) {
  switch (f) {
    case Frame::lab: return "lab";
    case Frame::mech_rot: return "mech_rot";
    case Frame::double_rot: return "double_rot";
  }
  return "?";
}

Frame parse_frame(const std::string& name) {
  if (name == "lab") return Frame::lab;
  if (name == "mech_rot") return Frame::mech_rot;
  if (name == "double_rot") return Frame::double_rot;
  throw InvalidParameter("unknown frame '" + name + "'");
}

std::pair<double, double> gamma_rates(const SystemParams& p) {
  return {p.gamma * (p.n_th + 1.0), p.gamma * p.n_th};
}

OperatorMatrix build_full_hamiltonian(const SystemParams& p, double t, Frame frame) {
  const Index n = p.n_trunc;
  require_truncation(n, 2);
  const Matrix a = fock_destroy(n);
  const Matrix ad = a.adjoint();
  const Matrix id = Matrix::Identity(n, n);
  const Matrix sx = pauli(PauliAxis::x), sz = pauli(PauliAxis::z);
  const Matrix sp = pauli(PauliAxis::plus), sm = pauli(PauliAxis::minus);
  const Matrix id2 = Matrix::Identity(2, 2);
  const Index big = 2 * n;

  Matrix h = Matrix::Zero(big, big);
  switch (frame) {
    case Frame::lab: {
      const Matrix x = a + ad;
      h += p.omega_m * kron(id2, ad * a, big) + 0.5 * p.omega_q * kron(sz, id, big);
      h += p.g_x * kron(sx, x, big) + p.g_z * kron(sz, x, big);
      h += p.Omega * std::cos(p.omega_d * t) * kron(sx, id, big);
      break;
    }
    case Frame::mech_rot: {
      const Matrix x = a * phase(-p.omega_m, t) + ad * phase(p.omega_m, t);
      h += 0.5 * p.omega_q * kron(sz, id, big);
      h += p.g_x * kron(sx, x, big) + p.g_z * kron(sz, x, big);
      h += p.Omega * std::cos(p.omega_d * t) * kron(sx, id, big);
      break;
    }
    case Frame::double_rot: {
      const Matrix x = a * phase(-p.omega_m, t) + ad * phase(p.omega_m, t);
      const Matrix sx_t = sp * phase(p.omega_q, t) + sm * phase(-p.omega_q, t);
      const double eps = 0.5 * p.Omega;
      const cplx f_plus = eps * (phase(p.omega_q + p.omega_d, t) + phase(p.omega_q - p.omega_d, t));
      h += p.g_x * kron(sx_t, x, big) + p.g_z * kron(sz, x, big);
      h += kron(f_plus * sp + std::conj(f_plus) * sm, id, big);
      break;
    }
  }
  OperatorMatrix out(0.5 * (h + h.adjoint()));
  out.tag_hermitian();
  return out;
}

BandedSum full_hamiltonian_terms(const SystemParams& p, Frame frame) {
  const Index n = p.n_trunc;
  require_truncation(n, 2);
  const Index big = 2 * n;
  const Matrix a = fock_destroy(n);
  const Matrix ad = a.adjoint();
  const Matrix id = Matrix::Identity(n, n);
  const Matrix sx = pauli(PauliAxis::x), sz = pauli(PauliAxis::z);
  const Matrix sp = pauli(PauliAxis::plus), sm = pauli(PauliAxis::minus);
  const Matrix id2 = Matrix::Identity(2, 2);
  const double wm = p.omega_m, wq = p.omega_q, wd = p.omega_d;
  const double Om = p.Omega, eps = 0.5 * p.Omega;

  BandedSum h(big);
  auto add_drive_cos = [&] {
    if (Om != 0.0)
      h.add(kron(sx, id, big), [Om, wd](double t) { return cplx(Om * std::cos(wd * t), 0.0); },
            std::abs(Om));
  };
  switch (frame) {
    case Frame::lab:
      h.add(wm * kron(id2, ad * a, big) + 0.5 * wq * kron(sz, id, big), 1.0);
      if (p.g_x != 0.0) h.add(kron(sx, a + ad, big), p.g_x);
      if (p.g_z != 0.0) h.add(kron(sz, a + ad, big), p.g_z);
      add_drive_cos();
      break;
    case Frame::mech_rot:
      h.add(0.5 * wq * kron(sz, id, big), 1.0);
      for (auto [q, g] : {std::pair{sx, p.g_x}, std::pair{sz, p.g_z}}) {
        if (g == 0.0) continue;
        h.add(kron(q, a, big), [g, wm](double t) { return g * phase(-wm, t); }, std::abs(g));
        h.add(kron(q, ad, big), [g, wm](double t) { return g * phase(wm, t); }, std::abs(g));
      }
      add_drive_cos();
      break;
    case Frame::double_rot: {
      const double gx = p.g_x, gz = p.g_z;
      if (gx != 0.0) {
        h.add(kron(sp, a, big), [=](double t) { return gx * phase(wq - wm, t); }, std::abs(gx));
        h.add(kron(sp, ad, big), [=](double t) { return gx * phase(wq + wm, t); }, std::abs(gx));
        h.add(kron(sm, a, big), [=](double t) { return gx * phase(-wq - wm, t); }, std::abs(gx));
        h.add(kron(sm, ad, big), [=](double t) { return gx * phase(-wq + wm, t); }, std::abs(gx));
      }
      if (gz != 0.0) {
        h.add(kron(sz, a, big), [=](double t) { return gz * phase(-wm, t); }, std::abs(gz));
        h.add(kron(sz, ad, big), [=](double t) { return gz * phase(wm, t); }, std::abs(gz));
      }
      if (eps != 0.0) {
        h.add(kron(sp, id, big),
              [=](double t) { return eps * (phase(wq + wd, t) + phase(wq - wd, t)); },
              2.0 * std::abs(eps));
        h.add(kron(sm, id, big),
              [=](double t) { return eps * (phase(-wq - wd, t) + phase(-wq + wd, t)); },
              2.0 * std::abs(eps));
      }
      break;
    }
  }
  return h;
}

std::vector<DissipatorSpec> full_dissipators(const SystemParams& p) {
  const Index n = p.n_trunc;
  const Index big = 2 * n;
  const Matrix id = Matrix::Identity(n, n);
  const Matrix id2 = Matrix::Identity(2, 2);
  const auto [g_minus, g_plus] = gamma_rates(p);
  return {
      {p.kappa, kron(pauli(PauliAxis::minus), id, big)},
      {0.5 * p.gamma_phi, kron(pauli(PauliAxis::z), id, big)},
      {g_minus, kron(id2, fock_destroy(n), big)},
      {g_plus, kron(id2, fock_create(n), big)},
  };
}

double full_max_frequency(const SystemParams& p, Frame frame) {
  const double wm = std::abs(p.omega_m), wq = std::abs(p.omega_q), wd = std::abs(p.omega_d);
  const double drive = p.Omega != 0.0 ? wd : 0.0;
  switch (frame) {
    case Frame::lab: return wq + drive + 2.0 * wm;
    case Frame::mech_rot: return wq + drive + wm;
    case Frame::double_rot: {
      double w = 0.0;
      if (p.Omega != 0.0) w = std::max(w, wq + wd);
      if (p.g_x != 0.0) w = std::max(w, wq + wm);
      if (p.g_z != 0.0) w = std::max(w, wm);
      return w;
    }
  }
  return 0.0;
}

namespace {

BandedLindblad make_full_generator(const SystemParams& p, Frame frame) {
  std::vector<BandedJump> jumps;
  for (const auto& d : full_dissipators(p))
    if (d.rate > 0.0) jumps.push_back({d.rate, BandedOperator::from_dense(d.jump)});
  return BandedLindblad(full_hamiltonian_terms(p, frame), std::move(jumps));
}

double full_step_from(const SystemParams& p, Frame frame, const StepRule& rule,
                      double generator_bound) {
  double dt = std::numeric_limits<double>::infinity();
  const double w = full_max_frequency(p, frame);
  if (w > 0.0) dt = 2.0 * M_PI / (rule.steps_per_period * w);
  const double decay = std::max(p.kappa, gamma_rates(p).first);
  if (decay > 0.0) dt = std::min(dt, rule.decay_fraction / decay);
  if (generator_bound > 0.0) dt = std::min(dt, rule.stability_limit / generator_bound);
  return dt;
}

}  // namespace

double full_auto_step(const SystemParams& p, Frame frame, const StepRule& rule) {
  p.validate();
  BandedLindblad gen = make_full_generator(p, frame);
  return full_step_from(p, frame, rule, gen.generator_bound());
}

TrajectoryRecord propagate_full(const SystemParams& p, const DensityMatrix& rho0,
                                double t_final, Frame frame, const PropagationOptions& opts) {
  p.validate();
  const Index n = p.n_trunc;
  if (rho0.dim() != 2 * n) throw ShapeError("initial state must have dimension 2 n_trunc");
  if (!(t_final > 0.0)) throw InvalidParameter("final time must be positive");

  BandedLindblad gen = make_full_generator(p, frame);
  const double dt_max =
      opts.dt ? *opts.dt : full_step_from(p, frame, opts.rule, gen.generator_bound());

  TrajectoryRecord rec;
  rec.kappa = p.kappa;
  rec.gamma2_minus = effective_params(p).Gamma2_minus;
  auto& nbar = rec.series["mean_phonon"];
  auto& par = rec.series["parity"];
  auto& pur = rec.series["purity"];
  auto& exc = rec.series["qubit_excitation"];

  const Matrix start = 0.5 * (rho0.matrix() + rho0.matrix().adjoint());
  detail::integrate(gen, start, t_final, dt_max, opts, rec, [&](double, const Matrix& rho) {
    const Matrix m = partial_trace_qubit(rho, n);
    nbar.push_back(mean_phonon(m));
    par.push_back(parity_expectation(m));
    pur.push_back(purity(m));
    exc.push_back(rho.topLeftCorner(n, n).trace().real());
  });
  return rec;
}

OperatorMatrix sw_generator(const SystemParams& p, SwBranch branch) {
  const Index n = p.n_trunc;
  const Matrix a = fock_destroy(n);
  const double sign = branch == SwBranch::cancelling ? 1.0 : -1.0;
  return OperatorMatrix(sign * (p.g_z / p.omega_m) *
                        kron(pauli(PauliAxis::z), Matrix(a.adjoint() - a), 2 * n));
}

OperatorMatrix sw_transformed_hamiltonian(const SystemParams& p, double t, SwBranch branch) {
  SystemParams h0 = p;
  h0.g_z = 0.0;
  Matrix h = build_full_hamiltonian(h0, t, Frame::lab);
  const Index n = p.n_trunc;
  const Matrix a = fock_destroy(n);
  const Matrix ad = a.adjoint();
  const double g = p.g_x * p.g_z / p.omega_m;
  const double sign = branch == SwBranch::cancelling ? 1.0 : -1.0;
  h += sign * 2.0 * kI * g * kron(pauli(PauliAxis::y), Matrix(ad * ad - a * a), 2 * n);
  OperatorMatrix out(0.5 * (h + h.adjoint()));
  out.tag_hermitian();
  return out;
}

double sw_residual(const SystemParams& p, double t, SwBranch branch) {
  const Matrix s = sw_generator(p, branch);
  // S is anti-Hermitian, so iS is Hermitian and e^S = V e^{-i lambda} V^dagger.
  Eigen::SelfAdjointEigenSolver<Matrix> es(kI * s);
  const Eigen::VectorXcd ph =
      (-kI * es.eigenvalues().cast<cplx>()).array().exp().matrix();
  const Matrix u = es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
  const Matrix h = build_full_hamiltonian(p, t, Frame::lab);
  const Matrix transformed = u * h * u.adjoint();
  return (transformed - sw_transformed_hamiltonian(p, t, branch)).norm();
}

}  // namespace mechcat
