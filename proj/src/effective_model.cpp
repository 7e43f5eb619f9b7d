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

#include "mechcat/effective_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "mechcat/observables.hpp"
#include "propagate_impl.hpp"

namespace mechcat {

double half_linewidth(const SystemParams& p) { return 0.5 * p.kappa + p.gamma_phi; }

ResponseFunctions response_functions(const SystemParams& p) {
  if (!(p.kappa > 0.0)) throw InvalidParameter("kappa must be positive");
  const double h = half_linewidth(p);
  auto s = [h](double delta) { return 1.0 / cplx(h, delta); };
  return {s(p.omega_q - p.omega_m), s(p.omega_q + p.omega_m), s(p.omega_q - 2.0 * p.omega_m),
          s(p.omega_q + 2.0 * p.omega_m)};
}

EffectiveParams effective_params(const SystemParams& p) {
  const ResponseFunctions r = response_functions(p);
  EffectiveParams e;
  e.S_minus = r.S_minus;
  e.S_plus = r.S_plus;
  e.S2_minus = r.S2_minus;
  e.S2_plus = r.S2_plus;
  e.Delta_minus = p.omega_q - p.omega_m;
  e.Delta_plus = p.omega_q + p.omega_m;
  e.Delta2_minus = p.omega_q - 2.0 * p.omega_m;
  e.Delta2_plus = p.omega_q + 2.0 * p.omega_m;
  e.Delta_d = p.omega_q - p.omega_d;
  e.g = p.g_x * p.g_z / p.omega_m;
  e.eps = 0.5 * p.Omega;

  const double gx2 = p.g_x * p.g_x, g2 = e.g * e.g;
  e.Gamma1_minus = 2.0 * gx2 * r.S_minus.real();
  e.Gamma1_plus = 2.0 * gx2 * r.S_plus.real();
  e.Gamma2_minus = 2.0 * g2 * r.S2_minus.real();
  e.Gamma2_plus = 2.0 * g2 * r.S2_plus.real();
  e.delta1 = gx2 * (r.S_minus.imag() + r.S_plus.imag());
  e.delta2 = g2 * (-r.S2_minus.imag() + 3.0 * r.S2_plus.imag());
  e.delta_k = g2 * (r.S2_minus.imag() + r.S2_plus.imag());
  e.chi = -kI * e.eps * e.g / cplx(half_linewidth(p), -e.Delta_d);
  e.omega_m_eff = p.omega_m + e.delta1 + e.delta2;
  return e;
}

EffectiveParams scale_two_phonon(EffectiveParams e, double factor) {
  const double f2 = factor * factor;
  e.omega_m_eff += (f2 - 1.0) * e.delta2;
  e.g *= factor;
  e.chi *= factor;
  e.Gamma2_minus *= f2;
  e.Gamma2_plus *= f2;
  e.delta2 *= f2;
  e.delta_k *= f2;
  return e;
}

double frame_detuning(const EffectiveParams& e, bool include_frame_term) {
  return include_frame_term ? e.delta1 + e.delta2 : 0.0;
}

OperatorMatrix effective_hamiltonian(const EffectiveParams& e, Index n_trunc,
                                     bool include_frame_term) {
  require_truncation(n_trunc, 2);
  const Matrix a = fock_destroy(n_trunc);
  const Matrix ad = a.adjoint();
  const Matrix n = ad * a;
  Matrix h = frame_detuning(e, include_frame_term) * n + e.chi * (a * a) +
             std::conj(e.chi) * (ad * ad) + e.delta_k * (n * n);
  OperatorMatrix out(0.5 * (h + h.adjoint()));
  out.tag_hermitian();
  return out;
}

std::vector<DissipatorSpec> effective_dissipators(const EffectiveParams& e,
                                                  const SystemParams& p) {
  const Index n = p.n_trunc;
  const Matrix a = fock_destroy(n);
  const Matrix ad = a.adjoint();
  const auto [g_minus, g_plus] = gamma_rates(p);
  return {
      {e.Gamma1_minus + g_minus, a},
      {e.Gamma1_plus + g_plus, ad},
      {e.Gamma2_minus, a * a},
      {e.Gamma2_plus, ad * ad},
  };
}

Matrix build_effective_liouvillian(const EffectiveParams& e, const SystemParams& p,
                                   bool include_frame_term) {
  const Index n = p.n_trunc;
  require_truncation(n, 4);
  const Index big = n * n;
  const Matrix id = Matrix::Identity(n, n);
  const Matrix h = effective_hamiltonian(e, n, include_frame_term);
  Matrix l = -kI * (kron(id, h, big) - kron(h.transpose(), id, big));
  for (const auto& d : effective_dissipators(e, p)) {
    if (d.rate < 0.0) throw InvalidDissipator("negative effective rate");
    if (d.rate == 0.0) continue;
    const Matrix& j = d.jump;
    const Matrix ldl = j.adjoint() * j;
    l += d.rate * (kron(j.conjugate(), j, big) - 0.5 * kron(id, ldl, big) -
                   0.5 * kron(ldl.transpose(), id, big));
  }
  return l;
}

BandedLindblad effective_generator(const EffectiveParams& e, const SystemParams& p,
                                   bool include_frame_term) {
  const Index n = p.n_trunc;
  require_truncation(n, 4);
  BandedSum h(n);
  h.add(effective_hamiltonian(e, n, include_frame_term), 1.0);
  std::vector<BandedJump> jumps;
  for (const auto& d : effective_dissipators(e, p)) {
    if (d.rate < 0.0) throw InvalidDissipator("negative effective rate");
    if (d.rate > 0.0) jumps.push_back({d.rate, BandedOperator::from_dense(d.jump)});
  }
  return BandedLindblad(std::move(h), std::move(jumps));
}

namespace {

double effective_step_from(const EffectiveParams& e, const SystemParams& p,
                           const StepRule& rule, double bound) {
  const auto [g_minus, g_plus] = gamma_rates(p);
  const double n2 = double(p.n_trunc) * double(p.n_trunc);
  const double rate =
      std::max({std::abs(e.chi), e.Gamma2_minus, e.Gamma2_plus, e.Gamma1_minus + g_minus,
                e.Gamma1_plus + g_plus, g_minus, std::abs(e.delta_k) * n2,
                std::abs(e.delta1 + e.delta2)});
  double dt = rate > 0.0 ? rule.rate_fraction / rate : std::numeric_limits<double>::infinity();
  if (bound > 0.0) dt = std::min(dt, rule.stability_limit / bound);
  if (!std::isfinite(dt)) throw InvalidParameter("effective model has no dynamics to set a step");
  return dt;
}

}  // namespace

double effective_auto_step(const EffectiveParams& e, const SystemParams& p,
                           const StepRule& rule, bool include_frame_term) {
  BandedLindblad gen = effective_generator(e, p, include_frame_term);
  return effective_step_from(e, p, rule, gen.generator_bound());
}

TrajectoryRecord propagate_effective(const EffectiveParams& e, const SystemParams& p,
                                     const DensityMatrix& rho0_m, double t_final,
                                     const PropagationOptions& opts, bool include_frame_term) {
  if (rho0_m.dim() != p.n_trunc) throw ShapeError("initial state must have dimension n_trunc");
  if (!(t_final > 0.0)) throw InvalidParameter("final time must be positive");
  BandedLindblad gen = effective_generator(e, p, include_frame_term);
  const double dt_max =
      opts.dt ? *opts.dt : effective_step_from(e, p, opts.rule, gen.generator_bound());

  TrajectoryRecord rec;
  rec.kappa = p.kappa;
  rec.gamma2_minus = e.Gamma2_minus;
  auto& nbar = rec.series["mean_phonon"];
  auto& par = rec.series["parity"];
  auto& pur = rec.series["purity"];
  const Matrix start = 0.5 * (rho0_m.matrix() + rho0_m.matrix().adjoint());
  detail::integrate(gen, start, t_final, dt_max, opts, rec, [&](double, const Matrix& rho) {
    nbar.push_back(mean_phonon(rho));
    par.push_back(parity_expectation(rho));
    pur.push_back(purity(rho));
  });
  return rec;
}

Matrix rotate_phase_space(const Matrix& rho_m, double theta) {
  Matrix out = rho_m;
  for (Index j = 0; j < out.cols(); ++j)
    for (Index i = 0; i < out.rows(); ++i) out(i, j) *= std::polar(1.0, -theta * double(i - j));
  return out;
}

double generator_frobenius_norm(BandedLindblad& gen) {
  const Index n = gen.dim();
  Matrix basis = Matrix::Zero(n, n), out;
  double total = 0.0;
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      basis(i, j) = 1.0;
      // apply() assumes a Hermitian argument: G + G^dagger. Split E_ij into
      // Hermitian parts so the superoperator column is exact.
      if (i == j) {
        gen.apply(0.0, basis, out);
        total += out.squaredNorm();
      } else {
        Matrix herm = Matrix::Zero(n, n), anti = Matrix::Zero(n, n), o2;
        herm(i, j) = herm(j, i) = 0.5;
        anti(i, j) = cplx(0.0, -0.5);
        anti(j, i) = cplx(0.0, 0.5);
        gen.apply(0.0, herm, out);
        gen.apply(0.0, anti, o2);
        total += (out + kI * o2).squaredNorm();  // E_ij = herm + i anti
      }
      basis(i, j) = 0.0;
    }
  }
  return std::sqrt(total);
}

namespace {

double relative_residual(BandedLindblad& gen, const Matrix& rho, double norm_l) {
  Matrix out;
  gen.apply(0.0, rho, out);
  return norm_l > 0.0 ? out.norm() / norm_l : out.norm();
}

DensityMatrix normalise(Matrix rho) {
  rho = 0.5 * (rho + rho.adjoint());
  const cplx tr = rho.trace();
  if (std::abs(tr) == 0.0) throw DegenerateSteadyState("stationary vector has zero trace");
  return DensityMatrix::trusted(rho / tr.real());
}

SteadyStateResult steady_by_propagation(const EffectiveParams& e, const SystemParams& p,
                                        const SteadyStateOptions& opts) {
  const Index n = p.n_trunc;
  BandedLindblad gen = effective_generator(e, p, opts.include_frame_term);
  const double norm_l = generator_frobenius_norm(gen);
  const double dt_max = effective_step_from(e, p, opts.rule, gen.generator_bound());

  const double scale = e.Gamma2_minus > 0.0
                           ? e.Gamma2_minus
                           : std::max({e.Gamma1_minus + gamma_rates(p).first, std::abs(e.chi),
                                       e.Gamma2_plus, 1e-300});
  const double chunk = opts.chunk_time > 0.0 ? opts.chunk_time : 1.0 / scale;
  const double max_time = opts.max_time > 0.0 ? opts.max_time : 200.0 / scale;
  const auto [steps, dt] = fit_steps(chunk, dt_max);

  Matrix rho;
  if (opts.initial) {
    if (opts.initial->dim() != n) throw ShapeError("initial state must have dimension n_trunc");
    rho = opts.initial->matrix();
  } else {
    rho = Matrix::Zero(n, n);
    rho(0, 0) = 1.0;
  }

  Rk4Stepper stepper([&gen](double t, const Matrix& y, Matrix& out) { gen.apply(t, y, out); });
  SteadyStateResult res;
  res.residual = relative_residual(gen, rho, norm_l);
  double t = 0.0;
  while (res.residual >= opts.residual_tol && t < max_time) {
    for (std::size_t s = 0; s < steps; ++s) stepper.step(t + double(s) * dt, dt, rho);
    t += chunk;
    if (!rho.allFinite()) throw NumericalOverflow("steady-state propagation diverged", t);
    res.residual = relative_residual(gen, rho, norm_l);
  }
  res.elapsed_time = t;
  res.converged = res.residual < opts.residual_tol;
  res.state = normalise(rho);
  return res;
}

SteadyStateResult steady_by_null_space(const EffectiveParams& e, const SystemParams& p,
                                       const SteadyStateOptions& opts) {
  const Index n = p.n_trunc;
  if (n > opts.max_null_space_dim) {
    std::ostringstream os;
    os << "null-space steady state limited to n_trunc <= " << opts.max_null_space_dim;
    throw CapacityError(os.str());
  }
  const Matrix l = build_effective_liouvillian(e, p, opts.include_frame_term);
  Eigen::ComplexEigenSolver<Matrix> ces(l);
  if (ces.info() != Eigen::Success) throw NumericalError("Liouvillian eigendecomposition failed");
  const Eigen::VectorXcd& lam = ces.eigenvalues();
  const double scale = lam.cwiseAbs().maxCoeff();

  std::vector<Index> zero;
  Index smallest = 0;
  for (Index k = 0; k < lam.size(); ++k) {
    if (std::abs(lam(k)) < std::abs(lam(smallest))) smallest = k;
    if (std::abs(lam(k)) < opts.null_tol * scale) zero.push_back(k);
  }

  SteadyStateResult res;
  res.null_dimension = Index(zero.size());
  Eigen::VectorXcd v;
  if (zero.size() <= 1) {
    // The eigenvector is only as accurate as the non-normal eigensolver; solve
    // L rho = 0 with the rho(0,0) row replaced by the trace condition instead.
    // Trace preservation makes the diagonal rows dependent, so nothing is lost.
    Matrix constrained = l;
    constrained.row(0).setZero();
    for (Index i = 0; i < n; ++i) constrained(0, i + n * i) = 1.0;
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n * n);
    rhs(0) = 1.0;
    v = constrained.partialPivLu().solve(rhs);
    if (!v.allFinite()) v = ces.eigenvectors().col(zero.empty() ? smallest : zero.front());
  } else {
    if (!opts.initial) {
      std::ostringstream os;
      os << zero.size() << " stationary modes; supply an initial state to pick the sector";
      throw DegenerateSteadyState(os.str());
    }
    if (opts.initial->dim() != n) throw ShapeError("initial state must have dimension n_trunc");
    const Eigen::VectorXcd rho0 =
        Eigen::Map<const Eigen::VectorXcd>(opts.initial->matrix().data(), n * n);
    // Spectral projector onto the stationary eigenspace, applied to rho0.
    const Eigen::VectorXcd c = ces.eigenvectors().partialPivLu().solve(rho0);
    v = Eigen::VectorXcd::Zero(n * n);
    for (Index k : zero) v += c(k) * ces.eigenvectors().col(k);
  }
  Matrix rho = Eigen::Map<const Matrix>(v.data(), n, n);
  res.state = normalise(rho);
  BandedLindblad gen = effective_generator(e, p, opts.include_frame_term);
  res.residual = relative_residual(gen, res.state.matrix(), generator_frobenius_norm(gen));
  res.converged = res.residual < opts.residual_tol;
  return res;
}

}  // namespace

SteadyStateResult steady_state(const EffectiveParams& e, const SystemParams& p,
                               const SteadyStateOptions& opts) {
  return opts.method == SteadyMethod::propagation ? steady_by_propagation(e, p, opts)
                                                  : steady_by_null_space(e, p, opts);
}

}  // namespace mechcat
