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

#include "mechcat/nz_oracle.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include "mechcat/errors.hpp"

namespace mechcat {

LadderWord LadderWord::parse(const std::string& text) {
  LadderWord w;
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) {
    if (tok == "a") {
      w.ops.push_back(false);
    } else if (tok == "a+" || tok == "ad") {
      w.ops.push_back(true);
    } else if (tok != "1") {
      throw InvalidParameter("unknown ladder token '" + tok + "'");
    }
  }
  return w;
}

LadderWord LadderWord::operator*(const LadderWord& rhs) const {
  LadderWord w = *this;
  w.ops.insert(w.ops.end(), rhs.ops.begin(), rhs.ops.end());
  return w;
}

int LadderWord::phonon_change() const {
  int c = 0;
  for (bool up : ops) c += up ? 1 : -1;
  return c;
}

std::string LadderWord::str() const {
  if (ops.empty()) return "1";
  std::string s;
  for (std::size_t i = 0; i < ops.size(); ++i) {
    if (i) s += ' ';
    s += ops[i] ? "a+" : "a";
  }
  return s;
}

Matrix LadderWord::matrix(Index n_trunc) const {
  Matrix m = Matrix::Identity(n_trunc, n_trunc);
  const Matrix a = fock_destroy(n_trunc);
  const Matrix ad = fock_create(n_trunc);
  for (bool up : ops) m = m * (up ? ad : a);
  return m;
}

namespace {

// Diagonal element <n| w |n> of a number-conserving word, evaluated without truncation.
double word_diagonal(const LadderWord& w, int n) {
  double amp = 1.0;
  int level = n;
  for (auto it = w.ops.rbegin(); it != w.ops.rend(); ++it) {
    if (*it) {
      amp *= std::sqrt(double(level + 1));
      ++level;
    } else {
      if (level == 0) return 0.0;
      amp *= std::sqrt(double(level));
      --level;
    }
  }
  return amp;
}

enum class QubitOp { plus, minus };

struct HamTerm {
  cplx c;
  double nu;
  QubitOp q;
  LadderWord b;
  bool near = true;
  std::string label;
};

Matrix qubit_matrix(QubitOp q) {
  Matrix m = Matrix::Zero(2, 2);
  if (q == QubitOp::plus) {
    m(0, 1) = 1.0;
  } else {
    m(1, 0) = 1.0;
  }
  return m;
}

std::vector<HamTerm> hamiltonian_terms(const SystemParams& p, int which) {
  const LadderWord a = LadderWord::parse("a");
  const LadderWord ad = LadderWord::parse("a+");
  const LadderWord a2 = a * a;
  const LadderWord ad2 = ad * ad;
  const double wq = p.omega_q, wm = p.omega_m, wd = p.omega_d;
  switch (which) {
    case 1: {
      const double gx = p.g_x;
      return {{gx, wq - wm, QubitOp::plus, a, true, "s+ a"},
              {gx, wq + wm, QubitOp::plus, ad, true, "s+ a+"},
              {gx, -wq - wm, QubitOp::minus, a, true, "s- a"},
              {gx, -wq + wm, QubitOp::minus, ad, true, "s- a+"}};
    }
    case 2: {
      const double g = p.g_x * p.g_z / p.omega_m;
      return {{g, wq + 2 * wm, QubitOp::plus, ad2, true, "s+ a+^2"},
              {-g, wq - 2 * wm, QubitOp::plus, a2, true, "s+ a^2"},
              {-g, -wq + 2 * wm, QubitOp::minus, ad2, true, "s- a+^2"},
              {g, -wq - 2 * wm, QubitOp::minus, a2, true, "s- a^2"}};
    }
    case 3: {
      const double eps = 0.5 * p.Omega;
      const LadderWord one;
      return {{eps, wq - wd, QubitOp::plus, one, true, "s+ e^{-i wd t}"},
              {eps, wq + wd, QubitOp::plus, one, false, "s+ e^{+i wd t}"},
              {eps, -wq + wd, QubitOp::minus, one, true, "s- e^{+i wd t}"},
              {eps, -wq - wd, QubitOp::minus, one, false, "s- e^{-i wd t}"}};
    }
    default:
      throw InvalidParameter("kernel index must be 1, 2 or 3");
  }
}

// vec(A X B) = (B^T (x) A) vec(X)
Matrix super(const Matrix& A, const Matrix& B) {
  const Index n = A.rows();
  const Index m = B.rows();
  Matrix out(n * m, n * m);
  const Matrix Bt = B.transpose();
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < m; ++j) out.block(i * n, j * n, n, n) = Bt(i, j) * A;
  return out;
}

Matrix dissipator_super(const Matrix& L) {
  const Matrix LdL = L.adjoint() * L;
  const Matrix I = Matrix::Identity(L.rows(), L.rows());
  return super(L, L.adjoint()) - 0.5 * super(LdL, I) - 0.5 * super(I, LdL);
}

// Spectral data of the bare qubit Liouvillian, reused for every term.
struct QubitPropagator {
  Eigen::VectorXcd lambda;
  Matrix V, Vinv;

  explicit QubitPropagator(const SystemParams& p) {
    Matrix L0 = p.kappa * dissipator_super(qubit_matrix(QubitOp::minus));
    Matrix sz = Matrix::Zero(2, 2);
    sz(0, 0) = 1.0;
    sz(1, 1) = -1.0;
    L0 += 0.5 * p.gamma_phi * dissipator_super(sz);
    Eigen::ComplexEigenSolver<Matrix> es(L0);
    if (es.info() != Eigen::Success) throw AssemblyError("qubit Liouvillian eigendecomposition failed");
    lambda = es.eigenvalues();
    V = es.eigenvectors();
    Vinv = V.inverse();
  }

  // int_0^inf e^{-i nu tau} Tr(Q e^{L0 tau} X) dtau
  cplx integral(const Matrix& Q, const Matrix& X, double nu) const {
    Eigen::VectorXcd qrow(4), xv(4);
    const Matrix Qt = Q.transpose();
    for (Index j = 0; j < 2; ++j)
      for (Index i = 0; i < 2; ++i) {
        qrow(i + 2 * j) = Qt(i, j);
        xv(i + 2 * j) = X(i, j);
      }
    const Eigen::VectorXcd left = V.transpose() * qrow;
    const Eigen::VectorXcd right = Vinv * xv;
    cplx total = 0.0;
    for (Index mu = 0; mu < 4; ++mu) {
      const cplx w = left(mu) * right(mu);
      if (std::abs(w) < 1e-14) continue;
      const cplx denom = kI * nu - lambda(mu);
      if (lambda(mu).real() > -1e-300 || std::abs(denom) == 0.0)
        throw AssemblyError("tau integral does not converge: undamped qubit mode");
      total += w / denom;
    }
    return total;
  }
};

}  // namespace

cplx response_integral_numeric(double Delta, double kappa) {
  if (!(kappa > 0.0)) throw InvalidParameter("response integral needs kappa > 0");
  auto boole = [&](double tau_max) {
    const double h_max = 2.0 * M_PI / (40.0 * std::max(std::abs(Delta), kappa));
    std::size_t panels = std::size_t(std::ceil(tau_max / (4.0 * h_max)));
    panels = std::max<std::size_t>(panels, 1);
    const double h = tau_max / double(4 * panels);
    const cplx s(-0.5 * kappa, -Delta);
    // Weights 7, 32, 12, 32, 7 per panel; the step factor e^{s h} is applied incrementally.
    const cplx step = std::exp(s * h);
    cplx f = 1.0, sum = 0.0;
    for (std::size_t k = 0; k < panels; ++k) {
      const cplx f0 = f, f1 = f0 * step, f2 = f1 * step, f3 = f2 * step, f4 = f3 * step;
      sum += 7.0 * f0 + 32.0 * f1 + 12.0 * f2 + 32.0 * f3 + 7.0 * f4;
      f = f4;
      if ((k & 1023) == 1023) f = std::exp(s * (h * 4.0 * double(k + 1)));
    }
    return sum * (2.0 * h / 45.0);
  };
  const double tau_max = 40.0 / kappa;
  const cplx r1 = boole(tau_max);
  const cplx r2 = boole(2.0 * tau_max);
  if (std::abs(r2 - r1) > 1e-8 * std::abs(r2))
    throw QuadratureError("response integral not converged on [0, 40/kappa]");
  return r1;
}

std::vector<KernelTerm> enumerate_kernel(const SystemParams& p, int i, int j) {
  if (!(p.kappa > 0.0)) throw InvalidParameter("kernel assembly needs kappa > 0");
  if (!(p.omega_m > 0.0)) throw InvalidParameter("kernel assembly needs omega_m > 0");
  const auto outer = hamiltonian_terms(p, i);
  const auto inner = hamiltonian_terms(p, j);
  const QubitPropagator prop(p);
  Matrix Pg = Matrix::Zero(2, 2);
  Pg(1, 1) = 1.0;

  std::vector<KernelTerm> out;
  for (const auto& k : outer) {
    const Matrix Qk = qubit_matrix(k.q);
    for (const auto& l : inner) {
      const Matrix Ql = qubit_matrix(l.q);
      const cplx R1 = prop.integral(Qk, Ql * Pg, l.nu);
      const cplx R2 = prop.integral(Qk, Pg * Ql, l.nu);
      const cplx c = k.c * l.c;
      const std::string origin = "[" + k.label + "] x [" + l.label + "]";
      auto push = [&](cplx response, double sign, Placement pl, const LadderWord& L,
                      const LadderWord& R) {
        if (std::abs(response) == 0.0) return;
        KernelTerm t;
        t.qubit_phase = l.nu;
        t.t_phase = k.nu + l.nu;
        t.coupling = c;
        t.response = response;
        t.prefactor = -sign * c * response;
        t.placement = pl;
        t.left = L;
        t.right = R;
        // An identity factor turns a sandwich into a one-sided product.
        if (pl == Placement::sandwich && L.ops.empty()) t.placement = Placement::right;
        if (pl == Placement::sandwich && R.ops.empty()) t.placement = Placement::left;
        t.near_resonant = k.near && l.near;
        t.origin = origin;
        out.push_back(std::move(t));
      };
      // -c [ R1 (Bk Bl rho - Bl rho Bk) - R2 (Bk rho Bl - rho Bl Bk) ]
      push(R1, +1.0, Placement::left, k.b * l.b, {});
      push(R1, -1.0, Placement::sandwich, l.b, k.b);
      push(R2, -1.0, Placement::sandwich, k.b, l.b);
      push(R2, +1.0, Placement::right, {}, l.b * k.b);
    }
  }
  return out;
}

SecularSplit secular_filter(const std::vector<KernelTerm>& terms, double threshold, double kappa) {
  SecularSplit s;
  s.min_discarded_phase = std::numeric_limits<double>::infinity();
  for (const auto& t : terms) {
    const double ph = std::abs(t.t_phase);
    if (ph < threshold) {
      s.retained.push_back(t);
      s.max_retained_phase = std::max(s.max_retained_phase, ph);
    } else {
      s.discarded.push_back(t);
      s.min_discarded_phase = std::min(s.min_discarded_phase, ph);
    }
  }
  // Resonance-cancelled phases are exact zeros up to rounding of the frequencies.
  const double zero_tol = 1e-9 * threshold;
  for (const auto& t : terms) {
    const double ph = std::abs(t.t_phase);
    if (ph > zero_tol && ph < 10.0 * kappa) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "near-degenerate phase %.6g rad/s (< 10 kappa) in %s", ph,
                    t.origin.c_str());
      s.warnings.emplace_back(buf);
      break;
    }
  }
  return s;
}

namespace {

struct Readout {
  // Coefficient polynomial of the left operator K(n), lowest order first.
  std::vector<cplx> K;
  std::map<std::pair<std::string, std::string>, cplx> sandwich;
};

double scale_of(const std::vector<KernelTerm>& terms) {
  double s = 0.0;
  for (const auto& t : terms) s = std::max(s, std::abs(t.prefactor));
  return s > 0.0 ? s : 1.0;
}

// Reduces retained secular terms to K(n) and sandwich coefficients; checks that
// rho R equals (K rho)^dagger so the result is a Lindblad generator.
Readout read_out(const std::vector<KernelTerm>& terms) {
  Readout r;
  const double scale = scale_of(terms);
  constexpr int kSamples = 8;
  std::vector<cplx> Kn(kSamples, 0.0), Rn(kSamples, 0.0);
  for (const auto& t : terms) {
    if (t.placement == Placement::sandwich) {
      r.sandwich[{t.left.str(), t.right.str()}] += t.prefactor;
      continue;
    }
    const LadderWord& w = t.placement == Placement::left ? t.left : t.right;
    if (w.phonon_change() != 0)
      throw AssemblyError("secular term changes phonon number: " + w.str() + " from " + t.origin);
    auto& dst = t.placement == Placement::left ? Kn : Rn;
    for (int n = 0; n < kSamples; ++n) dst[n] += t.prefactor * word_diagonal(w, n);
  }
  for (int n = 0; n < kSamples; ++n)
    if (std::abs(Rn[n] - std::conj(Kn[n])) > 1e-12 * scale * (1 + n * n))
      throw AssemblyError("right-multiplied part is not the adjoint of the left part");
  // Quadratic through n = 0, 1, 2, then verified on the remaining samples.
  const cplx c0 = Kn[0];
  const cplx c2 = 0.5 * (Kn[2] - 2.0 * Kn[1] + Kn[0]);
  const cplx c1 = Kn[1] - Kn[0] - c2;
  for (int n = 3; n < kSamples; ++n) {
    const cplx fit = c0 + c1 * double(n) + c2 * double(n * n);
    if (std::abs(fit - Kn[n]) > 1e-12 * scale * (1 + n * n))
      throw AssemblyError("left operator is not quadratic in the number operator");
  }
  r.K = {c0, c1, c2};
  return r;
}

double take_rate(Readout& r, const char* left, const char* right, double scale) {
  auto it = r.sandwich.find({left, right});
  if (it == r.sandwich.end()) return 0.0;
  const cplx v = it->second;
  r.sandwich.erase(it);
  if (std::abs(v.imag()) > 1e-12 * scale)
    throw AssemblyError(std::string("complex jump coefficient for ") + left + " rho " + right);
  return v.real();
}

void require_consumed(const Readout& r, double scale) {
  for (const auto& [key, v] : r.sandwich)
    if (std::abs(v) > 1e-12 * scale)
      throw AssemblyError("unexpected sandwich term " + key.first + " rho " + key.second);
}

void require_close(cplx a, cplx b, double scale, const char* what) {
  if (std::abs(a - b) > 1e-10 * scale)
    throw AssemblyError(std::string("inconsistent dissipative part: ") + what);
}

}  // namespace

M11Result assemble_M11(const SystemParams& p, double threshold_scale) {
  M11Result res;
  res.split = secular_filter(enumerate_kernel(p, 1, 1), threshold_scale * p.omega_m, p.kappa);
  const double scale = scale_of(res.split.retained);
  Readout r = read_out(res.split.retained);
  res.Gamma1_minus = take_rate(r, "a", "a+", scale);
  res.Gamma1_plus = take_rate(r, "a+", "a", scale);
  require_consumed(r, scale);
  // K(n) = -i delta1 n - (Gamma1_- n + Gamma1_+ (n + 1)) / 2 + const
  res.delta1 = -r.K[1].imag();
  require_close(r.K[1].real(), -0.5 * (res.Gamma1_minus + res.Gamma1_plus), scale, "n term");
  require_close(r.K[2], 0.0, scale, "n^2 term");
  return res;
}

M22Result assemble_M22(const SystemParams& p, double threshold_scale) {
  M22Result res;
  res.split = secular_filter(enumerate_kernel(p, 2, 2), threshold_scale * 2.0 * p.omega_m, p.kappa);
  const double scale = scale_of(res.split.retained);
  Readout r = read_out(res.split.retained);
  res.Gamma2_minus = take_rate(r, "a a", "a+ a+", scale);
  res.Gamma2_plus = take_rate(r, "a+ a+", "a a", scale);
  require_consumed(r, scale);
  // a+^2 a^2 = n^2 - n and a^2 a+^2 = n^2 + 3n + 2
  res.delta2 = -r.K[1].imag();
  res.delta_k = -r.K[2].imag();
  require_close(r.K[2].real(), -0.5 * (res.Gamma2_minus + res.Gamma2_plus), scale, "n^2 term");
  require_close(r.K[1].real(), -0.5 * (-res.Gamma2_minus + 3.0 * res.Gamma2_plus), scale,
                "n term");
  return res;
}

M23Result assemble_M23(const SystemParams& p, double threshold_scale) {
  M23Result res;
  res.split = secular_filter(enumerate_kernel(p, 2, 3), threshold_scale * p.omega_m, p.kappa);
  const double scale = scale_of(res.split.retained);
  cplx near_a2 = 0.0, near_ad2 = 0.0, far_a2 = 0.0, far_ad2 = 0.0;
  cplx right_a2 = 0.0;
  for (const auto& t : res.split.retained) {
    if (t.placement == Placement::sandwich)
      throw AssemblyError("drive cross kernel produced a sandwich term");
    const LadderWord& w = t.placement == Placement::left ? t.left : t.right;
    const std::string s = w.str();
    if (s != "a a" && s != "a+ a+")
      throw AssemblyError("drive cross kernel produced word " + s);
    if (t.placement == Placement::right) {
      if (s == "a a" && t.near_resonant) right_a2 += t.prefactor;
      continue;
    }
    cplx& dst = s == "a a" ? (t.near_resonant ? near_a2 : far_a2)
                           : (t.near_resonant ? near_ad2 : far_ad2);
    dst += t.prefactor;
  }
  // -i [chi a^2 + chi* a+^2, rho]: left a^2 coefficient is -i chi, right is +i chi.
  res.chi = kI * near_a2;
  res.chi_far = kI * far_a2;
  require_close(right_a2, -near_a2, scale, "commutator structure");
  require_close(near_ad2, -kI * std::conj(res.chi), scale, "a+^2 coefficient");
  require_close(far_ad2, -kI * std::conj(res.chi_far), scale, "far a+^2 coefficient");
  const double h = 0.5 * p.kappa + p.gamma_phi;
  const double near_mag = 1.0 / std::hypot(h, p.omega_d - p.omega_q);
  const double far_mag = 1.0 / std::hypot(h, p.omega_d + p.omega_q);
  res.far_ratio = far_mag / near_mag;
  return res;
}

Matrix kernel_superoperator(const std::vector<KernelTerm>& terms, Index n_trunc, double t) {
  const Index d = n_trunc * n_trunc;
  Matrix out = Matrix::Zero(d, d);
  const Matrix I = Matrix::Identity(n_trunc, n_trunc);
  for (const auto& term : terms) {
    const cplx c = term.prefactor * std::exp(kI * term.t_phase * t);
    switch (term.placement) {
      case Placement::left:
        out += c * super(term.left.matrix(n_trunc), I);
        break;
      case Placement::right:
        out += c * super(I, term.right.matrix(n_trunc));
        break;
      case Placement::sandwich:
        out += c * super(term.left.matrix(n_trunc), term.right.matrix(n_trunc));
        break;
    }
  }
  return out;
}

bool ProofReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass; });
}

std::string ProofReport::text() const {
  std::string s;
  char buf[256];
  for (const auto& c : checks) {
    std::snprintf(buf, sizeof buf, "%-44s closed=%.3e oracle=%.3e residual=%.3e tol=%.1e %s\n",
                  c.name.c_str(), c.closed_form, c.oracle, c.residual, c.tolerance,
                  c.pass ? "PASS" : "FAIL");
    s += buf;
  }
  return s;
}

ProofReport verify_M32_zero(unsigned seed, int random_draws) {
  ProofReport report;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  auto random_matrix = [&](Index n) {
    Matrix m(n, n);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) m(i, j) = cplx(normal(rng), normal(rng));
    return m;
  };
  constexpr double kTol = 1e-14;
  auto add = [&](std::string name, double oracle, double norm) {
    IdentityCheck c;
    c.name = std::move(name);
    c.closed_form = 0.0;
    c.oracle = oracle;
    c.residual = norm > 0.0 ? std::abs(oracle) / norm : std::abs(oracle);
    c.tolerance = kTol;
    c.pass = c.residual < kTol;
    report.checks.push_back(std::move(c));
  };

  Matrix sz = Matrix::Zero(2, 2);
  sz(0, 0) = 1.0;
  sz(1, 1) = -1.0;
  const std::pair<const char*, Matrix> drive_factors[] = {
      {"s+", qubit_matrix(QubitOp::plus)}, {"s-", qubit_matrix(QubitOp::minus)}};
  const std::pair<const char*, Matrix> named[] = {
      {"s+", qubit_matrix(QubitOp::plus)}, {"s-", qubit_matrix(QubitOp::minus)}, {"sz", sz}};

  // The drive acts as Q (x) 1, so Tr_q [Q (x) 1, X (x) Y] = Tr[Q, X] Y.
  for (const auto& [qn, Q] : drive_factors) {
    for (const auto& [xn, X] : named) {
      const Matrix c = Q * X - X * Q;
      add(std::string("Tr[") + qn + ", " + xn + "]", std::abs(c.trace()),
          Q.norm() * X.norm());
    }
    double worst = 0.0;
    for (int k = 0; k < random_draws; ++k) {
      const Matrix X = random_matrix(2);
      const Matrix c = Q * X - X * Q;
      worst = std::max(worst, std::abs(c.trace()) / (Q.norm() * X.norm()));
    }
    add(std::string("Tr[") + qn + ", X] over random X", worst, 1.0);
  }

  // Full tensor check of the partial trace on a small mechanical space.
  constexpr Index kMech = 6;
  double worst = 0.0;
  for (int k = 0; k < std::max(1, random_draws / 10); ++k) {
    const Matrix X = random_matrix(2);
    const Matrix Y = random_matrix(kMech);
    for (const auto& [qn, Q] : drive_factors) {
      (void)qn;
      const Matrix A = kron(Q, Matrix::Identity(kMech, kMech));
      const Matrix B = kron(X, Y);
      const Matrix reduced = partial_trace_qubit(Matrix(A * B - B * A), kMech);
      worst = std::max(worst, reduced.norm() / (A.norm() * B.norm()));
    }
  }
  add("||Tr_q[Q (x) 1, X (x) Y]||_F over random X, Y", worst, 1.0);
  return report;
}

}  // namespace mechcat
