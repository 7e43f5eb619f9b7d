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

#include "mechcat/operator_core.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace mechcat {

namespace {

double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

}  // namespace

void require_truncation(Index n_trunc, Index minimum) {
  if (n_trunc < minimum) {
    std::ostringstream os;
    os << "truncation " << n_trunc << " is below the minimum " << minimum;
    throw InvalidTruncation(os.str());
  }
}

bool OperatorMatrix::is_hermitian(double rel_tol) const {
  if (rows() != cols()) return false;
  const double scale = std::max(max_abs(*this), 1e-300);
  return max_abs(*this - adjoint()) <= rel_tol * scale;
}

StateDiagnostics diagnose_state(const Matrix& rho) {
  StateDiagnostics d;
  if (rho.rows() != rho.cols() || rho.rows() == 0)
    throw ShapeError("density matrix must be square and non-empty");
  if (!rho.allFinite()) {
    d.finite = false;
    d.hermiticity = d.trace_error = d.min_eigenvalue = std::nan("");
    return d;
  }
  const double scale = std::max(max_abs(rho), 1e-300);
  d.hermiticity = max_abs(rho - rho.adjoint()) / scale;
  d.trace_error = std::abs(rho.trace() - 1.0);
  Matrix herm = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(herm, Eigen::EigenvaluesOnly);
  d.min_eigenvalue = es.eigenvalues().minCoeff();
  return d;
}

DensityMatrix::DensityMatrix(const Matrix& rho, const StateTolerances& tol) {
  const StateDiagnostics d = diagnose_state(rho);
  std::ostringstream os;
  if (!d.finite) {
    os << "density matrix has non-finite entries";
  } else if (d.hermiticity > tol.hermiticity) {
    os << "density matrix is not Hermitian (residual " << d.hermiticity << ")";
  } else if (d.trace_error > tol.trace) {
    os << "density matrix trace differs from 1 by " << d.trace_error;
  } else if (d.min_eigenvalue < tol.min_eigenvalue) {
    os << "density matrix has eigenvalue " << d.min_eigenvalue;
  }
  if (!os.str().empty()) throw InvalidState(os.str());
  rho_ = 0.5 * (rho + rho.adjoint());
}

DensityMatrix DensityMatrix::trusted(Matrix rho) {
  DensityMatrix out;
  out.rho_ = std::move(rho);
  return out;
}

DensityMatrix DensityMatrix::pure(const Eigen::VectorXcd& psi) {
  const double norm = psi.norm();
  if (!(norm > 0.0)) throw InvalidState("state vector has zero norm");
  const Eigen::VectorXcd v = psi / norm;
  return trusted(v * v.adjoint());
}

DensityMatrix DensityMatrix::maximally_mixed(Index dim) {
  if (dim < 1) throw ShapeError("dimension must be positive");
  return trusted(Matrix::Identity(dim, dim) / static_cast<double>(dim));
}

Eigen::VectorXcd fock_ket(Index n_trunc, Index n) {
  require_truncation(n_trunc, 1);
  if (n < 0 || n >= n_trunc) throw InvalidState("Fock index outside truncation");
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(n_trunc);
  v(n) = 1.0;
  return v;
}

Eigen::VectorXcd coherent_ket(Index n_trunc, cplx alpha) {
  require_truncation(n_trunc, 1);
  Eigen::VectorXcd v(n_trunc);
  v(0) = 1.0;
  for (Index n = 1; n < n_trunc; ++n) v(n) = v(n - 1) * alpha / std::sqrt(double(n));
  return v / v.norm();
}

Eigen::VectorXcd cat_ket(Index n_trunc, cplx alpha, int sign) {
  if (sign != 1 && sign != -1) throw InvalidParameter("cat parity sign must be +1 or -1");
  Eigen::VectorXcd v(n_trunc);
  v(0) = 1.0;
  for (Index n = 1; n < n_trunc; ++n) v(n) = v(n - 1) * alpha / std::sqrt(double(n));
  for (Index n = 0; n < n_trunc; ++n) {
    const double s = (n % 2 == 0) ? 1.0 : -1.0;
    v(n) *= (1.0 + sign * s);
  }
  const double norm = v.norm();
  if (!(norm > 0.0)) throw InvalidState("cat state vanishes on this truncation");
  return v / norm;
}

DensityMatrix thermal_state(Index n_trunc, double n_th) {
  require_truncation(n_trunc, 1);
  if (!(n_th >= 0.0)) throw InvalidParameter("thermal occupation must be non-negative");
  Matrix rho = Matrix::Zero(n_trunc, n_trunc);
  if (n_th == 0.0) {
    rho(0, 0) = 1.0;
    return DensityMatrix::trusted(rho);
  }
  const double q = n_th / (1.0 + n_th);
  double p = 1.0, total = 0.0;
  for (Index n = 0; n < n_trunc; ++n) {
    rho(n, n) = p;
    total += p;
    p *= q;
  }
  return DensityMatrix::trusted(rho / total);
}

OperatorMatrix fock_destroy(Index n_trunc) {
  require_truncation(n_trunc, 1);
  OperatorMatrix a(n_trunc);
  for (Index n = 1; n < n_trunc; ++n) a(n - 1, n) = std::sqrt(double(n));
  return a;
}

OperatorMatrix fock_create(Index n_trunc) {
  OperatorMatrix a = fock_destroy(n_trunc);
  return OperatorMatrix(a.adjoint());
}

OperatorMatrix number_operator(Index n_trunc) {
  require_truncation(n_trunc, 1);
  OperatorMatrix n(n_trunc);
  for (Index k = 0; k < n_trunc; ++k) n(k, k) = double(k);
  n.tag_hermitian();
  return n;
}

OperatorMatrix identity_operator(Index dim) {
  if (dim < 1) throw ShapeError("dimension must be positive");
  OperatorMatrix id(Matrix::Identity(dim, dim));
  id.tag_hermitian();
  return id;
}

OperatorMatrix pauli(PauliAxis axis) {
  OperatorMatrix s(2);
  switch (axis) {
    case PauliAxis::x:
      s(0, 1) = s(1, 0) = 1.0;
      s.tag_hermitian();
      break;
    case PauliAxis::y:
      s(0, 1) = -kI;
      s(1, 0) = kI;
      s.tag_hermitian();
      break;
    case PauliAxis::z:
      s(0, 0) = 1.0;
      s(1, 1) = -1.0;
      s.tag_hermitian();
      break;
    case PauliAxis::plus:
      s(0, 1) = 1.0;  // |e><g|
      break;
    case PauliAxis::minus:
      s(1, 0) = 1.0;  // |g><e|
      break;
  }
  return s;
}

OperatorMatrix kron(const Matrix& a, const Matrix& b, Index max_dim) {
  if (a.rows() != a.cols() || b.rows() != b.cols())
    throw ShapeError("kron operands must be square");
  const Index dim = a.rows() * b.rows();
  if (dim > max_dim) {
    std::ostringstream os;
    os << "product dimension " << dim << " exceeds limit " << max_dim;
    throw CapacityError(os.str());
  }
  OperatorMatrix out(dim);
  const Index nb = b.rows();
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      if (a(i, j) != 0.0) out.block(i * nb, j * nb, nb, nb) = a(i, j) * b;
  return out;
}

Matrix partial_trace_qubit(const Matrix& rho, Index n_trunc) {
  if (rho.rows() != 2 * n_trunc || rho.cols() != 2 * n_trunc)
    throw ShapeError("state is not qubit (x) oscillator with this truncation");
  return rho.topLeftCorner(n_trunc, n_trunc) + rho.bottomRightCorner(n_trunc, n_trunc);
}

DensityMatrix partial_trace_qubit(const DensityMatrix& rho, Index n_trunc) {
  return DensityMatrix::trusted(partial_trace_qubit(rho.matrix(), n_trunc));
}

Matrix lindblad_rhs(const Matrix& hamiltonian,
                    std::span<const DissipatorSpec> dissipators,
                    const Matrix& rho) {
  const Index d = rho.rows();
  if (rho.cols() != d || hamiltonian.rows() != d || hamiltonian.cols() != d)
    throw ShapeError("Hamiltonian and state dimensions differ");
  Matrix out = -kI * (hamiltonian * rho - rho * hamiltonian);
  for (const auto& diss : dissipators) {
    if (diss.jump.rows() != d || diss.jump.cols() != d)
      throw ShapeError("jump operator dimension differs from state");
    if (!(diss.rate >= 0.0)) throw InvalidDissipator("dissipator rate must be non-negative");
    if (diss.rate == 0.0) continue;
    const Matrix& l = diss.jump;
    const Matrix ldl = l.adjoint() * l;
    out += diss.rate * (l * rho * l.adjoint() - 0.5 * (ldl * rho + rho * ldl));
  }
  return out;
}

OperatorMatrix parity_operator(Index n_trunc) {
  require_truncation(n_trunc, 1);
  OperatorMatrix p(n_trunc);
  for (Index n = 0; n < n_trunc; ++n) p(n, n) = (n % 2 == 0) ? 1.0 : -1.0;
  p.tag_hermitian();
  return p;
}

}  // namespace mechcat
