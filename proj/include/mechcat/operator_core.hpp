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

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mechcat/errors.hpp"

namespace mechcat {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Index = Eigen::Index;

inline constexpr cplx kI{0.0, 1.0};

/// Largest Hilbert-space dimension `kron` will produce unless told otherwise.
inline constexpr Index kDefaultMaxDim = 4096;

/**
 * Dense complex square operator on a truncated Hilbert space.
 *
 * Behaves as an Eigen matrix. Construction helpers set a Hermitian tag; the
 * tag is not propagated through arithmetic.
 */
class OperatorMatrix : public Matrix {
 public:
  OperatorMatrix() = default;
  explicit OperatorMatrix(Index dim) : Matrix(Matrix::Zero(dim, dim)) {}

  template <typename Derived>
  OperatorMatrix(const Eigen::MatrixBase<Derived>& other) : Matrix(other) {}

  template <typename Derived>
  OperatorMatrix& operator=(const Eigen::MatrixBase<Derived>& other) {
    Matrix::operator=(other);
    hermitian_tag_ = false;
    return *this;
  }

  Index dim() const { return rows(); }

  /// Max |A - A^dagger| relative to the largest entry magnitude.
  bool is_hermitian(double rel_tol = 1e-12) const;

  bool hermitian_tag() const { return hermitian_tag_; }
  OperatorMatrix& tag_hermitian(bool tag = true) {
    hermitian_tag_ = tag;
    return *this;
  }

 private:
  bool hermitian_tag_ = false;
};

/// Residuals of the density-matrix contract for one matrix.
struct StateDiagnostics {
  double hermiticity = 0.0;  ///< max |rho - rho^dagger| / max |rho|
  double trace_error = 0.0;  ///< |Tr rho - 1|
  double min_eigenvalue = 0.0;
  bool finite = true;
};

struct StateTolerances {
  double hermiticity = 1e-10;
  double trace = 1e-8;
  double min_eigenvalue = -1e-7;
};

StateDiagnostics diagnose_state(const Matrix& rho);

/**
 * Positive semidefinite, unit-trace, Hermitian matrix.
 *
 * The checked constructor enforces the contract within `StateTolerances`
 * and stores the exactly Hermitian part of the input.
 */
class DensityMatrix {
 public:
  DensityMatrix() = default;
  explicit DensityMatrix(const Matrix& rho, const StateTolerances& tol = {});

  /// Skips validation. For states produced by code that already checked them.
  static DensityMatrix trusted(Matrix rho);

  Index dim() const { return rho_.rows(); }
  const Matrix& matrix() const { return rho_; }
  cplx operator()(Index r, Index c) const { return rho_(r, c); }

  StateDiagnostics diagnostics() const { return diagnose_state(rho_); }

  static DensityMatrix pure(const Eigen::VectorXcd& psi);
  static DensityMatrix maximally_mixed(Index dim);

 private:
  Matrix rho_;
};

/// Fock-space states of the truncated oscillator.
Eigen::VectorXcd fock_ket(Index n_trunc, Index n);
/// Coherent state amplitudes with the truncated vector renormalised.
Eigen::VectorXcd coherent_ket(Index n_trunc, cplx alpha);
/// Even (+1) or odd (-1) cat N(|alpha> + sign |-alpha>), renormalised on the truncation.
Eigen::VectorXcd cat_ket(Index n_trunc, cplx alpha, int sign = +1);
DensityMatrix thermal_state(Index n_trunc, double n_th);

struct DissipatorSpec {
  double rate = 0.0;  ///< rad/s
  OperatorMatrix jump;
};

enum class PauliAxis { x, y, z, plus, minus };

/// Annihilation operator with sqrt(n) on the first superdiagonal.
OperatorMatrix fock_destroy(Index n_trunc);
OperatorMatrix fock_create(Index n_trunc);
OperatorMatrix number_operator(Index n_trunc);
OperatorMatrix identity_operator(Index dim);

/// Qubit basis order is (|e>, |g>): sigma_z = diag(+1, -1), sigma_minus = |g><e|.
OperatorMatrix pauli(PauliAxis axis);

/// Kronecker product A (x) B; qubit factors go first by convention.
OperatorMatrix kron(const Matrix& a, const Matrix& b, Index max_dim = kDefaultMaxDim);

/// Reduced oscillator state of a qubit (x) oscillator state.
DensityMatrix partial_trace_qubit(const DensityMatrix& rho, Index n_trunc);
Matrix partial_trace_qubit(const Matrix& rho, Index n_trunc);

/// -i[H, rho] + sum_k rate_k (L rho L^dagger - {L^dagger L, rho}/2), dense reference path.
Matrix lindblad_rhs(const Matrix& hamiltonian,
                    std::span<const DissipatorSpec> dissipators,
                    const Matrix& rho);

/// Diagonal (-1)^n on the Fock basis.
OperatorMatrix parity_operator(Index n_trunc);

void require_truncation(Index n_trunc, Index minimum = 2);

}  // namespace mechcat
