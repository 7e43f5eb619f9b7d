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
#include <vector>

#include "mechcat/operator_core.hpp"

namespace mechcat {

/**
 * Square operator stored by diagonals.
 *
 * Diagonal with offset k holds A(i, i + k) at index i, padded to full length
 * with zeros outside the matrix. Ladder-operator polynomials and their
 * qubit products are all narrow-banded, which makes the propagators cost
 * O(nnz * dim) per right-hand side instead of O(dim^3).
 */
class BandedOperator {
 public:
  BandedOperator() = default;
  explicit BandedOperator(Index dim) : dim_(dim) {}

  /// Keeps every diagonal holding an entry with magnitude above `drop_tol`.
  static BandedOperator from_dense(const Matrix& m, double drop_tol = 0.0);
  Matrix to_dense() const;

  Index dim() const { return dim_; }
  const std::vector<Index>& offsets() const { return offsets_; }
  const std::vector<Eigen::VectorXcd>& diagonals() const { return diags_; }
  std::vector<Eigen::VectorXcd>& diagonals() { return diags_; }

  /// Adds (or accumulates into) the diagonal at `offset`; returns its index.
  std::size_t ensure_offset(Index offset);

  BandedOperator adjoint() const;
  BandedOperator operator*(const BandedOperator& other) const;
  BandedOperator& operator*=(cplx s);
  BandedOperator& operator+=(const BandedOperator& other);

  /// out += s * A * x
  void left_multiply_add(const Matrix& x, Matrix& out, cplx s = 1.0) const;
  /// out += s * x * A
  void right_multiply_add(const Matrix& x, Matrix& out, cplx s = 1.0) const;

  /// Upper bound on the spectral norm, sqrt(||A||_1 ||A||_inf).
  double norm_bound() const;

  std::size_t nonzeros() const;

 private:
  Index dim_ = 0;
  std::vector<Index> offsets_;
  std::vector<Eigen::VectorXcd> diags_;
};

/**
 * Time-dependent operator sum_j c_j(t) A_j over a shared diagonal layout.
 *
 * `evaluate` writes the combination into a caller-owned BandedOperator so the
 * inner loop allocates nothing.
 */
class BandedSum {
 public:
  using Coefficient = std::function<cplx(double)>;

  explicit BandedSum(Index dim) : dim_(dim) {}

  /// `bound` must satisfy |coeff(t)| <= bound for all t.
  void add(const Matrix& op, Coefficient coeff, double bound);
  void add(const Matrix& op, cplx constant);

  BandedOperator layout() const;
  void evaluate(double t, BandedOperator& out) const;

  /// Bound on max_t ||H(t)||_2 from |c_j| bounds; constants use their value.
  double norm_bound() const;
  Index dim() const { return dim_; }

 private:
  struct Term {
    BandedOperator op;
    Coefficient coeff;
    cplx constant{0.0, 0.0};
    bool is_constant = false;
    double magnitude_bound = 0.0;
  };

  Index dim_;
  std::vector<Term> terms_;
  std::vector<Index> offsets_;
};

/// A jump operator with its rate, in banded form.
struct BandedJump {
  double rate = 0.0;
  BandedOperator op;
};

/**
 * Lindblad generator with a banded Hamiltonian.
 *
 * Uses rho' = G + G^dagger with G = -i H_nh rho + (1/2) sum_k r_k L_k rho L_k^dagger
 * and H_nh = H - (i/2) sum_k r_k L_k^dagger L_k. The result is Hermitian to the
 * last bit for Hermitian rho.
 */
class BandedLindblad {
 public:
  BandedLindblad(BandedSum hamiltonian, std::vector<BandedJump> jumps);

  Index dim() const { return dim_; }

  /// out = L_t(rho); `out` is resized if needed.
  void apply(double t, const Matrix& rho, Matrix& out);

  /// Bound on the spectral radius of the generator over all t.
  double generator_bound() const;

 private:
  Index dim_;
  BandedSum hamiltonian_;
  std::vector<BandedJump> jumps_;
  std::vector<BandedOperator> jump_adjoints_;
  BandedOperator k_scratch_;  // -i H_nh at the current time
  BandedOperator decay_;      // -(1/2) sum r L^dagger L
  Matrix g_, t_;
};

/// Classical fourth-order Runge-Kutta over matrices with preallocated stages.
class Rk4Stepper {
 public:
  using Rhs = std::function<void(double, const Matrix&, Matrix&)>;

  explicit Rk4Stepper(Rhs rhs) : rhs_(std::move(rhs)) {}

  void step(double t, double dt, Matrix& y);

 private:
  Rhs rhs_;
  Matrix k1_, k2_, k3_, k4_, tmp_;
};

}  // namespace mechcat
