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

#include "mechcat/banded.hpp"

#include <algorithm>
#include <cmath>

namespace mechcat {

namespace {

// Row range [lo, hi) for which column i + k stays inside the matrix.
inline void row_range(Index n, Index k, Index& lo, Index& hi) {
  lo = std::max<Index>(0, -k);
  hi = std::min<Index>(n, n - k);
}

}  // namespace

BandedOperator BandedOperator::from_dense(const Matrix& m, double drop_tol) {
  if (m.rows() != m.cols()) throw ShapeError("banded operator must be square");
  const Index n = m.rows();
  BandedOperator out(n);
  for (Index k = -(n - 1); k <= n - 1; ++k) {
    Index lo, hi;
    row_range(n, k, lo, hi);
    bool keep = false;
    for (Index i = lo; i < hi && !keep; ++i) keep = std::abs(m(i, i + k)) > drop_tol;
    if (!keep) continue;
    const std::size_t idx = out.ensure_offset(k);
    for (Index i = lo; i < hi; ++i) out.diags_[idx](i) = m(i, i + k);
  }
  return out;
}

Matrix BandedOperator::to_dense() const {
  Matrix m = Matrix::Zero(dim_, dim_);
  for (std::size_t d = 0; d < offsets_.size(); ++d) {
    Index lo, hi;
    row_range(dim_, offsets_[d], lo, hi);
    for (Index i = lo; i < hi; ++i) m(i, i + offsets_[d]) += diags_[d](i);
  }
  return m;
}

std::size_t BandedOperator::ensure_offset(Index offset) {
  if (std::abs(offset) >= dim_) throw ShapeError("diagonal offset outside matrix");
  for (std::size_t d = 0; d < offsets_.size(); ++d)
    if (offsets_[d] == offset) return d;
  offsets_.push_back(offset);
  diags_.push_back(Eigen::VectorXcd::Zero(dim_));
  return offsets_.size() - 1;
}

BandedOperator BandedOperator::adjoint() const {
  BandedOperator out(dim_);
  for (std::size_t d = 0; d < offsets_.size(); ++d) {
    const Index k = offsets_[d];
    const std::size_t idx = out.ensure_offset(-k);
    Index lo, hi;
    row_range(dim_, k, lo, hi);
    // A^dagger(i + k, i) = conj(A(i, i + k))
    for (Index i = lo; i < hi; ++i) out.diags_[idx](i + k) = std::conj(diags_[d](i));
  }
  return out;
}

BandedOperator BandedOperator::operator*(const BandedOperator& other) const {
  if (other.dim_ != dim_) throw ShapeError("banded product dimension mismatch");
  BandedOperator out(dim_);
  for (std::size_t a = 0; a < offsets_.size(); ++a) {
    for (std::size_t b = 0; b < other.offsets_.size(); ++b) {
      const Index ka = offsets_[a], kb = other.offsets_[b];
      const Index k = ka + kb;
      if (std::abs(k) >= dim_) continue;
      const std::size_t idx = out.ensure_offset(k);
      Index lo, hi;
      row_range(dim_, k, lo, hi);
      for (Index i = lo; i < hi; ++i) {
        const Index j = i + ka;  // intermediate index
        if (j < 0 || j >= dim_) continue;
        out.diags_[idx](i) += diags_[a](i) * other.diags_[b](j);
      }
    }
  }
  return out;
}

BandedOperator& BandedOperator::operator*=(cplx s) {
  for (auto& d : diags_) d *= s;
  return *this;
}

BandedOperator& BandedOperator::operator+=(const BandedOperator& other) {
  if (other.dim_ != dim_) throw ShapeError("banded sum dimension mismatch");
  for (std::size_t d = 0; d < other.offsets_.size(); ++d)
    diags_[ensure_offset(other.offsets_[d])] += other.diags_[d];
  return *this;
}

void BandedOperator::left_multiply_add(const Matrix& x, Matrix& out, cplx s) const {
  const Index n = dim_;
  const Index cols = x.cols();
  for (std::size_t d = 0; d < offsets_.size(); ++d) {
    const Index k = offsets_[d];
    Index lo, hi;
    row_range(n, k, lo, hi);
    const cplx* diag = diags_[d].data();
    if (s == cplx(1.0, 0.0)) {
      for (Index j = 0; j < cols; ++j) {
        const cplx* xc = x.data() + j * x.rows() + k;
        cplx* oc = out.data() + j * out.rows();
        for (Index i = lo; i < hi; ++i) oc[i] += diag[i] * xc[i];
      }
    } else {
      for (Index j = 0; j < cols; ++j) {
        const cplx* xc = x.data() + j * x.rows() + k;
        cplx* oc = out.data() + j * out.rows();
        for (Index i = lo; i < hi; ++i) oc[i] += s * (diag[i] * xc[i]);
      }
    }
  }
}

void BandedOperator::right_multiply_add(const Matrix& x, Matrix& out, cplx s) const {
  const Index n = dim_;
  const Index rows = x.rows();
  for (std::size_t d = 0; d < offsets_.size(); ++d) {
    const Index k = offsets_[d];
    Index lo, hi;
    row_range(n, k, lo, hi);
    // (x A)(:, i + k) += A(i, i + k) x(:, i)
    for (Index i = lo; i < hi; ++i) {
      const cplx c = s * diags_[d](i);
      if (c == cplx(0.0, 0.0)) continue;
      const cplx* xc = x.data() + i * rows;
      cplx* oc = out.data() + (i + k) * out.rows();
      for (Index r = 0; r < rows; ++r) oc[r] += c * xc[r];
    }
  }
}

double BandedOperator::norm_bound() const {
  Eigen::VectorXd row = Eigen::VectorXd::Zero(dim_), col = Eigen::VectorXd::Zero(dim_);
  for (std::size_t d = 0; d < offsets_.size(); ++d) {
    Index lo, hi;
    row_range(dim_, offsets_[d], lo, hi);
    for (Index i = lo; i < hi; ++i) {
      const double a = std::abs(diags_[d](i));
      row(i) += a;
      col(i + offsets_[d]) += a;
    }
  }
  if (dim_ == 0) return 0.0;
  return std::sqrt(row.maxCoeff() * col.maxCoeff());
}

std::size_t BandedOperator::nonzeros() const {
  std::size_t count = 0;
  for (const auto& d : diags_)
    for (Index i = 0; i < d.size(); ++i) count += (d(i) != cplx(0.0, 0.0));
  return count;
}

void BandedSum::add(const Matrix& op, Coefficient coeff, double bound) {
  if (op.rows() != dim_ || op.cols() != dim_) throw ShapeError("term dimension mismatch");
  Term term;
  term.op = BandedOperator::from_dense(op);
  term.coeff = std::move(coeff);
  term.magnitude_bound = bound;
  for (Index k : term.op.offsets())
    if (std::find(offsets_.begin(), offsets_.end(), k) == offsets_.end()) offsets_.push_back(k);
  terms_.push_back(std::move(term));
}

void BandedSum::add(const Matrix& op, cplx constant) {
  if (op.rows() != dim_ || op.cols() != dim_) throw ShapeError("term dimension mismatch");
  Term term;
  term.op = BandedOperator::from_dense(op);
  term.op *= constant;
  term.constant = constant;
  term.is_constant = true;
  term.magnitude_bound = 1.0;  // constant already folded into op
  for (Index k : term.op.offsets())
    if (std::find(offsets_.begin(), offsets_.end(), k) == offsets_.end()) offsets_.push_back(k);
  terms_.push_back(std::move(term));
}

BandedOperator BandedSum::layout() const {
  BandedOperator out(dim_);
  for (Index k : offsets_) out.ensure_offset(k);
  return out;
}

void BandedSum::evaluate(double t, BandedOperator& out) const {
  for (auto& d : out.diagonals()) d.setZero();
  for (const auto& term : terms_) {
    const cplx c = term.is_constant ? cplx(1.0, 0.0) : term.coeff(t);
    if (c == cplx(0.0, 0.0)) continue;
    const auto& offs = term.op.offsets();
    for (std::size_t d = 0; d < offs.size(); ++d) {
      const std::size_t idx = out.ensure_offset(offs[d]);
      out.diagonals()[idx] += c * term.op.diagonals()[d];
    }
  }
}

double BandedSum::norm_bound() const {
  double total = 0.0;
  for (const auto& term : terms_) total += term.magnitude_bound * term.op.norm_bound();
  return total;
}

BandedLindblad::BandedLindblad(BandedSum hamiltonian, std::vector<BandedJump> jumps)
    : dim_(hamiltonian.dim()), hamiltonian_(std::move(hamiltonian)), decay_(dim_) {
  for (auto& jump : jumps) {
    if (jump.op.dim() != dim_) throw ShapeError("jump operator dimension mismatch");
    if (!(jump.rate >= 0.0) || !std::isfinite(jump.rate))
      throw InvalidDissipator("dissipator rate must be finite and non-negative");
    if (jump.rate == 0.0) continue;
    BandedOperator adj = jump.op.adjoint();
    BandedOperator ldl = adj * jump.op;
    ldl *= cplx(-0.5 * jump.rate, 0.0);
    decay_ += ldl;
    jump_adjoints_.push_back(std::move(adj));
    jumps_.push_back(std::move(jump));
  }
  k_scratch_ = hamiltonian_.layout();
  for (Index k : decay_.offsets()) k_scratch_.ensure_offset(k);
}

void BandedLindblad::apply(double t, const Matrix& rho, Matrix& out) {
  hamiltonian_.evaluate(t, k_scratch_);
  for (auto& d : k_scratch_.diagonals()) d *= cplx(0.0, -1.0);
  k_scratch_ += decay_;

  g_.setZero(dim_, dim_);
  k_scratch_.left_multiply_add(rho, g_);
  for (std::size_t j = 0; j < jumps_.size(); ++j) {
    t_.setZero(dim_, dim_);
    jumps_[j].op.left_multiply_add(rho, t_);
    jump_adjoints_[j].right_multiply_add(t_, g_, cplx(0.5 * jumps_[j].rate, 0.0));
  }
  out.resize(dim_, dim_);
  out.noalias() = g_ + g_.adjoint();
}

double BandedLindblad::generator_bound() const {
  double bound = 2.0 * hamiltonian_.norm_bound();
  for (const auto& jump : jumps_) {
    const double l = jump.op.norm_bound();
    bound += 2.0 * jump.rate * l * l;
  }
  return bound;
}

void Rk4Stepper::step(double t, double dt, Matrix& y) {
  rhs_(t, y, k1_);
  tmp_ = y + (0.5 * dt) * k1_;
  rhs_(t + 0.5 * dt, tmp_, k2_);
  tmp_ = y + (0.5 * dt) * k2_;
  rhs_(t + 0.5 * dt, tmp_, k3_);
  tmp_ = y + dt * k3_;
  rhs_(t + dt, tmp_, k4_);
  y += (dt / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
}

}  // namespace mechcat
