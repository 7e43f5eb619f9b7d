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

#include "mechcat/observables.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <unistd.h>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace mechcat {

void WignerGridSpec::validate() const {
  if (!(x_min < x_max) || !(p_min < p_max)) throw InvalidParameter("empty Wigner window");
  if (nx < 2 || np < 2) throw InvalidParameter("Wigner grid needs at least 2 points per axis");
}

double WignerGrid::integral() const { return values.sum() * spec.dx() * spec.dp(); }

namespace {

/**
 * Wigner value at one point. For m = n + d the |m><n| kernel is
 *   (1/pi) (-1)^n sqrt(n!/m!) (sqrt(2)(x - ip))^d e^{-r^2} L_n^{(d)}(2 r^2),
 * evaluated with u_n = sqrt(n!/(n+d)!) L_n^{(d)} from the three-term recurrence
 * and the d-dependent magnitude folded into one log-domain prefactor.
 */
double wigner_kernel_sum(const Matrix& rho, double x, double p) {
  const Index n_max = rho.rows();
  const double r2 = x * x + p * p;
  const double z = 2.0 * r2;
  const double log_rho = r2 > 0.0 ? 0.5 * std::log(z) : -INFINITY;  // log(sqrt(2) r)
  const double phi = std::atan2(-p, x);                            // arg(x - ip)
  double total = 0.0;
  for (Index d = 0; d < n_max; ++d) {
    double log_pref;
    if (d == 0) {
      log_pref = -r2;
    } else {
      if (r2 == 0.0) break;  // every off-diagonal kernel vanishes at the origin
      log_pref = double(d) * log_rho - 0.5 * std::lgamma(double(d) + 1.0) - r2;
    }
    const double pref = std::exp(log_pref);
    const cplx ph = std::polar(1.0, double(d) * phi);
    // u_0 = 1 after pulling 1/sqrt(d!) into the prefactor.
    double u_prev = 0.0, u = 1.0;
    cplx acc = 0.0;
    for (Index n = 0; n + d < n_max; ++n) {
      const double sign = (n % 2 == 0) ? 1.0 : -1.0;
      acc += sign * u * rho(n + d, n);
      // L_{n+1} = ((2n + 1 + d - z) L_n - (n + d) L_{n-1}) / (n + 1)
      const double nn = double(n);
      const double ratio_prev = n > 0 ? std::sqrt(nn / (nn + double(d))) : 0.0;
      const double u_next = std::sqrt((nn + 1.0) / (nn + double(d) + 1.0)) / (nn + 1.0) *
                            ((2.0 * nn + 1.0 + double(d) - z) * u -
                             (nn + double(d)) * ratio_prev * u_prev);
      u_prev = u;
      u = u_next;
    }
    const double contrib = (pref * ph * acc).real();
    total += d == 0 ? contrib : 2.0 * contrib;
  }
  return total / M_PI;
}

}  // namespace

double wigner_point(const Matrix& rho_m, double x, double p) {
  if (rho_m.rows() != rho_m.cols()) throw ShapeError("state must be square");
  return wigner_kernel_sum(rho_m, x, p);
}

WignerGrid wigner(const Matrix& rho_m, const WignerGridSpec& spec, int threads) {
  spec.validate();
  if (rho_m.rows() != rho_m.cols()) throw ShapeError("state must be square");
  WignerGrid out;
  out.spec = spec;
  out.values.resize(spec.nx, spec.np);

  const Matrix rho = 0.5 * (rho_m + rho_m.adjoint());
  std::atomic<Index> next{0};
  auto worker = [&] {
    for (Index i = next++; i < spec.nx; i = next++)
      for (Index j = 0; j < spec.np; ++j)
        out.values(i, j) = wigner_kernel_sum(rho, spec.x(i), spec.p(j));
  };
  const int n_threads = std::max(1, threads);
  std::vector<std::thread> pool;
  for (int k = 1; k < n_threads; ++k) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  const double peak = out.values.cwiseAbs().maxCoeff();
  double edge = 0.0;
  for (Index i = 0; i < spec.nx; ++i)
    edge = std::max({edge, std::abs(out.values(i, 0)), std::abs(out.values(i, spec.np - 1))});
  for (Index j = 0; j < spec.np; ++j)
    edge = std::max({edge, std::abs(out.values(0, j)), std::abs(out.values(spec.nx - 1, j))});
  out.boundary_ratio = peak > 0.0 ? edge / peak : 0.0;
  out.window_warning = out.boundary_ratio > 1e-4;
  return out;
}

WignerGrid husimi_q(const Matrix& rho_m, const WignerGridSpec& spec) {
  spec.validate();
  const Index n = rho_m.rows();
  WignerGrid out;
  out.spec = spec;
  out.values.resize(spec.nx, spec.np);
  Eigen::VectorXcd ket(n);
  for (Index i = 0; i < spec.nx; ++i) {
    for (Index j = 0; j < spec.np; ++j) {
      const cplx alpha = cplx(spec.x(i), spec.p(j)) / std::sqrt(2.0);
      ket(0) = std::exp(-0.5 * std::norm(alpha));
      for (Index k = 1; k < n; ++k) ket(k) = ket(k - 1) * alpha / std::sqrt(double(k));
      out.values(i, j) = (ket.adjoint() * rho_m * ket)(0, 0).real() / (2.0 * M_PI);
    }
  }
  return out;
}

namespace {

struct HermitianRoot {
  Matrix root;
  double min_eigenvalue;
};

HermitianRoot hermitian_sqrt(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.adjoint()));
  const Eigen::VectorXd ev = es.eigenvalues();
  const Eigen::VectorXd root = ev.cwiseMax(0.0).cwiseSqrt();
  return {es.eigenvectors() * root.asDiagonal() * es.eigenvectors().adjoint(), ev.minCoeff()};
}

}  // namespace

double uhlmann_fidelity(const Matrix& rho, const Matrix& sigma, FidelityForm form) {
  if (rho.rows() != sigma.rows() || rho.cols() != sigma.cols() || rho.rows() != rho.cols())
    throw ShapeError("fidelity arguments must be square with equal dimensions");
  HermitianRoot r = hermitian_sqrt(rho);
  HermitianRoot q = hermitian_sqrt(sigma);
  if (r.min_eigenvalue < -1e-7 || q.min_eigenvalue < -1e-7)
    throw InvalidState("fidelity argument is not positive semidefinite");
  // Clipping small negative eigenvalues shifts the trace; restore it so that
  // F(rho, rho) = 1 also for integrator output slightly outside the PSD cone.
  for (auto* h : {&r, &q}) {
    const Matrix& m = h == &r ? rho : sigma;
    const double clipped = h->root.squaredNorm();
    if (clipped > 0.0) h->root *= std::sqrt(m.trace().real() / clipped);
  }
  // Tr sqrt(sqrt(rho) sigma sqrt(rho)) is the trace norm of sqrt(rho) sqrt(sigma).
  // Singular values avoid the square root of near-zero eigenvalues, which would
  // turn rounding at 1e-17 into errors near 1e-9 for low-rank states.
  const Matrix product = r.root * q.root;
  Eigen::JacobiSVD<Matrix> svd(product);
  const double tr = svd.singularValues().sum();
  return form == FidelityForm::squared ? tr * tr : tr;
}

double mean_phonon(const Matrix& rho_m) {
  double s = 0.0;
  for (Index n = 0; n < rho_m.rows(); ++n) s += double(n) * rho_m(n, n).real();
  return s;
}

double parity_expectation(const Matrix& rho_m) {
  double s = 0.0;
  for (Index n = 0; n < rho_m.rows(); ++n) s += (n % 2 == 0 ? 1.0 : -1.0) * rho_m(n, n).real();
  return s;
}

double purity(const Matrix& rho) {
  // Tr(rho^2) = sum |rho_ij|^2 for Hermitian rho
  return rho.squaredNorm();
}

double negativity_volume(const WignerGrid& w) {
  return (-w.values.array()).cwiseMax(0.0).sum() * w.spec.dx() * w.spec.dp();
}

std::vector<GridPeak> local_maxima(const WignerGrid& w, double rel_floor) {
  std::vector<GridPeak> out;
  const auto& v = w.values;
  const double floor = rel_floor * v.maxCoeff();
  for (Index i = 1; i + 1 < v.rows(); ++i) {
    for (Index j = 1; j + 1 < v.cols(); ++j) {
      const double c = v(i, j);
      if (c <= floor) continue;
      bool is_max = true;
      for (int di = -1; di <= 1 && is_max; ++di)
        for (int dj = -1; dj <= 1 && is_max; ++dj)
          if ((di || dj) && v(i + di, j + dj) >= c) is_max = false;
      if (is_max) out.push_back({w.spec.x(i), w.spec.p(j), c});
    }
  }
  std::sort(out.begin(), out.end(), [](const GridPeak& a, const GridPeak& b) {
    return a.value > b.value;
  });
  return out;
}

namespace {

double cat_overlap(const Matrix& rho, cplx alpha) {
  if (std::abs(alpha) < 1e-9) return rho(0, 0).real();
  const Eigen::VectorXcd c = cat_ket(rho.rows(), alpha, +1);
  return (c.adjoint() * rho * c)(0, 0).real();
}

}  // namespace

CatFit best_fit_even_cat(const Matrix& rho_m, double alpha_max) {
  if (rho_m.rows() != rho_m.cols()) throw ShapeError("state must be square");
  // Coarse scan over |alpha| and arg(alpha) in [0, pi); alpha and -alpha give the same cat.
  const int n_r = 60, n_phi = 72;
  CatFit best{{0.0, 0.0}, cat_overlap(rho_m, 0.0)};
  for (int ir = 1; ir <= n_r; ++ir) {
    const double r = alpha_max * ir / n_r;
    for (int ip = 0; ip < n_phi; ++ip) {
      const cplx a = std::polar(r, M_PI * ip / n_phi);
      const double f = cat_overlap(rho_m, a);
      if (f > best.fidelity) best = {a, f};
    }
  }
  // Compass refinement in the complex plane.
  double step = alpha_max / n_r;
  while (step > 1e-7) {
    bool improved = false;
    for (cplx d : {cplx(step, 0), cplx(-step, 0), cplx(0, step), cplx(0, -step)}) {
      const double f = cat_overlap(rho_m, best.alpha + d);
      if (f > best.fidelity) {
        best = {best.alpha + d, f};
        improved = true;
      }
    }
    if (!improved) step *= 0.5;
  }
  if (best.alpha.real() < 0.0 || (best.alpha.real() == 0.0 && best.alpha.imag() < 0.0))
    best.alpha = -best.alpha;
  return best;
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  static std::atomic<unsigned> counter{0};
  namespace fs = std::filesystem;
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw FilesystemError("cannot create " + path.parent_path().string() + ": " + ec.message());
  }
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FilesystemError("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw FilesystemError("write failed for " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw FilesystemError("cannot move output into place at " + path.string());
  }
}

std::string trajectory_table(const TrajectoryRecord& record) {
  record.check_consistency();
  const bool with_fidelity = record.series.count("fidelity") > 0;
  std::ostringstream os;
  os << "t_seconds,kappa_t,gamma2_t,mean_phonon,parity,purity";
  if (with_fidelity) os << ",fidelity";
  os << '\n';
  if (record.times.empty()) return os.str();
  const auto kt = record.kappa_t();
  const auto gt = record.gamma2_t();
  const auto& nb = record.at("mean_phonon");
  const auto& pa = record.at("parity");
  const auto& pu = record.at("purity");
  for (std::size_t i = 0; i < record.times.size(); ++i) {
    os << format_number(record.times[i]) << ',' << format_number(kt[i]) << ','
       << format_number(gt[i]) << ',' << format_number(nb[i]) << ',' << format_number(pa[i])
       << ',' << format_number(pu[i]);
    if (with_fidelity) os << ',' << format_number(record.at("fidelity")[i]);
    os << '\n';
  }
  return os.str();
}

std::string wigner_table(const WignerGrid& w) {
  const auto& s = w.spec;
  std::ostringstream os;
  os << "# wigner x_min=" << format_number(s.x_min) << " x_max=" << format_number(s.x_max)
     << " p_min=" << format_number(s.p_min) << " p_max=" << format_number(s.p_max)
     << " nx=" << s.nx << " np=" << s.np << '\n';
  os << "x,p,w\n";
  for (Index i = 0; i < s.nx; ++i)
    for (Index j = 0; j < s.np; ++j)
      os << format_number(s.x(i)) << ',' << format_number(s.p(j)) << ','
         << format_number(w.values(i, j)) << '\n';
  return os.str();
}

void emit_table(const TrajectoryRecord& record, const std::filesystem::path& path) {
  write_atomic(path, trajectory_table(record));
}

void emit_table(const WignerGrid& w, const std::filesystem::path& path) {
  write_atomic(path, wigner_table(w));
}

ParsedTable parse_table(const std::string& text) {
  ParsedTable out;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      out.comments.push_back(line);
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (out.header.empty()) {
      out.header = cells;
      continue;
    }
    std::vector<double> row;
    for (const auto& c : cells) {
      char* end = nullptr;
      const double v = std::strtod(c.c_str(), &end);
      if (end == c.c_str()) throw InvalidParameter("non-numeric table cell '" + c + "'");
      row.push_back(v);
    }
    out.rows.push_back(std::move(row));
  }
  return out;
}

ParsedTable read_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FilesystemError("cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return parse_table(os.str());
}

}  // namespace mechcat
