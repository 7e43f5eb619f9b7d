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

#include <filesystem>
#include <string>
#include <vector>

#include "mechcat/operator_core.hpp"
#include "mechcat/trajectory.hpp"

namespace mechcat {

/// Phase-space window. Quadratures are dimensionless; vacuum W(0,0) = 1/pi.
struct WignerGridSpec {
  double x_min = -5.0, x_max = 5.0;
  double p_min = -5.0, p_max = 5.0;
  Index nx = 201, np = 201;

  void validate() const;
  double dx() const { return nx > 1 ? (x_max - x_min) / double(nx - 1) : 0.0; }
  double dp() const { return np > 1 ? (p_max - p_min) / double(np - 1) : 0.0; }
  double x(Index i) const { return x_min + double(i) * dx(); }
  double p(Index j) const { return p_min + double(j) * dp(); }
};

struct WignerGrid {
  WignerGridSpec spec;
  Eigen::MatrixXd values;  ///< values(i, j) = W(x_i, p_j)
  double boundary_ratio = 0.0;  ///< max |W| on the window edge over max |W|
  bool window_warning = false;  ///< boundary_ratio > 1e-4

  double integral() const;
};

/// W(x, p) on a grid from the Laguerre closed form of the Fock-basis kernel.
WignerGrid wigner(const Matrix& rho_m, const WignerGridSpec& spec = {}, int threads = 1);
inline WignerGrid wigner(const DensityMatrix& rho_m, const WignerGridSpec& spec = {},
                         int threads = 1) {
  return wigner(rho_m.matrix(), spec, threads);
}
double wigner_point(const Matrix& rho_m, double x, double p);

/**
 * Husimi function <alpha|rho|alpha> / (2 pi) with alpha = (x + ip)/sqrt(2), on the
 * same grid and normalisation as `wigner`. It is the Wigner function smoothed
 * by the vacuum Gaussian, which suppresses interference fringes and leaves one
 * maximum per coherent component.
 */
WignerGrid husimi_q(const Matrix& rho_m, const WignerGridSpec& spec = {});

enum class FidelityForm { squared, root };

/// Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2, or its square root.
double uhlmann_fidelity(const Matrix& rho, const Matrix& sigma,
                        FidelityForm form = FidelityForm::squared);
inline double uhlmann_fidelity(const DensityMatrix& rho, const DensityMatrix& sigma,
                               FidelityForm form = FidelityForm::squared) {
  return uhlmann_fidelity(rho.matrix(), sigma.matrix(), form);
}

double mean_phonon(const Matrix& rho_m);
double parity_expectation(const Matrix& rho_m);
double purity(const Matrix& rho);

double negativity_volume(const WignerGrid& w);

struct GridPeak {
  double x = 0.0, p = 0.0, value = 0.0;
};

/// Strict local maxima over the 8-neighbourhood with value above rel_floor * max W.
std::vector<GridPeak> local_maxima(const WignerGrid& w, double rel_floor = 0.05);

struct CatFit {
  cplx alpha{0.0, 0.0};
  double fidelity = 0.0;  ///< <cat|rho|cat>
};

/// Maximises <cat_alpha|rho|cat_alpha> over complex alpha, even cats only.
CatFit best_fit_even_cat(const Matrix& rho_m, double alpha_max = 4.0);

/// Writes `content` to a sibling temp file, then renames it over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// 17 significant digits, round-trips bit-exactly through strtod.
std::string format_number(double v);

/// Header `t_seconds,kappa_t,gamma2_t,mean_phonon,parity,purity[,fidelity]`.
std::string trajectory_table(const TrajectoryRecord& record);
/// `#` metadata line, then header `x,p,w`, rows with p varying fastest.
std::string wigner_table(const WignerGrid& w);

void emit_table(const TrajectoryRecord& record, const std::filesystem::path& path);
void emit_table(const WignerGrid& w, const std::filesystem::path& path);

struct ParsedTable {
  std::vector<std::string> comments;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

ParsedTable parse_table(const std::string& text);
ParsedTable read_table(const std::filesystem::path& path);

}  // namespace mechcat
