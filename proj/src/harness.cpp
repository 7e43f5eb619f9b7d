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

#include "mechcat/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include "mechcat/errors.hpp"

namespace mechcat {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

struct KeyInfo {
  const char* key;
  const char* fallback;  // nullptr: required or optional without default
  const char* doc;
};

// Frequencies and rates are entered in Hz (the /2pi values) and converted once.
constexpr KeyInfo kKeys[] = {
    {"params.omega_m_hz", nullptr, "mechanical frequency, required"},
    {"params.omega_q_hz", nullptr, "qubit frequency, required unless params.delta_d_hz is set"},
    {"params.omega_d_hz", nullptr, "drive frequency, required"},
    {"params.delta_d_hz", nullptr, "omega_q - omega_d; sets omega_q from omega_d"},
    {"params.g_x_hz", nullptr, "transverse coupling, required"},
    {"params.g_z_hz", nullptr, "longitudinal coupling, required"},
    {"params.kappa_hz", nullptr, "qubit decay rate, required"},
    {"params.Omega_hz", nullptr, "Rabi amplitude (eps = Omega/2); this or params.eps_over_g"},
    {"params.eps_over_g", nullptr, "drive amplitude eps in units of g = g_x g_z / omega_m"},
    {"params.gamma_hz", "0", "intrinsic mechanical damping"},
    {"params.gamma_phi_hz", "0", "qubit pure dephasing"},
    {"params.n_th", "0", "thermal phonon occupation"},
    {"params.n_trunc", "60", "mechanical Fock truncation"},
    {"run.frame", "mech_rot", "lab | mech_rot | double_rot (full model)"},
    {"run.initial_state", "vacuum", "vacuum | fock:N | coherent:RE,IM | thermal:NTH"},
    {"run.horizon", "1", "final time in horizon_unit"},
    {"run.horizon_unit", "gamma2_t", "gamma2_t | kappa_t"},
    {"run.samples", "200", "recorded samples after t = 0"},
    {"run.include_frame_term", "true", "keep (delta1 + delta2) a^dag a in the effective model"},
    {"run.two_phonon_scale", "1", "diagnostic multiplier of g in the effective coefficients"},
    {"run.dt_seconds", nullptr, "fixed integrator step; automatic when absent"},
    {"run.steps_per_period", "24", "full-model step rule"},
    {"run.decay_fraction", "0.1", "full-model decay cap"},
    {"run.rate_fraction", "0.02", "effective-model step rule"},
    {"run.stability_limit", "2.5", "RK4 stability cap dt * bound"},
    {"output.timeseries", "true", "emit trajectory tables"},
    {"output.wigner_times", "", "Wigner frames at these times, in horizon_unit"},
    {"output.steady_state", "false", "emit the steady state after evolve"},
    {"output.report", "true", "emit the verification report"},
    {"output.wigner_extent", "5", "grid half-width in x and p"},
    {"output.wigner_points", "201", "grid points per axis"},
    {"steady.method", "auto", "auto | propagation | null_space"},
    {"steady.residual_tol", "1e-10", "||L rho||_F / ||L||_F target"},
};

const KeyInfo* find_key(const std::string& key) {
  for (const auto& k : kKeys)
    if (key == k.key) return &k;
  return nullptr;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct Entry {
  std::string value;
  int line = 0;
};

class Reader {
 public:
  explicit Reader(std::map<std::string, Entry> entries) : entries_(std::move(entries)) {}

  bool has(const std::string& key) const { return entries_.count(key) > 0; }
  int line(const std::string& key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? 0 : it->second.line;
  }

  std::string text(const std::string& key) const {
    auto it = entries_.find(key);
    if (it != entries_.end()) return it->second.value;
    const KeyInfo* info = find_key(key);
    if (info && info->fallback) return info->fallback;
    throw ConfigError("missing required key " + key);
  }

  double number(const std::string& key) const { return parse_number(text(key), key); }

  double parse_number(const std::string& s, const std::string& key) const {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(v))
      throw ConfigError("non-numeric value '" + s + "' for " + key, line(key));
    return v;
  }

  Index integer(const std::string& key) const {
    const double v = number(key);
    if (v != std::floor(v) || v < 0 || v > 1e9)
      throw ConfigError("expected a non-negative integer for " + key, line(key));
    return Index(v);
  }

  bool boolean(const std::string& key) const {
    const std::string s = text(key);
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw ConfigError("expected true or false for " + key, line(key));
  }

  std::vector<double> list(const std::string& key) const {
    std::string s = text(key);
    std::replace(s.begin(), s.end(), ',', ' ');
    std::istringstream in(s);
    std::vector<double> out;
    std::string tok;
    while (in >> tok) out.push_back(parse_number(tok, key));
    return out;
  }

  double hz(const std::string& key) const { return kTwoPi * number(key); }

 private:
  std::map<std::string, Entry> entries_;
};

RunConfig interpret(const std::map<std::string, Entry>& raw) {
  for (const auto& [key, entry] : raw)
    if (!find_key(key)) throw ConfigError("unknown key " + key, entry.line);
  const Reader r(raw);
  RunConfig cfg;
  for (const auto& [key, entry] : raw) cfg.entries[key] = entry.value;

  SystemParams& p = cfg.params;
  p.omega_m = r.hz("params.omega_m_hz");
  p.omega_d = r.hz("params.omega_d_hz");
  if (r.has("params.delta_d_hz")) {
    if (r.has("params.omega_q_hz"))
      throw ConfigError("give params.omega_q_hz or params.delta_d_hz, not both",
                        r.line("params.delta_d_hz"));
    p.omega_q = p.omega_d + r.hz("params.delta_d_hz");
  } else {
    p.omega_q = r.hz("params.omega_q_hz");
  }
  p.g_x = r.hz("params.g_x_hz");
  p.g_z = r.hz("params.g_z_hz");
  p.kappa = r.hz("params.kappa_hz");
  p.gamma = r.hz("params.gamma_hz");
  p.gamma_phi = r.hz("params.gamma_phi_hz");
  p.n_th = r.number("params.n_th");
  p.n_trunc = r.integer("params.n_trunc");
  if (r.has("params.Omega_hz") == r.has("params.eps_over_g"))
    throw ConfigError("give exactly one of params.Omega_hz and params.eps_over_g",
                      std::max(r.line("params.Omega_hz"), r.line("params.eps_over_g")));
  if (r.has("params.Omega_hz")) {
    p.Omega = r.hz("params.Omega_hz");
  } else {
    if (!(p.omega_m > 0.0)) throw ConfigError("omega_m must be positive", r.line("params.omega_m_hz"));
    p.Omega = 2.0 * r.number("params.eps_over_g") * std::abs(p.g_x * p.g_z / p.omega_m);
  }
  try {
    p.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }

  try {
    cfg.frame = parse_frame(r.text("run.frame"));
  } catch (const Error& e) {
    throw ConfigError(e.what(), r.line("run.frame"));
  }
  try {
    cfg.initial = InitialState::parse(r.text("run.initial_state"));
  } catch (const Error& e) {
    throw ConfigError(e.what(), r.line("run.initial_state"));
  }
  if (cfg.initial.kind == InitialState::Kind::fock && cfg.initial.fock >= p.n_trunc)
    throw ConfigError("Fock index must be below n_trunc", r.line("run.initial_state"));

  cfg.horizon = r.number("run.horizon");
  if (!(cfg.horizon > 0.0)) throw ConfigError("horizon must be positive", r.line("run.horizon"));
  const std::string unit = r.text("run.horizon_unit");
  if (unit == "gamma2_t") {
    cfg.horizon_unit = HorizonUnit::gamma2_t;
  } else if (unit == "kappa_t") {
    cfg.horizon_unit = HorizonUnit::kappa_t;
  } else {
    throw ConfigError("horizon_unit must be gamma2_t or kappa_t", r.line("run.horizon_unit"));
  }
  cfg.samples = std::size_t(r.integer("run.samples"));
  if (cfg.samples == 0) throw ConfigError("samples must be positive", r.line("run.samples"));
  cfg.include_frame_term = r.boolean("run.include_frame_term");
  cfg.two_phonon_scale = r.number("run.two_phonon_scale");
  if (r.has("run.dt_seconds")) {
    cfg.dt = r.number("run.dt_seconds");
    if (!(*cfg.dt > 0.0)) throw ConfigError("dt_seconds must be positive", r.line("run.dt_seconds"));
  }
  cfg.rule.steps_per_period = r.number("run.steps_per_period");
  cfg.rule.decay_fraction = r.number("run.decay_fraction");
  cfg.rule.rate_fraction = r.number("run.rate_fraction");
  cfg.rule.stability_limit = r.number("run.stability_limit");
  for (const char* k : {"run.steps_per_period", "run.decay_fraction", "run.rate_fraction",
                        "run.stability_limit"})
    if (!(r.number(k) > 0.0)) throw ConfigError(std::string(k) + " must be positive", r.line(k));

  cfg.emit_timeseries = r.boolean("output.timeseries");
  cfg.wigner_times = r.list("output.wigner_times");
  for (double t : cfg.wigner_times)
    if (t < 0.0 || t > cfg.horizon * (1.0 + 1e-12))
      throw ConfigError("Wigner time outside [0, horizon]", r.line("output.wigner_times"));
  cfg.emit_steady_state = r.boolean("output.steady_state");
  cfg.emit_report = r.boolean("output.report");
  const double extent = r.number("output.wigner_extent");
  cfg.grid.x_min = cfg.grid.p_min = -extent;
  cfg.grid.x_max = cfg.grid.p_max = extent;
  cfg.grid.nx = cfg.grid.np = r.integer("output.wigner_points");
  try {
    cfg.grid.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what(), r.line("output.wigner_points"));
  }

  const std::string method = r.text("steady.method");
  if (method == "auto") {
    cfg.steady_method = SteadyChoice::automatic;
  } else if (method == "propagation") {
    cfg.steady_method = SteadyChoice::propagation;
  } else if (method == "null_space") {
    cfg.steady_method = SteadyChoice::null_space;
  } else {
    throw ConfigError("steady.method must be auto, propagation or null_space",
                      r.line("steady.method"));
  }
  cfg.steady_residual_tol = r.number("steady.residual_tol");

  if (cfg.horizon_unit == HorizonUnit::gamma2_t && !(cfg.effective().Gamma2_minus > 0.0))
    throw ConfigError("gamma2_t horizon needs Gamma2_- > 0", r.line("run.horizon_unit"));
  return cfg;
}

std::string canonical_key(const std::string& section, const std::string& key) {
  if (key.find('.') != std::string::npos || section.empty()) return key;
  return section + "." + key;
}

void say(const RunContext& ctx, const std::string& line) {
  if (ctx.log) *ctx.log << line << '\n';
}

void emit(const RunContext& ctx, const std::string& name, const std::string& content) {
  if (ctx.out_dir.empty()) return;
  write_atomic(ctx.out_dir / name, content);
}

std::string csv(const std::vector<std::string>& header,
                const std::vector<const std::vector<double>*>& columns) {
  std::string s;
  for (std::size_t c = 0; c < header.size(); ++c) s += (c ? "," : "") + header[c];
  s += '\n';
  const std::size_t rows = columns.empty() ? 0 : columns.front()->size();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (c) s += ',';
      s += format_number((*columns[c])[r]);
    }
    s += '\n';
  }
  return s;
}

// Integrator step that divides the sample interval exactly. The automatic rule
// is only consulted without a configured step.
template <typename AutoStep>
PropagationOptions aligned_options(const RunConfig& cfg, double t_final, AutoStep&& dt_auto) {
  PropagationOptions o;
  o.rule = cfg.rule;
  const double base = cfg.dt ? *cfg.dt : dt_auto();
  const double interval = t_final / double(cfg.samples);
  const double k = std::ceil(interval / base * (1.0 - 1e-12));
  o.record_every = std::size_t(std::max(1.0, k));
  // fit_steps rounds t_final / dt up; the small inflation keeps it at samples * k.
  o.dt = interval / double(o.record_every) * (1.0 + 1e-12);
  return o;
}

std::size_t sample_index(const RunConfig& cfg, double dimensionless) {
  const double frac = dimensionless / cfg.horizon;
  return std::size_t(std::llround(frac * double(cfg.samples)));
}

// Propagations run until a gross failure; anything outside the density-matrix
// contract but short of that is reported here.
template <typename Fn>
TrajectoryRecord with_context(const std::string& what, const RunContext& ctx, Fn&& fn) {
  try {
    TrajectoryRecord rec = fn();
    const ConservationLog& c = rec.conservation;
    if (ctx.log && !c.within(1e-8, 1e-9, -1e-7)) {
      *ctx.log << "warning: " << what << ": state left the density-matrix contract (max |Tr-1| "
               << c.max_trace_error << ", hermiticity " << c.max_hermiticity
               << ", min eigenvalue " << c.min_eigenvalue << ")\n";
    }
    return rec;
  } catch (const IntegrationDiverged& e) {
    throw IntegrationDiverged(what + ": " + e.what(), e.time());
  } catch (const NumericalOverflow& e) {
    throw NumericalOverflow(what + ": " + e.what(), e.time());
  }
}

Matrix ground_times(const Matrix& rho_m) {
  const Index n = rho_m.rows();
  Matrix out = Matrix::Zero(2 * n, 2 * n);
  out.bottomRightCorner(n, n) = rho_m;  // qubit order (e, g)
  return out;
}

Matrix to_mech_rot(const Matrix& rho_m, Frame frame, const SystemParams& p, double t) {
  return frame == Frame::lab ? rotate_phase_space(rho_m, -p.omega_m * t) : rho_m;
}

std::string wigner_name(const std::string& stem, std::size_t k) {
  return stem + "_" + std::to_string(k) + ".csv";
}

SteadyStateOptions steady_options(const RunConfig& cfg) {
  SteadyStateOptions o;
  const bool dense = cfg.steady_method == SteadyChoice::null_space ||
                     (cfg.steady_method == SteadyChoice::automatic &&
                      cfg.params.n_trunc <= o.max_null_space_dim);
  o.method = dense ? SteadyMethod::null_space : SteadyMethod::propagation;
  o.initial = cfg.initial.mechanical(cfg.params.n_trunc);
  o.residual_tol = cfg.steady_residual_tol;
  o.include_frame_term = cfg.include_frame_term;
  o.rule = cfg.rule;
  return o;
}

}  // namespace

InitialState InitialState::parse(const std::string& text) {
  InitialState s;
  const auto colon = text.find(':');
  const std::string kind = trim(text.substr(0, colon));
  const std::string arg = colon == std::string::npos ? "" : trim(text.substr(colon + 1));
  auto num = [&](const std::string& v) {
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size())
      throw InvalidParameter("bad number '" + v + "' in initial state");
    return x;
  };
  if (kind == "vacuum" && arg.empty()) {
    s.kind = Kind::vacuum;
  } else if (kind == "fock") {
    const double n = num(arg);
    if (n < 0 || n != std::floor(n)) throw InvalidParameter("Fock index must be a whole number");
    s.kind = Kind::fock;
    s.fock = Index(n);
  } else if (kind == "coherent") {
    const auto comma = arg.find(',');
    s.kind = Kind::coherent;
    s.alpha = cplx(num(trim(arg.substr(0, comma))),
                   comma == std::string::npos ? 0.0 : num(trim(arg.substr(comma + 1))));
  } else if (kind == "thermal") {
    s.kind = Kind::thermal;
    s.n_th = num(arg);
    if (s.n_th < 0) throw InvalidParameter("thermal occupation must be non-negative");
  } else {
    throw InvalidParameter("unknown initial state '" + text + "'");
  }
  return s;
}

std::string InitialState::str() const {
  switch (kind) {
    case Kind::vacuum:
      return "vacuum";
    case Kind::fock:
      return "fock:" + std::to_string(fock);
    case Kind::coherent:
      return "coherent:" + format_number(alpha.real()) + "," + format_number(alpha.imag());
    case Kind::thermal:
      return "thermal:" + format_number(n_th);
  }
  return "";
}

DensityMatrix InitialState::mechanical(Index n_trunc) const {
  switch (kind) {
    case Kind::vacuum:
      return DensityMatrix::pure(fock_ket(n_trunc, 0));
    case Kind::fock:
      return DensityMatrix::pure(fock_ket(n_trunc, fock));
    case Kind::coherent:
      return DensityMatrix::pure(coherent_ket(n_trunc, alpha));
    case Kind::thermal:
      return thermal_state(n_trunc, n_th);
  }
  throw InvalidParameter("unknown initial state");
}

EffectiveParams RunConfig::effective() const {
  EffectiveParams e = effective_params(params);
  return two_phonon_scale == 1.0 ? e : scale_two_phonon(e, two_phonon_scale);
}

double RunConfig::to_seconds(double dimensionless) const {
  if (horizon_unit == HorizonUnit::kappa_t) return dimensionless / params.kappa;
  return dimensionless / effective().Gamma2_minus;
}

RunConfig parse_config_text(const std::string& text) {
  std::map<std::string, Entry> raw;
  std::istringstream in(text);
  std::string line, section;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("unterminated section header", number);
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key = value", number);
    const std::string key = canonical_key(section, trim(line.substr(0, eq)));
    if (!find_key(key)) throw ConfigError("unknown key " + key, number);
    if (raw.count(key)) throw ConfigError("duplicate key " + key, number);
    raw[key] = {trim(line.substr(eq + 1)), number};
  }
  return interpret(raw);
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

RunConfig config_from_entries(const std::map<std::string, std::string>& entries) {
  std::map<std::string, Entry> raw;
  for (const auto& [k, v] : entries) raw[k] = {v, 0};
  return interpret(raw);
}

std::string config_reference() {
  std::string s;
  for (const auto& k : kKeys) {
    s += k.key;
    s += " = ";
    s += k.fallback ? (*k.fallback ? k.fallback : "(empty)") : "(no default)";
    s += "    # ";
    s += k.doc;
    s += '\n';
  }
  return s;
}

SystemParams reference_params() {
  SystemParams p;
  p.omega_m = kTwoPi * 100e6;
  p.omega_q = 2.0 * p.omega_m;
  p.omega_d = 2.0 * p.omega_m;
  p.g_z = kTwoPi * 6e6;
  p.g_x = 0.1 * p.g_z;
  p.kappa = kTwoPi * 100e3;
  p.Omega = 2.0 * 4.0 * (p.g_x * p.g_z / p.omega_m);
  p.n_trunc = 60;
  return p;
}

std::vector<RateRow> rate_rows(const RunConfig& cfg) {
  const SystemParams& p = cfg.params;
  const EffectiveParams e = cfg.effective();
  const auto [gm, gp] = gamma_rates(p);
  return {
      {"g", e.g, "two-phonon coupling g_x g_z / omega_m"},
      {"eps", e.eps, "drive amplitude Omega / 2"},
      {"|chi|", std::abs(e.chi), "two-phonon drive amplitude"},
      {"Re chi", e.chi.real(), "two-phonon drive real part"},
      {"Im chi", e.chi.imag(), "two-phonon drive imaginary part"},
      {"Gamma1_-", e.Gamma1_minus, "single-phonon loss through the qubit"},
      {"Gamma1_+", e.Gamma1_plus, "single-phonon gain through the qubit"},
      {"Gamma2_-", e.Gamma2_minus, "two-phonon loss"},
      {"Gamma2_+", e.Gamma2_plus, "two-phonon gain"},
      {"gamma_-", gm, "intrinsic mechanical loss gamma (n_th + 1)"},
      {"gamma_+", gp, "intrinsic mechanical gain gamma n_th"},
      {"delta1", e.delta1, "frequency shift from single-phonon exchange"},
      {"delta2", e.delta2, "frequency shift from two-phonon exchange"},
      {"delta_k", e.delta_k, "Kerr coefficient of (a^dag a)^2"},
      {"Delta_-", e.Delta_minus, "detuning omega_q - omega_m"},
      {"Delta_+", e.Delta_plus, "detuning omega_q + omega_m"},
      {"Delta2_-", e.Delta2_minus, "detuning omega_q - 2 omega_m"},
      {"Delta2_+", e.Delta2_plus, "detuning omega_q + 2 omega_m"},
      {"Delta_d", e.Delta_d, "detuning omega_q - omega_d"},
      {"kappa/2+Gamma_phi", half_linewidth(p), "broadened qubit half linewidth"},
      {"omega_m_eff", e.omega_m_eff, "shifted mechanical frequency"},
  };
}

std::string rates_table(const std::vector<RateRow>& rows) {
  std::string s = "symbol,value_hz,value_rad_s,role\n";
  for (const auto& r : rows)
    s += r.symbol + "," + format_number(r.rad_s / kTwoPi) + "," + format_number(r.rad_s) + "," +
         r.role + "\n";
  return s;
}

std::vector<RateRow> cmd_rates(const RunConfig& cfg, const RunContext& ctx) {
  auto rows = rate_rows(cfg);
  const std::string table = rates_table(rows);
  emit(ctx, "rates.csv", table);
  if (ctx.log) *ctx.log << table;
  return rows;
}

EvolveResult cmd_evolve(const RunConfig& cfg, ModelKind model, const RunContext& ctx) {
  const SystemParams& p = cfg.params;
  const double T = cfg.horizon_seconds();
  const Index n = p.n_trunc;
  const DensityMatrix rho_m = cfg.initial.mechanical(n);
  const EffectiveParams e = cfg.effective();

  std::vector<std::size_t> wanted;
  for (double t : cfg.wigner_times) wanted.push_back(sample_index(cfg, t));

  EvolveResult res;
  res.frames.resize(wanted.size());
  res.frame_times.resize(wanted.size());
  std::size_t sample = 0;
  auto capture = [&](double t, const Matrix& rho_m_now) {
    for (std::size_t k = 0; k < wanted.size(); ++k) {
      if (wanted[k] != sample) continue;
      res.frames[k] = wigner(rho_m_now, cfg.grid, ctx.threads);
      res.frame_times[k] = t;
    }
  };

  const std::string name = model == ModelKind::full ? "full" : "effective";
  if (model == ModelKind::full) {
    PropagationOptions o = aligned_options(cfg, T, [&] { return full_auto_step(p, cfg.frame, cfg.rule); });
    o.observer = [&](double t, const Matrix& rho) {
      if (!wanted.empty()) capture(t, partial_trace_qubit(rho, n));
      ++sample;
    };
    res.record = with_context("evolve full", ctx, [&] {
      return propagate_full(p, DensityMatrix::trusted(ground_times(rho_m.matrix())), T, cfg.frame, o);
    });
  } else {
    PropagationOptions o =
        aligned_options(cfg, T, [&] { return effective_auto_step(e, p, cfg.rule, cfg.include_frame_term); });
    o.observer = [&](double t, const Matrix& rho) {
      if (!wanted.empty()) capture(t, rho);
      ++sample;
    };
    res.record = with_context("evolve effective", ctx, [&] {
      return propagate_effective(e, p, rho_m, T, o, cfg.include_frame_term);
    });
  }
  say(ctx, "evolve " + name + ": " + std::to_string(res.record.steps) + " steps, dt = " +
               format_number(res.record.dt) + " s");
  if (cfg.emit_timeseries) emit(ctx, "trajectory_" + name + ".csv", trajectory_table(res.record));
  for (std::size_t k = 0; k < res.frames.size(); ++k)
    emit(ctx, wigner_name("wigner_" + name, k), wigner_table(res.frames[k]));
  if (cfg.emit_steady_state) cmd_steady(cfg, ctx);
  return res;
}

CompareResult cmd_compare(const RunConfig& cfg, const RunContext& ctx) {
  const SystemParams& p = cfg.params;
  const Index n = p.n_trunc;
  const double T = cfg.horizon_seconds();
  const EffectiveParams e = cfg.effective();
  const DensityMatrix rho_m = cfg.initial.mechanical(n);
  if (rho_m.dim() != n) throw ConfigError("initial state truncation differs from n_trunc");

  CompareResult res;
  res.kappa = p.kappa;
  res.gamma2_minus = e.Gamma2_minus;

  PropagationOptions oe =
      aligned_options(cfg, T, [&] { return effective_auto_step(e, p, cfg.rule, cfg.include_frame_term); });
  oe.keep_snapshots = true;
  const TrajectoryRecord eff = with_context("compare effective", ctx, [&] {
    return propagate_effective(e, p, rho_m, T, oe, cfg.include_frame_term);
  });
  res.steps_eff = eff.steps;
  res.conservation_eff = eff.conservation;

  const double shift = cfg.include_frame_term ? 0.0 : e.delta1 + e.delta2;
  std::vector<Matrix> eff_states;
  eff_states.reserve(eff.snapshots.size());
  for (const auto& s : eff.snapshots)
    eff_states.push_back(rotate_phase_space(s.state.matrix(), shift * s.time));

  std::vector<std::size_t> wanted;
  for (double t : cfg.wigner_times) wanted.push_back(sample_index(cfg, t));
  res.frames_full.resize(wanted.size());
  res.frames_eff.resize(wanted.size());
  res.frame_times.resize(wanted.size());

  std::size_t sample = 0;
  PropagationOptions of = aligned_options(cfg, T, [&] { return full_auto_step(p, cfg.frame, cfg.rule); });
  of.observer = [&](double t, const Matrix& rho) {
    if (sample >= eff_states.size())
      throw AssemblyError("sample grids of the two models differ");
    const Matrix mf = to_mech_rot(partial_trace_qubit(rho, n), cfg.frame, p, t);
    const Matrix& me = eff_states[sample];
    res.times.push_back(eff.times[sample]);
    res.fidelity.push_back(uhlmann_fidelity(mf, me));
    res.n_full.push_back(mean_phonon(mf));
    res.n_eff.push_back(mean_phonon(me));
    res.parity_full.push_back(parity_expectation(mf));
    res.parity_eff.push_back(parity_expectation(me));
    for (std::size_t k = 0; k < wanted.size(); ++k) {
      if (wanted[k] != sample) continue;
      res.frames_full[k] = wigner(mf, cfg.grid, ctx.threads);
      res.frames_eff[k] = wigner(me, cfg.grid, ctx.threads);
      res.frame_times[k] = eff.times[sample];
    }
    ++sample;
  };
  const TrajectoryRecord full = with_context("compare full", ctx, [&] {
    return propagate_full(p, DensityMatrix::trusted(ground_times(rho_m.matrix())), T, cfg.frame,
                          of);
  });
  if (sample != eff_states.size()) throw AssemblyError("sample grids of the two models differ");
  res.steps_full = full.steps;
  res.conservation_full = full.conservation;

  std::vector<double> kt, g2t;
  for (double t : res.times) {
    kt.push_back(t * res.kappa);
    g2t.push_back(t * res.gamma2_minus);
  }
  emit(ctx, "compare.csv",
       csv({"t_seconds", "kappa_t", "gamma2_t", "fidelity", "mean_phonon_full",
            "mean_phonon_effective", "parity_full", "parity_effective"},
           {&res.times, &kt, &g2t, &res.fidelity, &res.n_full, &res.n_eff, &res.parity_full,
            &res.parity_eff}));
  for (std::size_t k = 0; k < wanted.size(); ++k) {
    emit(ctx, wigner_name("wigner_full", k), wigner_table(res.frames_full[k]));
    emit(ctx, wigner_name("wigner_effective", k), wigner_table(res.frames_eff[k]));
  }
  say(ctx, "compare: full " + std::to_string(res.steps_full) + " steps, effective " +
               std::to_string(res.steps_eff) + " steps, final fidelity " +
               format_number(res.fidelity.back()));
  return res;
}

SteadyReport cmd_steady(const RunConfig& cfg, const RunContext& ctx) {
  const SystemParams& p = cfg.params;
  SteadyReport rep;
  rep.result = steady_state(cfg.effective(), p, steady_options(cfg));
  const Matrix& rho = rep.result.state.matrix();
  rep.mean_phonon = mean_phonon(rho);
  rep.parity = parity_expectation(rho);
  rep.purity = purity(rho);
  const WignerGrid w = wigner(rho, cfg.grid, ctx.threads);
  rep.negativity = negativity_volume(w);
  rep.cat = best_fit_even_cat(rho);

  std::string s =
      "converged,residual,null_dimension,elapsed_seconds,mean_phonon,parity,purity,"
      "negativity_volume,cat_alpha_re,cat_alpha_im,cat_fidelity\n";
  s += std::string(rep.result.converged ? "1" : "0") + "," + format_number(rep.result.residual) +
       "," + std::to_string(rep.result.null_dimension) + "," +
       format_number(rep.result.elapsed_time) + "," + format_number(rep.mean_phonon) + "," +
       format_number(rep.parity) + "," + format_number(rep.purity) + "," +
       format_number(rep.negativity) + "," + format_number(rep.cat.alpha.real()) + "," +
       format_number(rep.cat.alpha.imag()) + "," + format_number(rep.cat.fidelity) + "\n";
  emit(ctx, "steady.csv", s);
  emit(ctx, "wigner_steady.csv", wigner_table(w));
  say(ctx, "steady: residual " + format_number(rep.result.residual) + ", <n> = " +
               format_number(rep.mean_phonon) + ", parity = " + format_number(rep.parity));
  if (!rep.result.converged)
    throw NumericalError("steady state not converged: residual " +
                         format_number(rep.result.residual));
  return rep;
}

ProofReport cmd_verify(const SystemParams& p, const VerifyOptions& opts, const RunContext& ctx) {
  ProofReport report;
  auto add = [&](const std::string& name, double closed, double oracle, double scale, double tol) {
    IdentityCheck c;
    c.name = name;
    c.closed_form = closed;
    c.oracle = oracle;
    const double denom = std::max({std::abs(closed), std::abs(oracle), scale});
    c.residual = denom > 0.0 ? std::abs(closed - oracle) / denom : 0.0;
    c.tolerance = tol;
    c.pass = c.residual <= tol;
    report.checks.push_back(std::move(c));
  };
  auto add_zero = [&](const std::string& name, double residual, double tol) {
    IdentityCheck c;
    c.name = name;
    c.oracle = residual;
    c.residual = residual;
    c.tolerance = tol;
    c.pass = residual <= tol;
    report.checks.push_back(std::move(c));
  };
  auto fail = [&](const std::string& name, const std::string& why) {
    IdentityCheck c;
    c.name = name + " (" + why + ")";
    c.residual = std::numeric_limits<double>::infinity();
    report.checks.push_back(std::move(c));
  };

  EffectiveParams e = effective_params(p);
  e.Gamma2_minus *= 1.0 + opts.perturb_Gamma2_minus;
  constexpr double kKernelTol = 1e-9;

  try {
    const M11Result m11 = assemble_M11(p);
    const double s1 = std::max(std::abs(e.Gamma1_minus), std::abs(e.delta1));
    add("M11 Gamma1_-", e.Gamma1_minus, m11.Gamma1_minus, 0.0, kKernelTol);
    add("M11 Gamma1_+", e.Gamma1_plus, m11.Gamma1_plus, 1e-12 * s1, kKernelTol);
    add("M11 delta1", e.delta1, m11.delta1, 1e-12 * s1, kKernelTol);
    const M11Result half = assemble_M11(p, 0.5);
    add("M11 secular threshold halved", m11.Gamma1_minus, half.Gamma1_minus, 0.0, 1e-15);
  } catch (const Error& err) {
    fail("M11", err.what());
  }
  try {
    const M22Result m22 = assemble_M22(p);
    const double s2 = std::max(std::abs(e.Gamma2_minus), std::abs(e.delta2));
    add("M22 Gamma2_-", e.Gamma2_minus, m22.Gamma2_minus, 0.0, kKernelTol);
    add("M22 Gamma2_+", e.Gamma2_plus, m22.Gamma2_plus, 1e-12 * s2, kKernelTol);
    add("M22 delta2", e.delta2, m22.delta2, 1e-12 * s2, kKernelTol);
    add("M22 delta_k", e.delta_k, m22.delta_k, 1e-12 * s2, kKernelTol);
    const M22Result half = assemble_M22(p, 0.5);
    add("M22 secular threshold halved", m22.Gamma2_minus, half.Gamma2_minus, 0.0, 1e-15);
  } catch (const Error& err) {
    fail("M22", err.what());
  }
  try {
    const M23Result m23 = assemble_M23(p);
    add("M23 |chi|", std::abs(e.chi), std::abs(m23.chi), 0.0, kKernelTol);
    add("M23 Re chi", e.chi.real(), m23.chi.real(), 1e-12 * std::abs(e.chi), kKernelTol);
    add("M23 Im chi", e.chi.imag(), m23.chi.imag(), 1e-12 * std::abs(e.chi), kKernelTol);
    const double far = std::abs(m23.chi) > 0.0 ? std::abs(m23.chi_far) / std::abs(m23.chi) : 0.0;
    add("M23 far sideband within neglect bound", m23.far_ratio, far, 0.0, 1e-9);
  } catch (const Error& err) {
    fail("M23", err.what());
  }

  for (double mult : {0.0, 1.0, 2.0, 4.0}) {
    const double delta = mult * p.omega_m;
    try {
      const cplx num = response_integral_numeric(delta, p.kappa);
      const cplx exact = 1.0 / cplx(0.5 * p.kappa, delta);
      add("quadrature 1/(kappa/2 + i " + format_number(mult) + " omega_m)", std::abs(exact),
          std::abs(exact) + std::abs(num - exact), 0.0, 1e-6);
    } catch (const Error& err) {
      fail("quadrature", err.what());
    }
  }

  const ProofReport m32 = verify_M32_zero(opts.seed);
  for (auto c : m32.checks) {
    c.name = "M32 " + c.name;
    report.checks.push_back(std::move(c));
  }

  try {
    SystemParams s = p;
    s.n_trunc = 15;
    const double t = M_PI / (2.0 * s.omega_d);
    const double r1 = sw_residual(s, t);
    s.g_z *= 0.5;
    const double r2 = sw_residual(s, t);
    add("SW residual ratio under g_z / 2", 4.0, r1 / r2, 0.0, 0.2);
  } catch (const Error& err) {
    fail("SW residual", err.what());
  }

  // Invariant battery on a small truncation.
  try {
    SystemParams s = p;
    s.n_trunc = 10;
    const EffectiveParams es = effective_params(s);
    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> normal;
    Matrix x(s.n_trunc, s.n_trunc);
    for (Index i = 0; i < x.rows(); ++i)
      for (Index j = 0; j < x.cols(); ++j) x(i, j) = cplx(normal(rng), normal(rng));
    Matrix rho = x * x.adjoint();
    rho /= rho.trace().real();

    BandedLindblad gen = effective_generator(es, s);
    Matrix banded;
    gen.apply(0.0, rho, banded);
    const Matrix dense =
        lindblad_rhs(effective_hamiltonian(es, s.n_trunc), effective_dissipators(es, s), rho);
    add_zero("banded vs dense effective generator", (banded - dense).norm() / dense.norm(), 1e-12);
    add_zero("generator trace preservation", std::abs(banded.trace()) / banded.norm(), 1e-12);

    const Matrix a = fock_destroy(4);
    const Matrix comm = a * a.adjoint() - a.adjoint() * a;
    const double expect[] = {1, 1, 1, -3};
    double worst = 0.0;
    for (Index i = 0; i < 4; ++i) worst = std::max(worst, std::abs(comm(i, i) - expect[i]));
    add_zero("[a, a^dag] on n_trunc = 4 is diag(1, 1, 1, -3)", worst, 1e-14);

    EffectiveParams prot = es;
    prot.Gamma1_minus = prot.Gamma1_plus = 0.0;
    SystemParams sp = s;
    sp.gamma = 0.0;
    BandedLindblad pg = effective_generator(prot, sp);
    const Matrix P = parity_operator(s.n_trunc);
    Matrix l1, l2;
    pg.apply(0.0, Matrix(P * rho * P), l1);
    pg.apply(0.0, rho, l2);
    add_zero("parity symmetry of the protected generator", (l1 - P * l2 * P).norm() / l2.norm(),
             1e-12);
  } catch (const Error& err) {
    fail("invariant battery", err.what());
  }

  const std::string text = report.text();
  if (ctx.log) *ctx.log << text;
  emit(ctx, "verify.txt", text);
  return report;
}

std::vector<SweepRow> cmd_sweep(const RunConfig& cfg, const std::string& key,
                                const std::vector<std::string>& values, const RunContext& ctx) {
  std::string canonical = key;
  if (!find_key(canonical)) {
    for (const char* section : {"params.", "run.", "output.", "steady."})
      if (find_key(section + key)) canonical = section + key;
  }
  if (!find_key(canonical)) throw ConfigError("unknown sweep key " + key);
  if (values.empty()) throw ConfigError("sweep needs at least one value");

  std::vector<SweepRow> rows(values.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < values.size(); i = next++) {
      SweepRow& row = rows[i];
      row.value = values[i];
      try {
        auto entries = cfg.entries;
        entries[canonical] = values[i];
        if (canonical == "params.delta_d_hz") entries.erase("params.omega_q_hz");
        if (canonical == "params.omega_q_hz") entries.erase("params.delta_d_hz");
        if (canonical == "params.Omega_hz") entries.erase("params.eps_over_g");
        if (canonical == "params.eps_over_g") entries.erase("params.Omega_hz");
        const RunConfig point = config_from_entries(entries);
        const EffectiveParams e = point.effective();
        row.Gamma2_minus = e.Gamma2_minus;
        row.abs_chi = std::abs(e.chi);
        const SteadyStateResult st = steady_state(e, point.params, steady_options(point));
        if (!st.converged)
          throw NumericalError("steady state not converged: residual " +
                               format_number(st.residual));
        const Matrix& rho = st.state.matrix();
        row.mean_phonon = mean_phonon(rho);
        row.parity = parity_expectation(rho);
        row.negativity = negativity_volume(wigner(rho, point.grid, 1));
      } catch (const std::exception& err) {
        row.error = err.what();
        std::replace(row.error.begin(), row.error.end(), ',', ';');
      }
    }
  };
  const int n_threads = std::max(1, std::min<int>(ctx.threads, int(values.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::string s =
      "key,value,Gamma2_minus_hz,Gamma2_minus_rad_s,abs_chi_hz,abs_chi_rad_s,mean_phonon,parity,"
      "negativity_volume,error\n";
  for (const auto& r : rows)
    s += canonical + "," + r.value + "," + format_number(r.Gamma2_minus / kTwoPi) + "," +
         format_number(r.Gamma2_minus) + "," + format_number(r.abs_chi / kTwoPi) + "," +
         format_number(r.abs_chi) + "," + format_number(r.mean_phonon) + "," +
         format_number(r.parity) + "," + format_number(r.negativity) + "," + r.error + "\n";
  emit(ctx, "sweep.csv", s);
  if (ctx.log) *ctx.log << s;
  return rows;
}

}  // namespace mechcat
