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

// Drives the mechcat executable end to end and checks exit codes and files.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mechcat/observables.hpp"

namespace fs = std::filesystem;
using namespace mechcat;

namespace {

const fs::path kRoot = fs::temp_directory_path() / "mechcat_integration";

const char* kSmall = R"([params]
omega_m_hz = 10e6
omega_q_hz = 20e6
omega_d_hz = 20e6
g_z_hz = 0.6e6
g_x_hz = 0.06e6
kappa_hz = 10e3
eps_over_g = 2
n_trunc = 10

[run]
horizon = 1
horizon_unit = kappa_t
samples = 10

[output]
wigner_times = 0, 1
wigner_points = 21
)";

fs::path write_config(const std::string& name, const std::string& text) {
  fs::create_directories(kRoot);
  const fs::path p = kRoot / name;
  std::ofstream(p) << text;
  return p;
}

int run(const std::string& args, const std::string& tag) {
  const fs::path log = kRoot / (tag + ".log");
  fs::create_directories(kRoot);
  const std::string cmd = std::string("\"") + MECHCAT_CLI_PATH + "\" " + args + " > \"" +
                          log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("keys and usage errors") {
  CHECK(run("keys", "keys") == 0);
  CHECK(slurp(kRoot / "keys.log").find("params.n_trunc") != std::string::npos);
  CHECK(run("frobnicate", "unknown") == 1);
  CHECK(run("", "none") == 1);
  CHECK(run("sweep --config x.conf", "sweep_missing") == 1);
}

TEST_CASE("rates from the shipped preset") {
  const fs::path out = kRoot / "rates";
  CHECK(run(std::string("rates --config ") + MECHCAT_CONFIG_DIR + "/cat_formation.conf --out " + out.string(),
            "rates") == 0);
  const std::string t = slurp(out / "rates.csv");
  CHECK(t.rfind("symbol,value_hz,value_rad_s,role\n", 0) == 0);
  CHECK(t.find("Gamma2_-,51840.") != std::string::npos);
}

TEST_CASE("config errors exit with 1") {
  const fs::path bad = write_config("bad.conf", std::string(kSmall) + "gx_coupling = 1\n");
  CHECK(run("rates --config " + bad.string(), "bad") == 1);
  CHECK(slurp(kRoot / "bad.log").find("line 19") != std::string::npos);
  CHECK(run("rates --config " + (kRoot / "absent.conf").string(), "absent") == 1);
  CHECK(run("rates", "no_config") == 1);
}

TEST_CASE("numerical failure exits with 2") {
  const fs::path cfg = write_config(
      "strict.conf", std::string(kSmall) + "[steady]\nmethod = null_space\nresidual_tol = 1e-300\n");
  CHECK(run("steady --config " + cfg.string(), "strict") == 2);
}

TEST_CASE("verify passes by default and flags a perturbed coefficient") {
  const fs::path out = kRoot / "verify";
  CHECK(run("verify --out " + out.string(), "verify") == 0);
  const std::string report = slurp(out / "verify.txt");
  CHECK(report.find("M32") != std::string::npos);
  CHECK(report.find("FAIL") == std::string::npos);
  CHECK(run("verify --perturb-gamma2 1e-6", "verify_bad") == 3);
  CHECK(slurp(kRoot / "verify_bad.log").find("M22 Gamma2_-") != std::string::npos);
}

TEST_CASE("evolve, steady, compare and sweep write their tables") {
  const fs::path cfg = write_config("small.conf", kSmall);
  const fs::path out = kRoot / "pipeline";
  fs::remove_all(out);
  const std::string common = " --config " + cfg.string() + " --out " + out.string();
  CHECK(run("evolve --model effective" + common, "evolve_eff") == 0);
  CHECK(run("evolve --model full" + common + " --threads 2", "evolve_full") == 0);
  CHECK(run("steady" + common, "steady") == 0);
  CHECK(run("compare" + common, "compare") == 0);
  CHECK(run("sweep --key eps_over_g --values 1 2" + common + " --threads 2", "sweep") == 0);
  CHECK(run("evolve --model sideways" + common, "evolve_bad_model") == 1);

  for (const char* f : {"trajectory_effective.csv", "trajectory_full.csv", "wigner_effective_0.csv",
                        "wigner_effective_1.csv", "wigner_full_1.csv", "steady.csv",
                        "wigner_steady.csv", "compare.csv", "sweep.csv"})
    CHECK_MESSAGE(fs::exists(out / f), f);

  const ParsedTable traj = read_table(out / "trajectory_full.csv");
  CHECK(traj.rows.size() == 11);
  CHECK(traj.rows.back()[1] == doctest::Approx(1.0).epsilon(1e-9));
  const ParsedTable cmp = read_table(out / "compare.csv");
  CHECK(cmp.rows.size() == 11);
  CHECK(cmp.rows.front()[3] == doctest::Approx(1.0).epsilon(1e-9));
  const ParsedTable w = read_table(out / "wigner_effective_0.csv");
  CHECK(w.rows.size() == 21 * 21);
  CHECK(slurp(out / "sweep.csv").find("params.eps_over_g,2,") != std::string::npos);
}

TEST_CASE("seed flag is accepted and does not change output") {
  const fs::path cfg = write_config("seed.conf", kSmall);
  const fs::path a = kRoot / "seed_a", b = kRoot / "seed_b";
  CHECK(run("evolve --config " + cfg.string() + " --out " + a.string() + " --seed 1", "seed_a") == 0);
  CHECK(run("evolve --config " + cfg.string() + " --out " + b.string() + " --seed 7", "seed_b") == 0);
  CHECK(slurp(a / "trajectory_effective.csv") == slurp(b / "trajectory_effective.csv"));
}
