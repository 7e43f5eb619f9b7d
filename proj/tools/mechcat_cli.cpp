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

// Command-line front end. Exit codes: 0 success, 1 configuration error,
// 2 numerical failure, 3 verification failure.

#include <CLI11.hpp>
#include <iostream>

#include "mechcat/errors.hpp"
#include "mechcat/harness.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfig = 1;
constexpr int kNumerical = 2;
constexpr int kVerification = 3;

}  // namespace

int main(int argc, char** argv) {
  using namespace mechcat;

  CLI::App app{"Dissipative two-phonon cat-state simulator"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_dir;
  int threads = 1;
  unsigned seed = 0;  // reserved; every pipeline is deterministic
  app.add_option("--config", config_path, "run configuration file");
  app.add_option("--out", out_dir, "directory for emitted tables");
  app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "reserved for stochastic features");

  auto* rates = app.add_subcommand("rates", "effective master-equation coefficients");
  auto* evolve = app.add_subcommand("evolve", "propagate one model");
  std::string model = "effective";
  evolve->add_option("--model", model, "full or effective")
      ->check(CLI::IsMember({"full", "effective"}));
  auto* compare = app.add_subcommand("compare", "full model against effective model");
  auto* steady = app.add_subcommand("steady", "steady state of the effective model");
  auto* verify = app.add_subcommand("verify", "kernel and identity verification report");
  double perturb = 0.0;
  verify->add_option("--perturb-gamma2", perturb, "relative offset on closed-form Gamma2_-")
      ->group("");
  auto* sweep = app.add_subcommand("sweep", "steady states over one config key");
  std::string sweep_key;
  std::vector<std::string> sweep_values;
  sweep->add_option("--key", sweep_key, "config key, e.g. params.eps_over_g")->required();
  sweep->add_option("--values", sweep_values, "values to substitute")->required();
  auto* keys = app.add_subcommand("keys", "list accepted config keys and defaults");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  RunContext ctx;
  ctx.out_dir = out_dir;
  ctx.threads = threads;
  ctx.log = &std::cout;

  try {
    if (keys->parsed()) {
      std::cout << config_reference();
      return kOk;
    }
    if (verify->parsed()) {
      const SystemParams p = config_path.empty() ? reference_params() : parse_config(config_path).params;
      VerifyOptions opts;
      opts.perturb_Gamma2_minus = perturb;
      const ProofReport report = cmd_verify(p, opts, ctx);
      const bool ok = report.all_pass();
      std::cout << (ok ? "verify: all identities pass\n" : "verify: FAILURES present\n");
      return ok ? kOk : kVerification;
    }
    if (config_path.empty()) throw ConfigError("--config is required for this command");
    const RunConfig cfg = parse_config(config_path);
    for (const auto& w : cfg.params.warnings()) std::cerr << "warning: " << w << '\n';

    if (rates->parsed()) {
      cmd_rates(cfg, ctx);
    } else if (evolve->parsed()) {
      cmd_evolve(cfg, model == "full" ? ModelKind::full : ModelKind::effective, ctx);
    } else if (compare->parsed()) {
      cmd_compare(cfg, ctx);
    } else if (steady->parsed()) {
      cmd_steady(cfg, ctx);
    } else if (sweep->parsed()) {
      const auto rows = cmd_sweep(cfg, sweep_key, sweep_values, ctx);
      for (const auto& r : rows)
        if (!r.error.empty()) std::cerr << "sweep point " << r.value << ": " << r.error << '\n';
    }
    return kOk;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const FilesystemError& e) {
    std::cerr << "filesystem error: " << e.what() << '\n';
    return kConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kNumerical;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumerical;
  }
}
