// Copyright 2026 The FedLDP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fedldp/errors.hpp"
#include "fedldp/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitDivergence = 3;
constexpr int kExitIo = 4;

struct CliOptions {
  std::string config_path;
  int jobs = 1;
  std::optional<std::string> out_override;
  std::optional<std::uint64_t> seed_override;
};

void add_common(CLI::App* sub, CliOptions& opts) {
  sub->add_option("--config", opts.config_path, "Experiment config (JSON)")
      ->required();
  sub->add_option("--jobs", opts.jobs, "Concurrent repeats")
      ->check(CLI::PositiveNumber);
  sub->add_option("--out", opts.out_override, "Output directory override");
  sub->add_option("--seed", opts.seed_override, "Base seed override");
}

fedldp::ExperimentConfig load(const CliOptions& opts) {
  fedldp::ExperimentConfig config =
      fedldp::load_config_file(opts.config_path);
  if (opts.out_override) {
    config.output = *opts.out_override;
  }
  if (opts.seed_override) {
    config.base_seed = *opts.seed_override;
  }
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Locally differentially private federated learning simulator"};
  app.require_subcommand(1);

  CliOptions opts;
  CLI::App* run = app.add_subcommand(
      "run", "Execute repeated runs; write per-repeat and aggregate CSVs");
  CLI::App* sweep = app.add_subcommand(
      "sweep-t", "Final optimality for each configured T; write sweep.csv");
  CLI::App* audit = app.add_subcommand(
      "audit", "Print the schedule's privacy report as JSON");
  CLI::App* solve_ref = app.add_subcommand(
      "solve-ref", "Solve the centralized problem; write x_star.json");
  CLI::App* synth = app.add_subcommand(
      "synth", "Write the configured synthetic dataset as libsvm text");
  for (CLI::App* sub : {run, sweep, audit, solve_ref, synth}) {
    add_common(sub, opts);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    const fedldp::ExperimentConfig config = load(opts);
    if (run->parsed()) {
      fedldp::cmd_run(config, opts.jobs);
    } else if (sweep->parsed()) {
      fedldp::cmd_sweep_t(config, opts.jobs);
    } else if (audit->parsed()) {
      std::cout << fedldp::cmd_audit(config) << "\n";
    } else if (solve_ref->parsed()) {
      const fedldp::SolveReport report = fedldp::cmd_solve_ref(config);
      std::fprintf(stderr, "solved in %ld iterations, residual %.3e\n",
                   report.iterations, report.residual);
    } else if (synth->parsed()) {
      fedldp::cmd_synth(config);
    }
    return kExitOk;
  } catch (const fedldp::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const fedldp::DivergenceError& e) {
    std::fprintf(stderr, "divergence: %s\n", e.what());
    return kExitDivergence;
  } catch (const fedldp::SolverError& e) {
    std::fprintf(stderr, "solver: %s\n", e.what());
    return kExitDivergence;
  } catch (const fedldp::ParseError& e) {
    std::fprintf(stderr, "parse error: %s\n", e.what());
    return kExitIo;
  } catch (const std::ios_base::failure& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return kExitIo;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
