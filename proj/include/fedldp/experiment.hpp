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
//
// Experiment orchestration behind the CLI subcommands: config loading
// (fail-fast on unknown keys), problem preparation, schedule construction
// with a budget-safety audit, repeated seeded runs, and CSV/JSON emission.
// Every output byte is determined by the config and its seeds.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fedldp/data_io.hpp"
#include "fedldp/engine.hpp"
#include "fedldp/privacy.hpp"
#include "fedldp/problem.hpp"
#include "fedldp/schedule.hpp"
#include "fedldp/solver.hpp"

namespace fedldp {

struct SyntheticSpec {
  SyntheticKind kind = SyntheticKind::kLogisticSeparable;
  int num_workers = 1;
  int samples_per_worker = 1;
  int dim = 1;
  std::uint64_t seed = 0;
};

// The regularizer as configured; materialized once the dimension is known.
struct RegularizerConfig {
  RegKind kind = RegKind::kNone;
  double alpha = 0.0;
  std::optional<double> omega_uniform;
  std::optional<std::vector<double>> omega;

  Regularizer materialize(int dim) const;
};

struct ExperimentConfig {
  std::optional<std::string> dataset_path;
  std::optional<SyntheticSpec> synthetic;
  std::optional<int> dim_override;
  bool normalize_features = false;
  std::optional<PartitionPlan> partition_plan;

  double epsilon = 0.0;
  double delta = 0.0;
  std::optional<double> gamma;
  std::vector<int> t_values;
  ScheduleMode schedule_mode = ScheduleMode::kDynamic;
  int repeats = 20;
  std::uint64_t base_seed = 1;
  std::string output = "out";

  double l2_coeff = 0.0;
  LossFamily loss = LossFamily::kLogisticL2;
  RegularizerConfig regularizer;
  // Box half-width wrapped around problems whose configured regularizer is
  // unbounded, so that the gradient bound B exists.
  double smooth_box_alpha = 1000.0;
  std::optional<double> grad_bound;

  std::optional<std::string> x_star_path;
  double solver_tol = 1e-10;
  int metric_stride = 1;
  IterationForm form = IterationForm::kLambda;
  GammaPolicy gamma_policy = GammaPolicy::kReject;
  double phi1 = 1.0;
};

// Throws ConfigError on malformed JSON, unknown keys, or invalid values.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config_file(const std::string& path);

// Data loading/synthesis, partitioning, box wrapping and constant
// derivation, resolved step size, sensitivity context and budget.
struct PreparedExperiment {
  ProblemSpec problem;
  std::optional<Vector> closed_form_x_star;
  double gamma = 0.0;
  SensitivityContext ctx;
  PrivacyBudget budget;
};

PreparedExperiment prepare(const ExperimentConfig& config);

// x* artifact if configured, otherwise a fresh high-accuracy solve.
Vector resolve_reference(const ExperimentConfig& config,
                         const PreparedExperiment& prepared);

// Schedule for one sweep point, audited against the configured budget
// (throws ConfigError if the realized epsilon would exceed it).
NoiseSchedule build_schedule(const ExperimentConfig& config,
                             const PreparedExperiment& prepared, int rounds);

struct SweepRow {
  int rounds = 0;
  double final_optimality_mean = 0.0;
  double final_optimality_std = 0.0;
  double final_optimality_var = 0.0;
  double realized_epsilon = 0.0;
};

// Per-repeat and aggregate metric CSVs for every configured T.
void cmd_run(const ExperimentConfig& config, int jobs = 1);

// Final-optimality row per T, written to sweep.csv; also returned.
std::vector<SweepRow> cmd_sweep_t(const ExperimentConfig& config,
                                  int jobs = 1);

// Privacy report for the first configured T as a JSON document:
// {rho, epsilon, delta, per_round_rho, schedule{mode, decay_rate, variances},
//  min_rounds}.
std::string cmd_audit(const ExperimentConfig& config);

// Writes x_star.json into the output directory.
SolveReport cmd_solve_ref(const ExperimentConfig& config);

// Writes the configured synthetic dataset as libsvm text (plus the
// closed-form optimum when one exists).
void cmd_synth(const ExperimentConfig& config);

// Serialized x* artifact helpers shared by solve-ref and run.
void write_solve_report(const std::string& path, const SolveReport& report);
SolveReport read_solve_report(const std::string& path);

}  // namespace fedldp
