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
// The noisy primal-dual federated iteration. Each round, worker i sends the
// obfuscated model
//   xt_i = x_i - gamma * ((1/n) grad f_i(x_i) + zeta_i + dual_i),
// the server broadcasts the mean, and workers update the dual, take the
// consensus-corrected step z_i = xt_i - gamma * (xt_i - mean), and apply
// prox_{(gamma/n) g}. The dual term is either the accumulated Lambda_i
// (communication form) or the mean-centered y_i (compact form); the two
// produce identical trajectories under the same noise stream.

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "fedldp/problem.hpp"
#include "fedldp/schedule.hpp"
#include "fedldp/types.hpp"

namespace fedldp {

struct FederationState {
  Matrix x;       // d x n primal blocks
  Matrix lambda;  // d x n dual blocks; columns sum to ~0
  // Compact-form dual; only tracked by run_compact (lambda is then its
  // mean-centered image).
  std::optional<Matrix> y;
  int round = 0;

  Vector mean_iterate() const { return x.rowwise().mean(); }
};

enum class IterationForm { kLambda, kCompact };
enum class GammaPolicy { kReject, kWarn };

struct RunConfig {
  const ProblemSpec* problem = nullptr;  // must outlive the run
  NoiseSchedule schedule;                // length must equal rounds
  double step_size = 0.0;
  int rounds = 0;
  std::uint64_t seed = 0;
  IterationForm form = IterationForm::kLambda;
  Vector init;        // empty -> zeros; else replicated to every worker
  Vector metric_ref;  // x*, empty -> optimality columns are NaN
  GammaPolicy gamma_policy = GammaPolicy::kReject;
  int metric_stride = 1;
};

struct MetricRow {
  int round = 0;
  double optimality = 0.0;
  double consensus = 0.0;
  double mean_error = 0.0;
  double cumulative_rho = 0.0;
};

struct MetricSeries {
  std::vector<MetricRow> rows;
};

struct OptimalityMetrics {
  double optimality = 0.0;
  double consensus = 0.0;
  double mean_error = 0.0;
};

struct RunResult {
  FederationState state;
  MetricSeries metrics;
};

// Called after each completed round with the 1-based round index.
using RoundObserver = std::function<void(int, const FederationState&)>;

// Communication form: duals are the accumulated Lambda_i.
RunResult run(const RunConfig& config, const RoundObserver& observer = {});

// Compact form: the dual y is kept explicitly and its consensus image is
// applied by mean-centering. Same trajectory as run() for the same seed.
RunResult run_compact(const RunConfig& config,
                      const RoundObserver& observer = {});

// Dispatches on config.form.
RunResult execute(const RunConfig& config, const RoundObserver& observer = {});

// consensus = (1/n) sum_i |xbar - x_i|^2 (unnormalized),
// mean_error = |xbar - x*|^2 / |x*|^2, optimality = consensus + mean_error.
OptimalityMetrics optimality_metric(const FederationState& state,
                                    const Vector& x_star);

// The consensus term alone; usable without a reference optimum.
double optimality_metric_consensus_only(const FederationState& state);

// Lyapunov value |X - x* 1'|_F^2 + gamma * |Y - Y*|_F^2. Requires a
// compact-form state (throws std::logic_error otherwise).
double lyapunov(const FederationState& state, double step_size,
                const Vector& x_star, const Matrix& y_star);

}  // namespace fedldp
