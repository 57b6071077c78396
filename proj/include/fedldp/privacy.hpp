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
// zCDP calculus for the per-round Gaussian mechanism: (epsilon, delta) <-> rho
// conversion, per-step sensitivity, and composition across a noise schedule.
// All functions are pure and thread-safe.

#pragma once

#include <cstdint>
#include <vector>

namespace fedldp {

struct NoiseSchedule;

// An (epsilon, delta) target together with the equivalent zCDP budget
// rho_tgt. The three fields always satisfy
//   epsilon == rho_tgt + 2 * sqrt(rho_tgt * ln(1/delta)).
struct PrivacyBudget {
  double epsilon = 0.0;
  double delta = 0.0;
  double rho_tgt = 0.0;

  static PrivacyBudget from_eps_delta(double epsilon, double delta);
  static PrivacyBudget from_rho(double rho, double delta);
};

// Constants that determine the sensitivity of one communication round:
// step size gamma, per-sample gradient norm bound B, worker count n and
// per-worker sample count m.
struct SensitivityContext {
  double step_size = 0.0;       // gamma
  double grad_bound = 0.0;      // B
  int num_workers = 0;          // n
  int samples_per_worker = 0;   // m

  void validate() const;  // throws std::domain_error on violation
};

// rho = (sqrt(epsilon + ln(1/delta)) - sqrt(ln(1/delta)))^2, the zCDP budget
// whose (epsilon, delta)-DP conversion is exactly epsilon.
double rho_from_eps_delta(double epsilon, double delta);

// epsilon = rho + 2 * sqrt(rho * ln(1/delta)). rho = 0 is accepted and maps
// to epsilon = 0 (no-noise ablations).
double eps_from_rho(double rho, double delta);

// zCDP of one Gaussian mechanism release: sensitivity^2 / (2 * variance).
double gaussian_mechanism_rho(double sensitivity, double variance);

// Sensitivity of one round's obfuscated model message: 2*gamma*B / (n*m).
double per_step_sensitivity(const SensitivityContext& ctx);

// Per-round zCDP of round t under the schedule: 2*B^2 / (n^2 * m^2 * xi_t^2).
std::vector<double> per_round_rho(const NoiseSchedule& schedule,
                                  const SensitivityContext& ctx);

// Realized budget of a full schedule: rho = sum_t 2*B^2/(n^2*m^2*xi_t^2)
// composed additively, converted to (epsilon, delta) at the given delta.
// Throws std::domain_error on an empty schedule or a nonpositive variance.
PrivacyBudget audit_schedule(const NoiseSchedule& schedule,
                             const SensitivityContext& ctx, double delta);

}  // namespace fedldp
