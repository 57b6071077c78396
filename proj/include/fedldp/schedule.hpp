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
// Per-round Gaussian noise variances: the budget-exact dynamic allocation
// with geometrically decaying variances, the constant-variance baseline, and
// the minimum-rounds threshold below which the initial error still dominates
// the noise floor.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fedldp/privacy.hpp"

namespace fedldp {

enum class ScheduleMode { kDynamic, kStatic, kCustom };

std::string to_string(ScheduleMode mode);

struct NoiseSchedule {
  // xi_t^2 for t = 1..T, stored in round order.
  std::vector<double> variances;
  ScheduleMode mode = ScheduleMode::kCustom;
  // Per-round contraction factor 1 - gamma * min(mu_f, 1); the allocation
  // weights are q_t = decay_rate^(T - t). 1 for static/custom schedules.
  double decay_rate = 1.0;

  int rounds() const { return static_cast<int>(variances.size()); }
};

// Variances xi_t^2 = sqrt(pi / q_t) with q_t = (1 - gamma*min(mu_f,1))^(T-t)
// and sqrt(pi) = 2*B^2 * sum_t sqrt(q_t) / (rho_tgt * n^2 * m^2), i.e. the
// minimizer of sum_t q_t * xi_t^2 subject to the total zCDP budget rho_tgt.
// Variances decay geometrically with ratio sqrt(decay_rate); the audit of the
// result reproduces rho_tgt.
// Throws std::domain_error when gamma * min(mu_f, 1) >= 1.
NoiseSchedule dynamic_schedule(int rounds, double gamma, double mu_f,
                               double rho_tgt, const SensitivityContext& ctx);

// Constant variances xi_t^2 = 2*B^2*T / (rho_tgt * n^2 * m^2).
NoiseSchedule static_schedule(int rounds, double rho_tgt,
                              const SensitivityContext& ctx);

// Caller-supplied variances. Zero entries are permitted here (and only here)
// so that no-noise ablation runs are expressible; they are rejected by
// audit_schedule.
NoiseSchedule custom_schedule(std::vector<double> variances);

// Smallest round count T for which the contracted initial error
// (1 - gamma*min(mu_f,1))^T * phi1 falls below the noise floor:
//   T >= ln(eps^2*n*m^2*min(mu_f^2,1)*phi1 / (B^2*d*ln(1/delta)))
//        / (gamma*min(mu_f,1)).
// Returns 1 when the threshold is nonpositive (already at the floor).
int min_rounds(const PrivacyBudget& budget, const SensitivityContext& ctx,
               double mu_f, double gamma, int dim, double phi1);

// Allocation objective sum_t q_t * xi_t^2 with q_t = decay_rate^(T-t).
double weighted_cost(const NoiseSchedule& schedule, double decay_rate);

// Uses the schedule's own decay_rate as the weight base.
double weighted_cost(const NoiseSchedule& schedule);

}  // namespace fedldp
