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

#include "fedldp/schedule.hpp"

#include <cmath>
#include <stdexcept>

namespace fedldp {
namespace {

// sum_{p=0}^{T-1} r^p with r = exp(log_r) in (0, 1]. Closed geometric form
// (1 - r^T)/(1 - r) evaluated through expm1/log1p; direct summation near
// r = 1 where the closed form loses all significant digits.
double geometric_sum(double log_r, int rounds) {
  const double r = std::exp(log_r);
  if (r > 1.0 - 1e-12) {
    double sum = 0.0, term = 1.0;
    for (int p = 0; p < rounds; ++p) {
      sum += term;
      term *= r;
    }
    return sum;
  }
  return std::expm1(static_cast<double>(rounds) * log_r) / std::expm1(log_r);
}

double budget_unit(double rho_tgt, const SensitivityContext& ctx) {
  const double nm = static_cast<double>(ctx.num_workers) *
                    static_cast<double>(ctx.samples_per_worker);
  return 2.0 * ctx.grad_bound * ctx.grad_bound / (rho_tgt * nm * nm);
}

}  // namespace

std::string to_string(ScheduleMode mode) {
  switch (mode) {
    case ScheduleMode::kDynamic:
      return "dynamic";
    case ScheduleMode::kStatic:
      return "static";
    case ScheduleMode::kCustom:
      return "custom";
  }
  return "unknown";
}

NoiseSchedule dynamic_schedule(int rounds, double gamma, double mu_f,
                               double rho_tgt, const SensitivityContext& ctx) {
  ctx.validate();
  if (rounds < 1) {
    throw std::domain_error("rounds must be >= 1");
  }
  if (!(gamma > 0.0) || !(mu_f > 0.0)) {
    throw std::domain_error("gamma and mu_f must be positive");
  }
  if (!(rho_tgt > 0.0)) {
    throw std::domain_error("rho_tgt must be positive");
  }
  const double contraction = gamma * std::min(mu_f, 1.0);
  if (contraction >= 1.0) {
    throw std::domain_error(
        "gamma * min(mu_f, 1) must be < 1 for a positive decay rate");
  }

  // q_t = decay^(T-t); sqrt(q_t) decays with ratio r = sqrt(decay) per round.
  // log1p keeps log_r accurate when the contraction is tiny.
  const double decay = 1.0 - contraction;
  const double log_r = 0.5 * std::log1p(-contraction);
  const double sum_sqrt_q = geometric_sum(log_r, rounds);
  const double sqrt_pi = budget_unit(rho_tgt, ctx) * sum_sqrt_q;

  NoiseSchedule schedule;
  schedule.mode = ScheduleMode::kDynamic;
  schedule.decay_rate = decay;
  schedule.variances.resize(rounds);
  for (int t = 1; t <= rounds; ++t) {
    // xi_t^2 = sqrt(pi) * r^(t - T), evaluated in log space so that large
    // (T - t) * log(r) never degrades precision by repeated multiplication.
    schedule.variances[t - 1] =
        sqrt_pi * std::exp(static_cast<double>(rounds - t) * (-log_r));
  }
  return schedule;
}

NoiseSchedule static_schedule(int rounds, double rho_tgt,
                              const SensitivityContext& ctx) {
  ctx.validate();
  if (rounds < 1) {
    throw std::domain_error("rounds must be >= 1");
  }
  if (!(rho_tgt > 0.0)) {
    throw std::domain_error("rho_tgt must be positive");
  }
  NoiseSchedule schedule;
  schedule.mode = ScheduleMode::kStatic;
  schedule.decay_rate = 1.0;
  schedule.variances.assign(
      rounds, budget_unit(rho_tgt, ctx) * static_cast<double>(rounds));
  return schedule;
}

NoiseSchedule custom_schedule(std::vector<double> variances) {
  if (variances.empty()) {
    throw std::domain_error("schedule must contain at least one round");
  }
  for (double v : variances) {
    if (v < 0.0 || !std::isfinite(v)) {
      throw std::domain_error("custom variances must be finite and >= 0");
    }
  }
  NoiseSchedule schedule;
  schedule.mode = ScheduleMode::kCustom;
  schedule.decay_rate = 1.0;
  schedule.variances = std::move(variances);
  return schedule;
}

int min_rounds(const PrivacyBudget& budget, const SensitivityContext& ctx,
               double mu_f, double gamma, int dim, double phi1) {
  ctx.validate();
  if (!(gamma > 0.0) || !(mu_f > 0.0) || dim < 1 || !(phi1 > 0.0)) {
    throw std::domain_error("mu_f, gamma, dim and phi1 must be positive");
  }
  const double n = static_cast<double>(ctx.num_workers);
  const double m = static_cast<double>(ctx.samples_per_worker);
  const double b2 = ctx.grad_bound * ctx.grad_bound;
  const double arg = budget.epsilon * budget.epsilon * n * m * m *
                     std::min(mu_f * mu_f, 1.0) * phi1 /
                     (b2 * static_cast<double>(dim) * -std::log(budget.delta));
  if (!(arg > 1.0)) {
    return 1;
  }
  const double threshold = std::log(arg) / (gamma * std::min(mu_f, 1.0));
  return std::max(1, static_cast<int>(std::ceil(threshold)));
}

double weighted_cost(const NoiseSchedule& schedule, double decay_rate) {
  if (!(decay_rate > 0.0) || decay_rate > 1.0) {
    throw std::domain_error("decay_rate must lie in (0, 1]");
  }
  const int rounds = schedule.rounds();
  const double log_decay = std::log(decay_rate);
  double cost = 0.0;
  for (int t = 1; t <= rounds; ++t) {
    const double q = std::exp(static_cast<double>(rounds - t) * log_decay);
    cost += q * schedule.variances[t - 1];
  }
  return cost;
}

double weighted_cost(const NoiseSchedule& schedule) {
  return weighted_cost(schedule, schedule.decay_rate);
}

}  // namespace fedldp
