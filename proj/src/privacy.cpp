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

#include "fedldp/privacy.hpp"

#include <cmath>
#include <stdexcept>

#include "fedldp/schedule.hpp"

namespace fedldp {
namespace {

// ln(1/delta) as -ln(delta); avoids overflow of 1/delta for tiny delta.
double log_inv_delta(double delta) {
  if (!(delta > 0.0) || !(delta < 1.0)) {
    throw std::domain_error("delta must lie in (0, 1)");
  }
  return -std::log(delta);
}

}  // namespace

PrivacyBudget PrivacyBudget::from_eps_delta(double epsilon, double delta) {
  return PrivacyBudget{epsilon, delta, rho_from_eps_delta(epsilon, delta)};
}

PrivacyBudget PrivacyBudget::from_rho(double rho, double delta) {
  return PrivacyBudget{eps_from_rho(rho, delta), delta, rho};
}

void SensitivityContext::validate() const {
  if (!(step_size > 0.0)) {
    throw std::domain_error("step_size must be positive");
  }
  if (!(grad_bound > 0.0)) {
    throw std::domain_error("grad_bound must be positive");
  }
  if (num_workers < 1 || samples_per_worker < 1) {
    throw std::domain_error("worker and sample counts must be >= 1");
  }
}

double rho_from_eps_delta(double epsilon, double delta) {
  if (!(epsilon > 0.0)) {
    throw std::domain_error("epsilon must be positive");
  }
  const double l = log_inv_delta(delta);
  // sqrt(eps + l) - sqrt(l) in rationalized form; the plain difference
  // cancels catastrophically for eps << l.
  const double root = epsilon / (std::sqrt(epsilon + l) + std::sqrt(l));
  return root * root;
}

double eps_from_rho(double rho, double delta) {
  if (rho < 0.0) {
    throw std::domain_error("rho must be nonnegative");
  }
  const double l = log_inv_delta(delta);
  return rho + 2.0 * std::sqrt(rho * l);
}

double gaussian_mechanism_rho(double sensitivity, double variance) {
  if (!(variance > 0.0)) {
    throw std::domain_error("variance must be positive");
  }
  if (sensitivity < 0.0) {
    throw std::domain_error("sensitivity must be nonnegative");
  }
  return sensitivity * sensitivity / (2.0 * variance);
}

double per_step_sensitivity(const SensitivityContext& ctx) {
  ctx.validate();
  return 2.0 * ctx.step_size * ctx.grad_bound /
         (static_cast<double>(ctx.num_workers) * ctx.samples_per_worker);
}

std::vector<double> per_round_rho(const NoiseSchedule& schedule,
                                  const SensitivityContext& ctx) {
  const double nm = static_cast<double>(ctx.num_workers) *
                    static_cast<double>(ctx.samples_per_worker);
  const double numer = 2.0 * ctx.grad_bound * ctx.grad_bound / (nm * nm);
  std::vector<double> rho(schedule.variances.size());
  for (std::size_t t = 0; t < schedule.variances.size(); ++t) {
    const double variance = schedule.variances[t];
    if (!(variance > 0.0)) {
      throw std::domain_error("schedule variance must be positive at round " +
                              std::to_string(t + 1));
    }
    rho[t] = numer / variance;
  }
  return rho;
}

PrivacyBudget audit_schedule(const NoiseSchedule& schedule,
                             const SensitivityContext& ctx, double delta) {
  if (schedule.variances.empty()) {
    throw std::domain_error("schedule must contain at least one round");
  }
  const std::vector<double> rho_t = per_round_rho(schedule, ctx);
  // Compensated sum keeps composition exact for very long schedules.
  double sum = 0.0, carry = 0.0;
  for (double r : rho_t) {
    const double y = r - carry;
    const double s = sum + y;
    carry = (s - sum) - y;
    sum = s;
  }
  return PrivacyBudget::from_rho(sum, delta);
}

}  // namespace fedldp
