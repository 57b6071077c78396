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

#include <doctest.h>

#include "fedldp/rng.hpp"

namespace fedldp {
namespace {

double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

// Projects random positive variances onto the budget constraint by uniform
// scaling, so the result audits to exactly rho_tgt.
NoiseSchedule random_feasible(int rounds, double rho_tgt,
                              const SensitivityContext& ctx,
                              NoiseStream& rng) {
  std::vector<double> variances(rounds);
  for (double& v : variances) {
    v = std::exp(4.0 * rng.next_uniform() - 2.0);
  }
  NoiseSchedule candidate = custom_schedule(variances);
  const double rho = audit_schedule(candidate, ctx, 1e-4).rho_tgt;
  for (double& v : candidate.variances) {
    v *= rho / rho_tgt;
  }
  return candidate;
}

TEST_CASE("one-round dynamic schedule collapses to the static value") {
  SensitivityContext ctx{0.2, 1.5, 4, 25};
  const double rho = 0.7;
  const NoiseSchedule dyn = dynamic_schedule(1, 0.2, 0.5, rho, ctx);
  const NoiseSchedule sta = static_schedule(1, rho, ctx);
  REQUIRE(dyn.rounds() == 1);
  CHECK(rel_err(dyn.variances[0], sta.variances[0]) < 1e-12);
  const double nm = 4.0 * 25.0;
  CHECK(rel_err(dyn.variances[0], 2.0 * 1.5 * 1.5 / (rho * nm * nm)) < 1e-12);
}

TEST_CASE("dynamic variances decay geometrically with ratio sqrt(decay)") {
  SensitivityContext ctx{0.1, 1.0, 5, 10};
  // decay = 1 - gamma * min(mu_f, 1) = 0.81
  const NoiseSchedule s = dynamic_schedule(3, 0.19, 1.0, 0.3, ctx);
  CHECK(s.mode == ScheduleMode::kDynamic);
  CHECK(s.decay_rate == doctest::Approx(0.81).epsilon(1e-12));
  for (int t = 0; t + 1 < 3; ++t) {
    CHECK(rel_err(s.variances[t + 1] / s.variances[t], 0.9) < 1e-10);
  }
  // Nonincreasing in t.
  CHECK(s.variances[0] >= s.variances[1]);
  CHECK(s.variances[1] >= s.variances[2]);
}

TEST_CASE("generated schedules audit back to rho_tgt") {
  SensitivityContext ctx{0.25, 2.0, 8, 50};
  NoiseStream rng(11, 0, 0);
  for (int k = 0; k < 25; ++k) {
    const double rho = 0.01 + 3.0 * rng.next_uniform();
    const int rounds = 1 + static_cast<int>(rng.next_below(3000));
    const double gamma = 0.01 + 0.2 * rng.next_uniform();
    const double mu = 0.005 + rng.next_uniform();
    const double audited_dyn =
        audit_schedule(dynamic_schedule(rounds, gamma, mu, rho, ctx), ctx,
                       1e-4)
            .rho_tgt;
    CHECK(rel_err(audited_dyn, rho) < 1e-9);
    const double audited_sta =
        audit_schedule(static_schedule(rounds, rho, ctx), ctx, 1e-4).rho_tgt;
    CHECK(rel_err(audited_sta, rho) < 1e-12);
  }
}

TEST_CASE("static schedule hand case and linearity in T") {
  SensitivityContext ctx{0.1, 1.0, 1, 1};
  const NoiseSchedule one = static_schedule(1, 2.0, ctx);
  CHECK(one.variances[0] == doctest::Approx(1.0).epsilon(1e-12));
  const NoiseSchedule ten = static_schedule(10, 2.0, ctx);
  for (double v : ten.variances) {
    CHECK(rel_err(v, 10.0 * one.variances[0]) < 1e-12);
  }
}

TEST_CASE("dynamic schedule rejects a vanishing decay rate") {
  SensitivityContext ctx{0.5, 1.0, 2, 2};
  CHECK_THROWS_AS(dynamic_schedule(5, 1.0, 1.0, 0.5, ctx), std::domain_error);
  CHECK_THROWS_AS(dynamic_schedule(5, 2.0, 1.0, 0.5, ctx), std::domain_error);
  CHECK_THROWS_AS(dynamic_schedule(0, 0.1, 1.0, 0.5, ctx), std::domain_error);
  CHECK_THROWS_AS(dynamic_schedule(5, 0.1, 1.0, 0.0, ctx), std::domain_error);
}

TEST_CASE("dynamic converges to static as the contraction vanishes") {
  SensitivityContext ctx{0.1, 1.0, 3, 20};
  const NoiseSchedule dyn = dynamic_schedule(200, 1e-8, 1.0, 0.4, ctx);
  const NoiseSchedule sta = static_schedule(200, 0.4, ctx);
  for (int t = 0; t < 200; ++t) {
    CHECK(rel_err(dyn.variances[t], sta.variances[t]) < 1e-5);
  }
}

TEST_CASE("min_rounds threshold") {
  SensitivityContext ctx{0.25, 1.0, 20, 100};
  const PrivacyBudget budget = PrivacyBudget::from_eps_delta(1.0, 1e-4);
  // Below the noise floor already.
  CHECK(min_rounds(budget, ctx, 1.0, 0.25, 22, 1e-9) == 1);
  // Hand-evaluated Table-style threshold: ceil(45.9995) = 46.
  CHECK(min_rounds(budget, ctx, 1.0, 0.25, 22, 100.0) == 46);
}

TEST_CASE("min_rounds grows by at most ceil(ln 2 / contraction) + 1 when "
          "phi1 doubles") {
  SensitivityContext ctx{0.25, 1.0, 20, 100};
  const PrivacyBudget budget = PrivacyBudget::from_eps_delta(1.0, 1e-4);
  NoiseStream rng(3, 0, 0);
  for (int k = 0; k < 50; ++k) {
    const double phi1 = std::exp(8.0 * rng.next_uniform());
    const double gamma = 0.01 + 0.24 * rng.next_uniform();
    const double mu = 0.05 + rng.next_uniform();
    const int base = min_rounds(budget, ctx, mu, gamma, 22, phi1);
    const int doubled = min_rounds(budget, ctx, mu, gamma, 22, 2.0 * phi1);
    const int step = static_cast<int>(
        std::ceil(std::log(2.0) / (gamma * std::min(mu, 1.0))));
    CHECK(doubled >= base);
    CHECK(doubled <= base + step + 1);
  }
}

TEST_CASE("weighted cost of a one-round schedule is its variance") {
  SensitivityContext ctx{0.1, 1.0, 2, 5};
  const NoiseSchedule s = dynamic_schedule(1, 0.1, 0.9, 0.4, ctx);
  CHECK(rel_err(weighted_cost(s), s.variances[0]) < 1e-12);
}

TEST_CASE("dynamic allocation minimizes the weighted cost") {
  SensitivityContext ctx{0.1, 1.0, 5, 40};
  NoiseStream rng(17, 0, 0);
  for (int k = 0; k < 10; ++k) {
    const int rounds = 2 + static_cast<int>(rng.next_below(60));
    const double gamma = 1.0 - (0.5 + 0.499 * rng.next_uniform());
    const double rho = 0.05 + rng.next_uniform();
    const NoiseSchedule dyn = dynamic_schedule(rounds, gamma, 1.0, rho, ctx);
    const double decay = dyn.decay_rate;
    const double dyn_cost = weighted_cost(dyn);
    CHECK(dyn_cost <
          weighted_cost(static_schedule(rounds, rho, ctx), decay));
    for (int j = 0; j < 50; ++j) {
      const NoiseSchedule feasible = random_feasible(rounds, rho, ctx, rng);
      CHECK(rel_err(audit_schedule(feasible, ctx, 1e-4).rho_tgt, rho) < 1e-9);
      CHECK(dyn_cost <= weighted_cost(feasible, decay) * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("very long schedules stay budget exact") {
  SensitivityContext ctx{0.25, 2.0, 20, 100};
  const int rounds = 100000;
  const double rho = 0.5;
  const NoiseSchedule sta = static_schedule(rounds, rho, ctx);
  CHECK(rel_err(audit_schedule(sta, ctx, 1e-4).rho_tgt, rho) < 1e-12);
  // Contraction small enough that the variance span stays representable.
  const NoiseSchedule dyn = dynamic_schedule(rounds, 0.25, 0.01, rho, ctx);
  CHECK(rel_err(audit_schedule(dyn, ctx, 1e-4).rho_tgt, rho) < 1e-9);
  CHECK(std::isfinite(dyn.variances.front()));
  const double expected_ratio = std::sqrt(dyn.decay_rate);
  for (int t : {0, 1, 50000, rounds - 2}) {
    CHECK(rel_err(dyn.variances[t + 1] / dyn.variances[t], expected_ratio) <
          1e-10);
  }
}

TEST_CASE("custom schedules accept zero variances, constructors reject them") {
  const NoiseSchedule ablation = custom_schedule({0.0, 0.0, 0.0});
  CHECK(ablation.rounds() == 3);
  CHECK_THROWS_AS(custom_schedule({}), std::domain_error);
  CHECK_THROWS_AS(custom_schedule({1.0, -0.5}), std::domain_error);
}

}  // namespace
}  // namespace fedldp
