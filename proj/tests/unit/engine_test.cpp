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

#include "fedldp/engine.hpp"

#include <cmath>

#include <doctest.h>

#include "fedldp/data_io.hpp"
#include "fedldp/errors.hpp"
#include "fedldp/rng.hpp"

namespace fedldp {
namespace {

struct QuadraticFixture {
  ProblemSpec problem;
  Vector x_star;
  Matrix y_star;  // d x n, block i = (c_i - x*) / n
};

QuadraticFixture quadratic_fixture(int workers, int dim, std::uint64_t seed) {
  const SyntheticData data =
      synthesize(SyntheticKind::kQuadraticMeans, workers, 1, dim, seed);
  QuadraticFixture fx;
  fx.problem = make_problem(data.workers, LossFamily::kQuadratic, 0.0,
                            Regularizer::none(), 1.0);
  fx.x_star = *data.x_star;
  fx.y_star.resize(dim, workers);
  for (int i = 0; i < workers; ++i) {
    const Vector center = Vector(fx.problem.datasets[i].samples[0].features);
    fx.y_star.col(i) = (center - fx.x_star) / static_cast<double>(workers);
  }
  return fx;
}

RunConfig zero_noise_config(const ProblemSpec& problem, int rounds,
                            double gamma, std::uint64_t seed = 0) {
  RunConfig cfg;
  cfg.problem = &problem;
  cfg.schedule = custom_schedule(std::vector<double>(rounds, 0.0));
  cfg.step_size = gamma;
  cfg.rounds = rounds;
  cfg.seed = seed;
  return cfg;
}

ProblemSpec logistic_problem(int workers, int samples, int dim,
                             std::uint64_t seed) {
  const SyntheticData data = synthesize(SyntheticKind::kLogisticSeparable,
                                        workers, samples, dim, seed);
  return make_problem(data.workers, LossFamily::kLogisticL2, 0.1,
                      Regularizer::weighted_l1_box(0.01, dim, 10.0));
}

TEST_CASE("zero-noise quadratic run converges to the mean of the centers") {
  const QuadraticFixture fx = quadratic_fixture(4, 5, 51);
  RunConfig cfg = zero_noise_config(fx.problem, 500, 0.25);
  cfg.metric_ref = fx.x_star;
  const RunResult result = run(cfg);
  for (int i = 0; i < 4; ++i) {
    CHECK((result.state.x.col(i) - fx.x_star).norm() < 1e-8);
  }
  CHECK(result.metrics.rows.back().optimality < 1e-8);
}

TEST_CASE("zero rounds return the initial state unchanged") {
  const QuadraticFixture fx = quadratic_fixture(3, 2, 52);
  RunConfig cfg;
  cfg.problem = &fx.problem;
  cfg.step_size = 0.1;
  cfg.rounds = 0;
  Vector init(2);
  init << 1.0, -2.0;
  cfg.init = init;
  const RunResult result = run(cfg);
  CHECK(result.metrics.rows.empty());
  CHECK(result.state.round == 0);
  for (int i = 0; i < 3; ++i) {
    CHECK((result.state.x.col(i) - init).norm() == 0.0);
  }
  CHECK(result.state.lambda.norm() == 0.0);
}

TEST_CASE("identical seeds give bitwise-identical runs") {
  const ProblemSpec p = logistic_problem(4, 6, 5, 53);
  SensitivityContext ctx{0.25, p.constants.grad_bound, 4, 6};
  RunConfig cfg;
  cfg.problem = &p;
  cfg.step_size = 0.25;
  cfg.rounds = 40;
  cfg.schedule = dynamic_schedule(40, 0.25,
                                  p.constants.strong_convexity, 0.1, ctx);
  cfg.seed = 777;
  const RunResult a = run(cfg);
  const RunResult b = run(cfg);
  CHECK((a.state.x - b.state.x).norm() == 0.0);
  CHECK((a.state.lambda - b.state.lambda).norm() == 0.0);
  REQUIRE(a.metrics.rows.size() == b.metrics.rows.size());
  for (std::size_t k = 0; k < a.metrics.rows.size(); ++k) {
    CHECK(a.metrics.rows[k].consensus == b.metrics.rows[k].consensus);
    CHECK(a.metrics.rows[k].cumulative_rho ==
          b.metrics.rows[k].cumulative_rho);
  }
}

TEST_CASE("communication form and compact form share one trajectory") {
  const ProblemSpec p = logistic_problem(5, 8, 6, 54);
  SensitivityContext ctx{0.2, p.constants.grad_bound, 5, 8};
  RunConfig cfg;
  cfg.problem = &p;
  cfg.step_size = 0.2;
  cfg.rounds = 100;
  cfg.schedule = dynamic_schedule(100, 0.2,
                                  p.constants.strong_convexity, 0.05, ctx);
  cfg.seed = 99;
  const RunResult lambda_form = run(cfg);
  const RunResult compact_form = run_compact(cfg);
  CHECK((lambda_form.state.x - compact_form.state.x)
            .cwiseAbs()
            .maxCoeff() < 1e-10);
  // Lambda equals the mean-centered compact dual.
  CHECK((lambda_form.state.lambda - compact_form.state.lambda)
            .cwiseAbs()
            .maxCoeff() < 1e-10);
  REQUIRE(compact_form.state.y.has_value());
}

TEST_CASE("single worker reduces to proximal gradient descent") {
  const ProblemSpec p = logistic_problem(1, 10, 4, 55);
  RunConfig cfg = zero_noise_config(p, 50, 0.2);
  const RunResult result = run(cfg);
  // Manual prox-gradient with the same step and prox scale (n = 1).
  Vector x = Vector::Zero(4);
  for (int t = 0; t < 50; ++t) {
    x = prox(p.regularizer,
             x - 0.2 * worker_gradient(p.datasets[0], x, p.l2_coeff),
             0.2);
  }
  CHECK((result.state.x.col(0) - x).norm() < 1e-12);
  CHECK(result.state.lambda.norm() == 0.0);
}

TEST_CASE("dual blocks always sum to zero") {
  const ProblemSpec p = logistic_problem(6, 5, 4, 56);
  SensitivityContext ctx{0.2, p.constants.grad_bound, 6, 5};
  RunConfig cfg;
  cfg.problem = &p;
  cfg.step_size = 0.2;
  cfg.rounds = 60;
  cfg.schedule = static_schedule(60, 0.05, ctx);
  cfg.seed = 5;
  const double tolerance = 1e-8 * 6 * 4;
  const auto check_sum = [&](int, const FederationState& state) {
    CHECK(state.lambda.rowwise().sum().norm() < tolerance);
  };
  run(cfg, check_sum);
  run_compact(cfg, check_sum);
}

TEST_CASE("zero-noise contraction of the Lyapunov function") {
  const QuadraticFixture fx = quadratic_fixture(5, 4, 57);
  const double gamma = 0.25;
  const double contraction =
      1.0 - gamma * std::min(fx.problem.constants.strong_convexity, 1.0);
  // The constructed saddle point satisfies the fixed-point identity:
  // the y* blocks are mean-centered and z* = x* - gamma (grad f + L y*)
  // is a prox fixed point.
  Vector grad_sum = Vector::Zero(4);
  for (int i = 0; i < 5; ++i) {
    grad_sum += fx.y_star.col(i);
  }
  CHECK(grad_sum.norm() < 1e-10);
  for (int i = 0; i < 5; ++i) {
    const Vector grad_block =
        worker_gradient(fx.problem.datasets[i], fx.x_star, 0.0,
                        LossFamily::kQuadratic) /
        5.0;
    const Vector z_star = fx.x_star - gamma * (grad_block + fx.y_star.col(i));
    CHECK((prox(fx.problem.regularizer, z_star, gamma / 5.0) - fx.x_star)
              .norm() < 1e-10);
  }

  RunConfig cfg = zero_noise_config(fx.problem, 100, gamma);
  Vector init(4);
  init << 3.0, -1.0, 2.0, 0.5;
  cfg.init = init;
  FederationState initial;
  initial.x = Matrix::Zero(4, 5);
  initial.x.colwise() = init;
  initial.y = Matrix::Zero(4, 5);
  double phi = lyapunov(initial, gamma, fx.x_star, fx.y_star);
  run_compact(cfg, [&](int, const FederationState& state) {
    const double next_phi = lyapunov(state, gamma, fx.x_star, fx.y_star);
    CHECK(next_phi <= contraction * phi + 1e-12);
    phi = next_phi;
  });
}

TEST_CASE("noisy recursion holds in sample mean") {
  const QuadraticFixture fx = quadratic_fixture(5, 4, 58);
  const double gamma = 0.2;
  const double xi_sq = 0.5;
  const double contraction =
      1.0 - gamma * std::min(fx.problem.constants.strong_convexity, 1.0);
  const double noise_term = 2.5 * 5 * 4 * gamma * gamma * xi_sq;
  const int seeds = 400;
  const int rounds = 6;
  // D_s(t) = Phi^{t+1} - contraction * Phi^t per seed.
  std::vector<std::vector<double>> deviations(rounds);
  for (int s = 0; s < seeds; ++s) {
    RunConfig cfg;
    cfg.problem = &fx.problem;
    cfg.schedule = custom_schedule(std::vector<double>(rounds, xi_sq));
    cfg.step_size = gamma;
    cfg.rounds = rounds;
    cfg.seed = 1000 + static_cast<std::uint64_t>(s);
    Vector init(4);
    init << 2.0, 1.0, -1.0, 0.0;
    cfg.init = init;
    FederationState initial;
    initial.x = Matrix::Zero(4, 5);
    initial.x.colwise() = init;
    initial.y = Matrix::Zero(4, 5);
    double phi = lyapunov(initial, gamma, fx.x_star, fx.y_star);
    run_compact(cfg, [&](int t, const FederationState& state) {
      const double next_phi = lyapunov(state, gamma, fx.x_star, fx.y_star);
      deviations[t - 1].push_back(next_phi - contraction * phi);
      phi = next_phi;
    });
  }
  for (int t = 0; t < rounds; ++t) {
    double mean = 0.0;
    for (double v : deviations[t]) mean += v;
    mean /= seeds;
    double var = 0.0;
    for (double v : deviations[t]) var += (v - mean) * (v - mean);
    var /= (seeds - 1);
    const double stderr_mean = std::sqrt(var / seeds);
    CHECK(mean <= noise_term + 5.0 * stderr_mean);
  }
}

TEST_CASE("optimality metric closed forms") {
  FederationState state;
  state.x.resize(2, 2);
  Vector x_star(2);
  x_star << 1.0, 2.0;

  state.x.col(0) = x_star;
  state.x.col(1) = x_star;
  OptimalityMetrics at_opt = optimality_metric(state, x_star);
  CHECK(at_opt.optimality == 0.0);
  CHECK(at_opt.consensus == 0.0);
  CHECK(at_opt.mean_error == 0.0);

  // Identical iterates away from the optimum: consensus vanishes.
  state.x.col(0) << 2.0, 2.0;
  state.x.col(1) << 2.0, 2.0;
  OptimalityMetrics consensus_free = optimality_metric(state, x_star);
  CHECK(consensus_free.consensus == 0.0);
  CHECK(consensus_free.optimality ==
        doctest::Approx(consensus_free.mean_error));

  // Symmetric split around x*: mean error vanishes, consensus is |u|^2.
  Vector u(2);
  u << 0.5, -1.0;
  state.x.col(0) = x_star + u;
  state.x.col(1) = x_star - u;
  OptimalityMetrics symmetric = optimality_metric(state, x_star);
  CHECK(symmetric.mean_error == 0.0);
  CHECK(symmetric.consensus == doctest::Approx(u.squaredNorm()));

  CHECK_THROWS_AS(optimality_metric(state, Vector::Zero(2)),
                  std::domain_error);
}

TEST_CASE("lyapunov value semantics") {
  FederationState state;
  state.x = Matrix::Zero(3, 2);
  Vector x_star = Vector::Zero(3);
  x_star[0] = 1.0;
  const Matrix y_star = Matrix::Zero(3, 2);

  CHECK_THROWS_AS(lyapunov(state, 0.1, x_star, y_star), std::logic_error);

  state.y = Matrix::Ones(3, 2);
  state.x.colwise() = x_star;
  CHECK(lyapunov(state, 0.0, x_star, y_star) == 0.0);  // primal part only
  CHECK(lyapunov(state, 0.5, x_star, y_star) == doctest::Approx(3.0));
  *state.y = y_star;
  CHECK(lyapunov(state, 0.5, x_star, y_star) == 0.0);
}

TEST_CASE("divergence guard raises a typed error") {
  const QuadraticFixture fx = quadratic_fixture(3, 3, 59);
  RunConfig cfg;
  cfg.problem = &fx.problem;
  cfg.schedule = custom_schedule({1e30, 1e30});
  cfg.step_size = 0.25;
  cfg.rounds = 2;
  cfg.seed = 3;
  CHECK_THROWS_AS(run(cfg), DivergenceError);
}

TEST_CASE("config validation") {
  const QuadraticFixture fx = quadratic_fixture(3, 3, 60);
  RunConfig cfg;
  cfg.problem = &fx.problem;
  cfg.schedule = custom_schedule({0.1});
  cfg.step_size = 0.25;
  cfg.rounds = 2;  // mismatch with the one-round schedule
  CHECK_THROWS_AS(run(cfg), ConfigError);
  cfg.rounds = 1;
  cfg.step_size = 0.3;  // above min{1/4, 1/L_f}
  CHECK_THROWS_AS(run(cfg), ConfigError);
  cfg.gamma_policy = GammaPolicy::kWarn;
  CHECK_NOTHROW(run(cfg));
}

TEST_CASE("metric stride subsamples rows but always logs the final round") {
  const QuadraticFixture fx = quadratic_fixture(2, 2, 61);
  RunConfig cfg = zero_noise_config(fx.problem, 25, 0.25);
  cfg.metric_stride = 10;
  cfg.metric_ref = fx.x_star;
  const RunResult result = run(cfg);
  REQUIRE(result.metrics.rows.size() == 3);
  CHECK(result.metrics.rows[0].round == 10);
  CHECK(result.metrics.rows[1].round == 20);
  CHECK(result.metrics.rows[2].round == 25);
}

TEST_CASE("cumulative rho matches the schedule audit") {
  const ProblemSpec p = logistic_problem(3, 4, 3, 62);
  SensitivityContext ctx{0.2, p.constants.grad_bound, 3, 4};
  RunConfig cfg;
  cfg.problem = &p;
  cfg.step_size = 0.2;
  cfg.rounds = 30;
  cfg.schedule = dynamic_schedule(30, 0.2,
                                  p.constants.strong_convexity, 0.2, ctx);
  cfg.seed = 8;
  const RunResult result = run(cfg);
  const double audited = audit_schedule(cfg.schedule, ctx, 1e-4).rho_tgt;
  CHECK(result.metrics.rows.back().cumulative_rho ==
        doctest::Approx(audited).epsilon(1e-12));
  double previous = 0.0;
  for (const MetricRow& row : result.metrics.rows) {
    CHECK(row.cumulative_rho >= previous);
    previous = row.cumulative_rho;
  }
}

}  // namespace
}  // namespace fedldp
