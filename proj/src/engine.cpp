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
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "fedldp/errors.hpp"
#include "fedldp/rng.hpp"

namespace fedldp {
namespace {

constexpr double kDivergenceGuard = 1e12;

void validate_config(const RunConfig& cfg) {
  if (cfg.problem == nullptr) {
    throw ConfigError("run config has no problem");
  }
  const ProblemSpec& p = *cfg.problem;
  if (cfg.rounds < 0) {
    throw ConfigError("rounds must be nonnegative");
  }
  if (cfg.schedule.rounds() != cfg.rounds) {
    throw ConfigError("schedule length " +
                      std::to_string(cfg.schedule.rounds()) +
                      " does not match rounds " + std::to_string(cfg.rounds));
  }
  if (!(cfg.step_size > 0.0)) {
    throw ConfigError("step size must be positive");
  }
  const double gamma_cap = std::min(0.25, 1.0 / p.constants.smoothness);
  if (cfg.step_size > gamma_cap * (1.0 + 1e-12)) {
    if (cfg.gamma_policy == GammaPolicy::kReject) {
      throw ConfigError("step size " + std::to_string(cfg.step_size) +
                        " exceeds min{1/4, 1/L_f} = " +
                        std::to_string(gamma_cap));
    }
    std::fprintf(stderr,
                 "warning: step size %g exceeds min{1/4, 1/L_f} = %g; "
                 "convergence guarantees no longer apply\n",
                 cfg.step_size, gamma_cap);
  }
  if (cfg.init.size() != 0 && cfg.init.size() != p.dim()) {
    throw ConfigError("init vector dimension mismatch");
  }
  if (cfg.metric_ref.size() != 0 && cfg.metric_ref.size() != p.dim()) {
    throw ConfigError("metric reference dimension mismatch");
  }
  if (cfg.metric_stride < 1) {
    throw ConfigError("metric stride must be >= 1");
  }
}

void check_finite(const Matrix& x, int round) {
  if (!x.allFinite() ||
      x.colwise().norm().maxCoeff() > kDivergenceGuard) {
    throw DivergenceError("iterate norm exceeded " +
                          std::to_string(kDivergenceGuard) + " at round " +
                          std::to_string(round));
  }
}

RunResult run_impl(const RunConfig& cfg, bool compact,
                   const RoundObserver& observer) {
  validate_config(cfg);
  const ProblemSpec& p = *cfg.problem;
  const int n = p.num_workers();
  const int d = p.dim();
  const int m = p.samples_per_worker();
  const double gamma = cfg.step_size;
  const double inv_n = 1.0 / static_cast<double>(n);
  const double prox_scale = gamma * inv_n;

  std::vector<WorkerModel> models;
  models.reserve(n);
  for (const WorkerDataset& w : p.datasets) {
    models.emplace_back(w, p.l2_coeff, p.family);
  }

  RunResult result;
  FederationState& state = result.state;
  state.x.resize(d, n);
  if (cfg.init.size() == 0) {
    state.x.setZero();
  } else {
    state.x.colwise() = cfg.init;
  }
  state.lambda = Matrix::Zero(d, n);
  if (compact) {
    state.y = Matrix::Zero(d, n);
  }

  const double b = p.constants.grad_bound;
  const double nm = static_cast<double>(n) * static_cast<double>(m);
  const double rho_unit = 2.0 * b * b / (nm * nm);

  Matrix obfuscated(d, n);
  Vector noise(d);
  double cumulative_rho = 0.0;

  for (int t = 1; t <= cfg.rounds; ++t) {
    const double variance = cfg.schedule.variances[t - 1];
    const double stddev = std::sqrt(variance);
    Matrix& dual = compact ? *state.y : state.lambda;
    Vector dual_mean;
    if (compact) {
      dual_mean = dual.rowwise().mean();
    }
    for (int i = 0; i < n; ++i) {
      Vector step = inv_n * models[i].gradient(state.x.col(i));
      if (variance > 0.0) {
        NoiseStream(cfg.seed, static_cast<std::uint64_t>(i),
                    static_cast<std::uint64_t>(t))
            .fill_gaussian(noise, stddev);
        step += noise;
      }
      if (compact) {
        step += dual.col(i) - dual_mean;
      } else {
        step += dual.col(i);
      }
      obfuscated.col(i) = state.x.col(i) - gamma * step;
    }
    check_finite(obfuscated, t);

    const Vector broadcast = obfuscated.rowwise().mean();
    for (int i = 0; i < n; ++i) {
      const Vector deviation = obfuscated.col(i) - broadcast;
      dual.col(i) += deviation;
      state.x.col(i) =
          prox(p.regularizer, obfuscated.col(i) - gamma * deviation,
               prox_scale);
    }
    if (compact) {
      state.lambda = dual.colwise() - Vector(dual.rowwise().mean());
    }
    check_finite(state.x, t);
    state.round = t;

    cumulative_rho += variance > 0.0
                          ? rho_unit / variance
                          : std::numeric_limits<double>::infinity();
    if (t % cfg.metric_stride == 0 || t == cfg.rounds) {
      MetricRow row;
      row.round = t;
      row.cumulative_rho = cumulative_rho;
      if (cfg.metric_ref.size() != 0) {
        const OptimalityMetrics metrics =
            optimality_metric(state, cfg.metric_ref);
        row.optimality = metrics.optimality;
        row.consensus = metrics.consensus;
        row.mean_error = metrics.mean_error;
      } else {
        row.optimality = std::numeric_limits<double>::quiet_NaN();
        row.mean_error = std::numeric_limits<double>::quiet_NaN();
        row.consensus = optimality_metric_consensus_only(state);
      }
      result.metrics.rows.push_back(row);
    }
    if (observer) {
      observer(t, state);
    }
  }
  return result;
}

}  // namespace

double optimality_metric_consensus_only(const FederationState& state) {
  const Vector mean = state.x.rowwise().mean();
  return (state.x.colwise() - mean).colwise().squaredNorm().mean();
}

RunResult run(const RunConfig& config, const RoundObserver& observer) {
  return run_impl(config, /*compact=*/false, observer);
}

RunResult run_compact(const RunConfig& config, const RoundObserver& observer) {
  return run_impl(config, /*compact=*/true, observer);
}

RunResult execute(const RunConfig& config, const RoundObserver& observer) {
  return config.form == IterationForm::kCompact ? run_compact(config, observer)
                                                : run(config, observer);
}

OptimalityMetrics optimality_metric(const FederationState& state,
                                    const Vector& x_star) {
  const double ref_sq = x_star.squaredNorm();
  if (!(ref_sq > 0.0)) {
    throw std::domain_error("optimality metric undefined for x* = 0");
  }
  const Vector mean = state.x.rowwise().mean();
  OptimalityMetrics out;
  out.consensus = (state.x.colwise() - mean).colwise().squaredNorm().mean();
  out.mean_error = (mean - x_star).squaredNorm() / ref_sq;
  out.optimality = out.consensus + out.mean_error;
  return out;
}

double lyapunov(const FederationState& state, double step_size,
                const Vector& x_star, const Matrix& y_star) {
  if (!state.y.has_value()) {
    throw std::logic_error(
        "lyapunov requires a compact-form run (y not tracked)");
  }
  const double primal = (state.x.colwise() - x_star).squaredNorm();
  const double dual = (*state.y - y_star).squaredNorm();
  return primal + step_size * dual;
}

}  // namespace fedldp
