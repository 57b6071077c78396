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

#include "fedldp/solver.hpp"

#include <cmath>

namespace fedldp {
namespace {

// Flattened centralized view: all samples in one sparse matrix.
struct CentralProblem {
  SparseMat features;  // d x (n*m)
  Vector labels;
  double l2_coeff = 0.0;
  LossFamily family = LossFamily::kLogisticL2;
  Vector quadratic_center;
  double step = 0.0;  // eta = 1/L_avg

  explicit CentralProblem(const ProblemSpec& p)
      : l2_coeff(p.l2_coeff), family(p.family) {
    long total = 0;
    for (const WorkerDataset& w : p.datasets) {
      total += static_cast<long>(w.samples.size());
    }
    features.resize(p.dim(), total);
    labels.resize(total);
    std::vector<Eigen::Triplet<Scalar>> entries;
    long col = 0;
    double sum_sq = 0.0;
    for (const WorkerDataset& w : p.datasets) {
      for (const Sample& s : w.samples) {
        labels[col] = static_cast<double>(s.label);
        for (SparseVec::InnerIterator it(s.features); it; ++it) {
          entries.emplace_back(static_cast<int>(it.index()),
                               static_cast<int>(col), it.value());
          sum_sq += it.value() * it.value();
        }
        ++col;
      }
    }
    features.setFromTriplets(entries.begin(), entries.end());
    if (family == LossFamily::kQuadratic) {
      quadratic_center =
          Vector(features * Vector::Constant(total, 1.0 / total));
      step = 1.0;  // Hess F = I
    } else {
      // L_avg = l2 + sum |a|^2 / (4 n m): smoothness of the centralized
      // average loss, independent of the engine's compact-form constants.
      const double l_avg = l2_coeff + sum_sq / (4.0 * static_cast<double>(
                                                          total));
      step = 1.0 / l_avg;
    }
  }

  Vector gradient(const Vector& x) const {
    if (family == LossFamily::kQuadratic) {
      return x - quadratic_center;
    }
    Vector margins = features.transpose() * x;
    const long total = labels.size();
    Vector coef(total);
    for (long l = 0; l < total; ++l) {
      coef[l] = -labels[l] * sigmoid(-margins[l] * labels[l]) / total;
    }
    return Vector(features * coef) + l2_coeff * x;
  }
};

double mapping_residual(const CentralProblem& cp, const Regularizer& reg,
                        const Vector& x, Vector* next) {
  Vector stepped = prox(reg, x - cp.step * cp.gradient(x), cp.step);
  const double residual = (x - stepped).norm() / cp.step;
  if (next != nullptr) {
    *next = std::move(stepped);
  }
  return residual;
}

}  // namespace

SolveReport solve(const ProblemSpec& problem, double tol, long max_iter) {
  if (!(problem.constants.strong_convexity > 0.0)) {
    throw std::domain_error("solve requires a strongly convex problem");
  }
  if (!(tol > 0.0) || max_iter < 1) {
    throw std::invalid_argument("solve: tol and max_iter must be positive");
  }
  const CentralProblem cp(problem);
  SolveReport report;
  report.x_star = Vector::Zero(problem.dim());
  for (long it = 0; it < max_iter; ++it) {
    Vector next;
    report.residual = mapping_residual(cp, problem.regularizer,
                                       report.x_star, &next);
    report.iterations = it;
    if (report.residual <= tol) {
      return report;
    }
    report.x_star = std::move(next);
  }
  report.residual =
      mapping_residual(cp, problem.regularizer, report.x_star, nullptr);
  report.iterations = max_iter;
  if (report.residual <= tol) {
    return report;
  }
  throw SolverError("solve did not reach tol " + std::to_string(tol) +
                        " within " + std::to_string(max_iter) + " iterations",
                    report);
}

double kkt_residual(const ProblemSpec& problem, const Vector& x) {
  const CentralProblem cp(problem);
  return mapping_residual(cp, problem.regularizer, x, nullptr);
}

}  // namespace fedldp
