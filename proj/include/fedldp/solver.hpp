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
// Centralized high-accuracy solver for the composite problem; its result is
// the reference optimum for metrics and cross-checks.

#pragma once

#include <stdexcept>

#include "fedldp/problem.hpp"
#include "fedldp/types.hpp"

namespace fedldp {

struct SolveReport {
  Vector x_star;
  double residual = 0.0;  // prox-gradient mapping norm at x_star
  long iterations = 0;
};

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, SolveReport best)
      : std::runtime_error(what), best_(std::move(best)) {}
  const SolveReport& best() const { return best_; }

 private:
  SolveReport best_;
};

// Proximal gradient iteration x <- prox_{eta g}(x - eta grad F(x)) on the
// centralized average loss F with eta = 1/L_avg, stopped when the gradient
// mapping norm |x - prox step(x)| / eta falls below tol. Throws SolverError
// (best iterate attached) when max_iter is exhausted.
SolveReport solve(const ProblemSpec& problem, double tol = 1e-10,
                  long max_iter = 1'000'000);

// Fixed-point residual |x - prox_{eta g}(x - eta grad F(x))| / eta; zero
// exactly at the unique optimum.
double kkt_residual(const ProblemSpec& problem, const Vector& x);

}  // namespace fedldp
