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
// The composite objective: smooth per-sample losses with gradients,
// regularizers with closed-form proximal operators, and the constants
// (strong convexity, smoothness, gradient bound) the algorithm needs.

#pragma once

#include <optional>
#include <vector>

#include "fedldp/types.hpp"

namespace fedldp {

struct Sample {
  SparseVec features;  // strictly increasing inner indices, dimension d
  int label = 1;       // -1 or +1; ignored by the quadratic family
};

struct WorkerDataset {
  std::vector<Sample> samples;
  int worker_id = 0;
  int dim = 0;
};

enum class RegKind { kNone, kBoxIndicator, kWeightedL1Box };

struct Regularizer {
  RegKind kind = RegKind::kNone;
  double alpha = 0.0;  // box half-width
  Vector weights;      // per-coordinate l1 weights, kWeightedL1Box only

  static Regularizer none() { return {}; }
  static Regularizer box(double alpha);
  static Regularizer weighted_l1_box(Vector weights, double alpha);
  static Regularizer weighted_l1_box(double weight, int dim, double alpha);

  bool bounded() const { return kind != RegKind::kNone; }
  void validate(int dim) const;
};

// f_il(x) for the logistic family is ln(1 + exp(-(a'x) b)) + (l2/2)|x|^2;
// for the quadratic family it is |x - a|^2 / 2 (label and l2 unused).
enum class LossFamily { kLogisticL2, kQuadratic };

// Constants of the compact objective f(X) = (1/n) sum_i f_i(x_i): its block
// Hessian is (1/n) * Hess f_i, so strong_convexity = l2_coeff / n and
// smoothness = max_i L_i / n with L_i = l2 + sum_l |a_il|^2 / (4m).
struct DerivedConstants {
  double strong_convexity = 0.0;  // mu_f
  double smoothness = 0.0;        // L_f
  double grad_bound = 0.0;        // B
};

struct ProblemSpec {
  std::vector<WorkerDataset> datasets;
  LossFamily family = LossFamily::kLogisticL2;
  double l2_coeff = 0.0;
  Regularizer regularizer;
  DerivedConstants constants;

  int dim() const { return datasets.empty() ? 0 : datasets.front().dim; }
  int num_workers() const { return static_cast<int>(datasets.size()); }
  int samples_per_worker() const {
    return datasets.empty() ? 0
                            : static_cast<int>(datasets.front().samples.size());
  }
};

// Numerically stable logistic sigmoid.
double sigmoid(double u);

// Gradient of one sample loss at x.
Vector sample_gradient(const Sample& sample, const Vector& x, double l2_coeff,
                       LossFamily family = LossFamily::kLogisticL2);

// Gradient of f_i: the mean of the worker's sample gradients.
Vector worker_gradient(const WorkerDataset& dataset, const Vector& x,
                       double l2_coeff,
                       LossFamily family = LossFamily::kLogisticL2);

// prox_{scale*g}(z), entrywise closed form. The l1 weights scale with the
// prox parameter; the box does not.
Vector prox(const Regularizer& regularizer, const Vector& z, double scale);

// Upper bound on |grad f_il(x)| over the regularizer's box: for the logistic
// family max_{i,l} |a_il| + l2 * alpha * sqrt(d); for the quadratic family
// max_{i,l} |a_il| + alpha * sqrt(d). Requires a bounded regularizer.
double gradient_norm_bound(const std::vector<WorkerDataset>& datasets,
                           double l2_coeff, const Regularizer& regularizer,
                           LossFamily family);

// Derives (mu_f, L_f, B). Throws std::domain_error when strong convexity
// fails (logistic with l2_coeff = 0) or when B is unbounded (no box, no
// override).
DerivedConstants derive_constants(const std::vector<WorkerDataset>& datasets,
                                  double l2_coeff,
                                  const Regularizer& regularizer,
                                  LossFamily family,
                                  std::optional<double> grad_bound_override =
                                      std::nullopt);

// Builds and validates a full ProblemSpec (uniform dimensions and sample
// counts across workers, labels in {-1, +1}, constants derived).
ProblemSpec make_problem(std::vector<WorkerDataset> datasets,
                         LossFamily family, double l2_coeff,
                         Regularizer regularizer,
                         std::optional<double> grad_bound_override =
                             std::nullopt);

// Immutable per-worker view with the samples flattened into one sparse
// matrix; gradient() equals worker_gradient on the source dataset and is the
// form the engine evaluates every round.
class WorkerModel {
 public:
  WorkerModel(const WorkerDataset& dataset, double l2_coeff,
              LossFamily family);

  Vector gradient(const Vector& x) const;

 private:
  SparseMat features_;  // d x m, one sample per column
  Vector labels_;
  Vector center_;  // quadratic family: mean of the sample points
  double l2_coeff_;
  LossFamily family_;
};

}  // namespace fedldp
