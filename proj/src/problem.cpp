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

#include "fedldp/problem.hpp"

#include <cmath>
#include <stdexcept>

namespace fedldp {
namespace {

void check_dim(const Vector& x, int dim, const char* where) {
  if (x.size() != dim) {
    throw std::invalid_argument(std::string(where) + ": dimension mismatch");
  }
}

double squared_norm(const SparseVec& v) {
  double s = 0.0;
  for (SparseVec::InnerIterator it(v); it; ++it) {
    s += it.value() * it.value();
  }
  return s;
}

}  // namespace

Regularizer Regularizer::box(double alpha) {
  Regularizer r;
  r.kind = RegKind::kBoxIndicator;
  r.alpha = alpha;
  return r;
}

Regularizer Regularizer::weighted_l1_box(Vector weights, double alpha) {
  Regularizer r;
  r.kind = RegKind::kWeightedL1Box;
  r.alpha = alpha;
  r.weights = std::move(weights);
  return r;
}

Regularizer Regularizer::weighted_l1_box(double weight, int dim, double alpha) {
  return weighted_l1_box(Vector::Constant(dim, weight), alpha);
}

void Regularizer::validate(int dim) const {
  switch (kind) {
    case RegKind::kNone:
      return;
    case RegKind::kBoxIndicator:
      if (!(alpha > 0.0)) {
        throw std::domain_error("box half-width alpha must be positive");
      }
      return;
    case RegKind::kWeightedL1Box:
      if (!(alpha > 0.0)) {
        throw std::domain_error("box half-width alpha must be positive");
      }
      if (weights.size() != dim || (weights.array() <= 0.0).any()) {
        throw std::domain_error(
            "l1 weights must be positive and match the dimension");
      }
      return;
  }
}

double sigmoid(double u) {
  if (u >= 0.0) {
    return 1.0 / (1.0 + std::exp(-u));
  }
  const double e = std::exp(u);
  return e / (1.0 + e);
}

Vector sample_gradient(const Sample& sample, const Vector& x, double l2_coeff,
                       LossFamily family) {
  check_dim(x, static_cast<int>(sample.features.size()), "sample_gradient");
  if (family == LossFamily::kQuadratic) {
    Vector grad = x;
    for (SparseVec::InnerIterator it(sample.features); it; ++it) {
      grad[it.index()] -= it.value();
    }
    return grad;
  }
  const double b = static_cast<double>(sample.label);
  const double margin = sample.features.dot(x) * b;
  const double coef = -b * sigmoid(-margin);
  Vector grad = l2_coeff * x;
  for (SparseVec::InnerIterator it(sample.features); it; ++it) {
    grad[it.index()] += coef * it.value();
  }
  return grad;
}

Vector worker_gradient(const WorkerDataset& dataset, const Vector& x,
                       double l2_coeff, LossFamily family) {
  if (dataset.samples.empty()) {
    throw std::invalid_argument("worker_gradient: empty dataset");
  }
  Vector sum = Vector::Zero(x.size());
  for (const Sample& s : dataset.samples) {
    sum += sample_gradient(s, x, l2_coeff, family);
  }
  return sum / static_cast<double>(dataset.samples.size());
}

Vector prox(const Regularizer& regularizer, const Vector& z, double scale) {
  if (!(scale > 0.0)) {
    throw std::domain_error("prox scale must be positive");
  }
  switch (regularizer.kind) {
    case RegKind::kNone:
      return z;
    case RegKind::kBoxIndicator:
      return z.cwiseMax(-regularizer.alpha).cwiseMin(regularizer.alpha);
    case RegKind::kWeightedL1Box: {
      check_dim(z, static_cast<int>(regularizer.weights.size()), "prox");
      const double alpha = regularizer.alpha;
      Vector out(z.size());
      for (Eigen::Index j = 0; j < z.size(); ++j) {
        const double shrunk =
            std::min(std::max(std::abs(z[j]) - scale * regularizer.weights[j],
                              0.0),
                     alpha);
        out[j] = std::copysign(shrunk, z[j]);
      }
      return out;
    }
  }
  throw std::logic_error("prox: unknown regularizer kind");
}

double gradient_norm_bound(const std::vector<WorkerDataset>& datasets,
                           double l2_coeff, const Regularizer& regularizer,
                           LossFamily family) {
  if (!regularizer.bounded()) {
    throw std::domain_error(
        "gradient bound requires a box-bounded regularizer");
  }
  if (datasets.empty()) {
    throw std::invalid_argument("gradient_norm_bound: no datasets");
  }
  double max_norm = 0.0;
  for (const WorkerDataset& w : datasets) {
    for (const Sample& s : w.samples) {
      max_norm = std::max(max_norm, std::sqrt(squared_norm(s.features)));
    }
  }
  const double dim = static_cast<double>(datasets.front().dim);
  const double box_term = regularizer.alpha * std::sqrt(dim);
  // |x|_inf <= alpha inside the box, so |x| <= alpha * sqrt(d). The logistic
  // part contributes at most |a| since |b * sigmoid(.)| <= 1.
  if (family == LossFamily::kQuadratic) {
    return max_norm + box_term;
  }
  return max_norm + l2_coeff * box_term;
}

DerivedConstants derive_constants(const std::vector<WorkerDataset>& datasets,
                                  double l2_coeff,
                                  const Regularizer& regularizer,
                                  LossFamily family,
                                  std::optional<double> grad_bound_override) {
  if (datasets.empty()) {
    throw std::invalid_argument("derive_constants: no datasets");
  }
  const double n = static_cast<double>(datasets.size());
  DerivedConstants out;
  if (family == LossFamily::kQuadratic) {
    // Hess f_i = I, so the per-worker constants are exactly 1.
    out.strong_convexity = 1.0 / n;
    out.smoothness = 1.0 / n;
  } else {
    if (!(l2_coeff > 0.0)) {
      throw std::domain_error(
          "strong convexity requires a positive l2 coefficient");
    }
    double max_worker_smoothness = 0.0;
    for (const WorkerDataset& w : datasets) {
      double sum_sq = 0.0;
      for (const Sample& s : w.samples) {
        sum_sq += squared_norm(s.features);
      }
      const double worker_smoothness =
          l2_coeff + sum_sq / (4.0 * static_cast<double>(w.samples.size()));
      max_worker_smoothness = std::max(max_worker_smoothness,
                                       worker_smoothness);
    }
    out.strong_convexity = l2_coeff / n;
    out.smoothness = max_worker_smoothness / n;
  }
  if (grad_bound_override) {
    if (!(*grad_bound_override > 0.0)) {
      throw std::domain_error("grad_bound override must be positive");
    }
    out.grad_bound = *grad_bound_override;
  } else {
    out.grad_bound =
        gradient_norm_bound(datasets, l2_coeff, regularizer, family);
  }
  return out;
}

ProblemSpec make_problem(std::vector<WorkerDataset> datasets,
                         LossFamily family, double l2_coeff,
                         Regularizer regularizer,
                         std::optional<double> grad_bound_override) {
  if (datasets.empty()) {
    throw std::invalid_argument("make_problem: no datasets");
  }
  const int dim = datasets.front().dim;
  const std::size_t samples = datasets.front().samples.size();
  for (const WorkerDataset& w : datasets) {
    if (w.dim != dim) {
      throw std::invalid_argument("make_problem: worker dimensions differ");
    }
    if (w.samples.size() != samples || w.samples.empty()) {
      throw std::invalid_argument(
          "make_problem: workers must hold the same positive sample count");
    }
    for (const Sample& s : w.samples) {
      if (s.features.size() != dim) {
        throw std::invalid_argument("make_problem: sample dimension mismatch");
      }
      if (s.label != 1 && s.label != -1) {
        throw std::invalid_argument("make_problem: labels must be -1 or +1");
      }
    }
  }
  if (family == LossFamily::kQuadratic && l2_coeff != 0.0) {
    throw std::invalid_argument(
        "make_problem: quadratic family takes no l2 coefficient");
  }
  regularizer.validate(dim);
  ProblemSpec spec;
  spec.family = family;
  spec.l2_coeff = l2_coeff;
  spec.constants = derive_constants(datasets, l2_coeff, regularizer, family,
                                    grad_bound_override);
  spec.regularizer = std::move(regularizer);
  spec.datasets = std::move(datasets);
  return spec;
}

WorkerModel::WorkerModel(const WorkerDataset& dataset, double l2_coeff,
                         LossFamily family)
    : l2_coeff_(l2_coeff), family_(family) {
  const int m = static_cast<int>(dataset.samples.size());
  features_.resize(dataset.dim, m);
  labels_.resize(m);
  std::vector<Eigen::Triplet<Scalar>> entries;
  for (int l = 0; l < m; ++l) {
    const Sample& s = dataset.samples[l];
    labels_[l] = static_cast<double>(s.label);
    for (SparseVec::InnerIterator it(s.features); it; ++it) {
      entries.emplace_back(static_cast<int>(it.index()), l, it.value());
    }
  }
  features_.setFromTriplets(entries.begin(), entries.end());
  if (family_ == LossFamily::kQuadratic) {
    center_ = Vector(features_ * Vector::Constant(m, 1.0 / m));
  }
}

Vector WorkerModel::gradient(const Vector& x) const {
  if (family_ == LossFamily::kQuadratic) {
    return x - center_;
  }
  Vector margins = features_.transpose() * x;
  const int m = static_cast<int>(labels_.size());
  Vector coef(m);
  for (int l = 0; l < m; ++l) {
    coef[l] = -labels_[l] * sigmoid(-margins[l] * labels_[l]) / m;
  }
  return Vector(features_ * coef) + l2_coeff_ * x;
}

}  // namespace fedldp
