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
// libsvm-format parsing, worker partitioning and synthetic problem
// generation. Parsing failures raise ParseError with the 1-based line number.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fedldp/problem.hpp"
#include "fedldp/types.hpp"

namespace fedldp {

struct Dataset {
  std::vector<Sample> samples;
  int dim = 0;
};

enum class PartitionStrategy { kUniformRandom, kLabelSorted };

struct PartitionPlan {
  int num_workers = 1;
  int samples_per_worker = 1;
  PartitionStrategy strategy = PartitionStrategy::kUniformRandom;
  std::uint64_t seed = 0;
};

// Lines are "label idx:val idx:val ..." with 1-based strictly increasing
// indices. Labels parse as reals and map {<= 0 -> -1, > 0 -> +1}. Blank
// lines and '#' comments are skipped. Indices are stored 0-based; the
// dimension is the largest index seen unless dim_override extends it.
Dataset parse_libsvm(std::istream& in,
                     std::optional<int> dim_override = std::nullopt);
Dataset parse_libsvm_file(const std::string& path,
                          std::optional<int> dim_override = std::nullopt);

// Canonical text form: "+1"/"-1" labels, 1-based indices, shortest
// round-trip value formatting, one '\n' per sample. parse(serialize(d))
// reproduces d exactly.
std::string serialize_libsvm(const Dataset& dataset);

// JSON dataset cache: {"dim": d, "samples": [{"label", "indices",
// "values"}, ...]} with 0-based indices. Lossless round trip.
std::string dataset_to_json(const Dataset& dataset);
Dataset dataset_from_json(const std::string& text);

// In-place per-feature scaling to [-1, 1] (divide by the max |value| of each
// feature over the dataset).
void scale_features_unit(Dataset& dataset);

// Splits the first n*m samples of a seeded shuffle (uniform_random) or of a
// label-sorted ordering (label_sorted, maximally heterogeneous) into n
// workers of m samples each. Deterministic given the plan's seed.
std::vector<WorkerDataset> partition(const Dataset& dataset,
                                     const PartitionPlan& plan);

enum class SyntheticKind { kQuadraticMeans, kLogisticSeparable };

struct SyntheticData {
  std::vector<WorkerDataset> workers;
  // Closed-form optimum; present for kQuadraticMeans (mean of the centers).
  std::optional<Vector> x_star;
};

// kQuadraticMeans: every sample of worker i equals a Gaussian center c_i, so
// f_i(x) = |x - c_i|^2 / 2 and the optimum is the mean of the centers.
// kLogisticSeparable: Gaussian features labeled by a planted unit separator.
SyntheticData synthesize(SyntheticKind kind, int num_workers,
                         int samples_per_worker, int dim, std::uint64_t seed);

}  // namespace fedldp
