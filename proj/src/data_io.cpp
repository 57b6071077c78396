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

#include "fedldp/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "fedldp/errors.hpp"
#include "fedldp/rng.hpp"

namespace fedldp {
namespace {

constexpr long kMaxFeatureIndex = 100'000'000;  // 1-based cap

struct RawSample {
  std::vector<int> indices;  // 0-based
  std::vector<double> values;
  int label = 0;
};

// from_chars rejects an explicit '+', which libsvm labels routinely carry.
std::string_view strip_plus(std::string_view token) {
  if (token.size() > 1 && token.front() == '+' && token[1] != '+' &&
      token[1] != '-') {
    token.remove_prefix(1);
  }
  return token;
}

bool parse_full_double(std::string_view token, double& out) {
  token = strip_plus(token);
  const char* begin = token.data();
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc{} && ptr == end;
}

bool parse_full_long(std::string_view token, long& out) {
  token = strip_plus(token);
  const char* begin = token.data();
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc{} && ptr == end;
}

RawSample parse_line(std::string_view line, long line_no) {
  RawSample sample;
  std::size_t pos = 0;
  auto next_token = [&]() -> std::string_view {
    while (pos < line.size() && std::isspace(static_cast<unsigned char>(
                                    line[pos]))) {
      ++pos;
    }
    const std::size_t start = pos;
    while (pos < line.size() && !std::isspace(static_cast<unsigned char>(
                                     line[pos]))) {
      ++pos;
    }
    return line.substr(start, pos - start);
  };

  const std::string_view label_token = next_token();
  double label_value = 0.0;
  if (!parse_full_double(label_token, label_value) ||
      !std::isfinite(label_value)) {
    throw ParseError(line_no, "malformed label '" + std::string(label_token) +
                                  "'");
  }
  sample.label = label_value > 0.0 ? 1 : -1;

  long prev_index = 0;
  for (std::string_view token = next_token(); !token.empty();
       token = next_token()) {
    const std::size_t colon = token.find(':');
    if (colon == std::string_view::npos || colon == 0 ||
        colon + 1 == token.size()) {
      throw ParseError(line_no, "malformed feature token '" +
                                    std::string(token) + "'");
    }
    long index = 0;
    if (!parse_full_long(token.substr(0, colon), index) || index < 1 ||
        index > kMaxFeatureIndex) {
      throw ParseError(line_no, "feature index out of range in '" +
                                    std::string(token) + "'");
    }
    if (index <= prev_index) {
      throw ParseError(line_no, "feature indices must strictly increase");
    }
    double value = 0.0;
    if (!parse_full_double(token.substr(colon + 1), value) ||
        !std::isfinite(value)) {
      throw ParseError(line_no, "malformed feature value in '" +
                                    std::string(token) + "'");
    }
    prev_index = index;
    sample.indices.push_back(static_cast<int>(index - 1));
    sample.values.push_back(value);
  }
  return sample;
}

std::string format_double(double value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

}  // namespace

Dataset parse_libsvm(std::istream& in, std::optional<int> dim_override) {
  std::vector<RawSample> raw;
  int max_index = 0;  // 0-based
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    if (!view.empty() && view.back() == '\r') {
      view.remove_suffix(1);
    }
    const std::size_t hash = view.find('#');
    if (hash != std::string_view::npos) {
      view = view.substr(0, hash);
    }
    const std::size_t first =
        view.find_first_not_of(" \t\v\f");
    if (first == std::string_view::npos) {
      continue;  // blank or comment-only line
    }
    RawSample sample = parse_line(view, line_no);
    if (!sample.indices.empty()) {
      max_index = std::max(max_index, sample.indices.back());
    }
    raw.push_back(std::move(sample));
  }
  if (raw.empty()) {
    throw ParseError(line_no, "no samples in input");
  }
  int dim = max_index + 1;
  if (dim_override) {
    if (*dim_override < dim) {
      throw ParseError(line_no, "dimension override " +
                                    std::to_string(*dim_override) +
                                    " smaller than observed index " +
                                    std::to_string(dim));
    }
    dim = *dim_override;
  }
  Dataset dataset;
  dataset.dim = dim;
  dataset.samples.reserve(raw.size());
  for (const RawSample& r : raw) {
    Sample s;
    s.label = r.label;
    s.features.resize(dim);
    s.features.reserve(static_cast<int>(r.indices.size()));
    for (std::size_t k = 0; k < r.indices.size(); ++k) {
      s.features.insertBack(r.indices[k]) = r.values[k];
    }
    dataset.samples.push_back(std::move(s));
  }
  return dataset;
}

Dataset parse_libsvm_file(const std::string& path,
                          std::optional<int> dim_override) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError(0, "cannot open '" + path + "'");
  }
  return parse_libsvm(in, dim_override);
}

std::string serialize_libsvm(const Dataset& dataset) {
  std::string out;
  for (const Sample& s : dataset.samples) {
    out += s.label > 0 ? "+1" : "-1";
    for (SparseVec::InnerIterator it(s.features); it; ++it) {
      out += ' ';
      out += std::to_string(it.index() + 1);
      out += ':';
      out += format_double(it.value());
    }
    out += '\n';
  }
  return out;
}

std::string dataset_to_json(const Dataset& dataset) {
  nlohmann::json root;
  root["dim"] = dataset.dim;
  nlohmann::json samples = nlohmann::json::array();
  for (const Sample& s : dataset.samples) {
    nlohmann::json entry;
    entry["label"] = s.label;
    std::vector<int> indices;
    std::vector<double> values;
    indices.reserve(s.features.nonZeros());
    values.reserve(s.features.nonZeros());
    for (SparseVec::InnerIterator it(s.features); it; ++it) {
      indices.push_back(static_cast<int>(it.index()));
      values.push_back(it.value());
    }
    entry["indices"] = indices;
    entry["values"] = values;
    samples.push_back(std::move(entry));
  }
  root["samples"] = std::move(samples);
  return root.dump();
}

Dataset dataset_from_json(const std::string& text) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, std::string("dataset cache is not valid JSON: ") +
                            e.what());
  }
  Dataset dataset;
  try {
    dataset.dim = root.at("dim").get<int>();
    for (const nlohmann::json& entry : root.at("samples")) {
      Sample s;
      s.label = entry.at("label").get<int>();
      const auto indices = entry.at("indices").get<std::vector<int>>();
      const auto values = entry.at("values").get<std::vector<double>>();
      if (indices.size() != values.size()) {
        throw ParseError(0, "dataset cache indices/values length mismatch");
      }
      s.features.resize(dataset.dim);
      s.features.reserve(static_cast<int>(indices.size()));
      int previous = -1;
      for (std::size_t k = 0; k < indices.size(); ++k) {
        if (indices[k] <= previous || indices[k] >= dataset.dim) {
          throw ParseError(0, "dataset cache indices out of order or range");
        }
        previous = indices[k];
        s.features.insertBack(indices[k]) = values[k];
      }
      dataset.samples.push_back(std::move(s));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, std::string("dataset cache malformed: ") + e.what());
  }
  return dataset;
}

void scale_features_unit(Dataset& dataset) {
  Vector max_abs = Vector::Zero(dataset.dim);
  for (const Sample& s : dataset.samples) {
    for (SparseVec::InnerIterator it(s.features); it; ++it) {
      max_abs[it.index()] = std::max(max_abs[it.index()],
                                     std::abs(it.value()));
    }
  }
  for (Sample& s : dataset.samples) {
    for (SparseVec::InnerIterator it(s.features); it; ++it) {
      if (max_abs[it.index()] > 0.0) {
        it.valueRef() /= max_abs[it.index()];
      }
    }
  }
}

std::vector<WorkerDataset> partition(const Dataset& dataset,
                                     const PartitionPlan& plan) {
  if (plan.num_workers < 1 || plan.samples_per_worker < 1) {
    throw ConfigError("partition plan requires positive worker/sample counts");
  }
  const std::size_t need = static_cast<std::size_t>(plan.num_workers) *
                           static_cast<std::size_t>(plan.samples_per_worker);
  if (need > dataset.samples.size()) {
    throw ConfigError("dataset holds " +
                      std::to_string(dataset.samples.size()) +
                      " samples but the plan needs " + std::to_string(need));
  }
  std::vector<std::size_t> order(dataset.samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (plan.strategy == PartitionStrategy::kUniformRandom) {
    NoiseStream rng(plan.seed, 0, 0);
    for (std::size_t i = order.size() - 1; i > 0; --i) {
      const std::size_t j = static_cast<std::size_t>(rng.next_below(i + 1));
      std::swap(order[i], order[j]);
    }
  } else {
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) {
                       return dataset.samples[a].label <
                              dataset.samples[b].label;
                     });
  }
  std::vector<WorkerDataset> workers(plan.num_workers);
  std::size_t next = 0;
  for (int w = 0; w < plan.num_workers; ++w) {
    workers[w].worker_id = w;
    workers[w].dim = dataset.dim;
    workers[w].samples.reserve(plan.samples_per_worker);
    for (int l = 0; l < plan.samples_per_worker; ++l) {
      workers[w].samples.push_back(dataset.samples[order[next++]]);
    }
  }
  return workers;
}

SyntheticData synthesize(SyntheticKind kind, int num_workers,
                         int samples_per_worker, int dim, std::uint64_t seed) {
  if (num_workers < 1 || samples_per_worker < 1 || dim < 1) {
    throw ConfigError("synthesize requires positive n, m, d");
  }
  SyntheticData data;
  data.workers.resize(num_workers);
  if (kind == SyntheticKind::kQuadraticMeans) {
    Vector mean = Vector::Zero(dim);
    for (int i = 0; i < num_workers; ++i) {
      NoiseStream rng(seed, static_cast<std::uint64_t>(i) + 1, 0);
      Vector center(dim);
      rng.fill_gaussian(center, 1.0);
      mean += center;
      WorkerDataset& w = data.workers[i];
      w.worker_id = i;
      w.dim = dim;
      w.samples.resize(samples_per_worker);
      for (Sample& s : w.samples) {
        s.label = 1;
        s.features.resize(dim);
        s.features.reserve(dim);
        for (int j = 0; j < dim; ++j) {
          s.features.insertBack(j) = center[j];
        }
      }
    }
    data.x_star = mean / static_cast<double>(num_workers);
    return data;
  }
  // Two Gaussian blobs with class means on a planted unit separator; labels
  // are the separator's exact sign, so the generated set is linearly
  // separable and the logistic optimum aligns with the separator.
  constexpr double kBlobShift = 1.0;
  constexpr double kBlobNoise = 0.35;
  NoiseStream sep_rng(seed, 0, 0);
  Vector separator(dim);
  sep_rng.fill_gaussian(separator, 1.0);
  separator.normalize();
  for (int i = 0; i < num_workers; ++i) {
    WorkerDataset& w = data.workers[i];
    w.worker_id = i;
    w.dim = dim;
    w.samples.resize(samples_per_worker);
    for (int l = 0; l < samples_per_worker; ++l) {
      NoiseStream rng(seed, static_cast<std::uint64_t>(i) + 1,
                      static_cast<std::uint64_t>(l) + 1);
      const double side = rng.next_uniform() < 0.5 ? -1.0 : 1.0;
      Vector features(dim);
      rng.fill_gaussian(features, kBlobNoise);
      features += side * kBlobShift * separator;
      Sample& s = w.samples[l];
      s.label = separator.dot(features) >= 0.0 ? 1 : -1;
      s.features.resize(dim);
      s.features.reserve(dim);
      for (int j = 0; j < dim; ++j) {
        s.features.insertBack(j) = features[j];
      }
    }
  }
  return data;
}

}  // namespace fedldp
