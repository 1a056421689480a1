// Copyright 2026 The mmrt Authors
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

#pragma once

#include <algorithm>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmrt/models/model.hpp"

namespace mmrt {

// Labelled examples stacked along the first axis of `x`.
template <typename T>
struct Dataset {
  Array<T> x;
  std::vector<std::size_t> y;
  std::size_t classes = 0;

  std::size_t size() const { return y.size(); }
  bool empty() const { return y.empty(); }
  std::size_t example_size() const { return size() ? x.size() / size() : 0; }

  void validate(const std::string& what) const {
    if (x.rank() == 0 || x.extent(0) != y.size())
      throw ShapeError(what + ": " + std::to_string(y.size()) + " labels for inputs " +
                       shape_string(x.shape()));
    for (auto label : y)
      if (label >= classes)
        throw std::out_of_range(what + ": label " + std::to_string(label) + " outside " +
                                std::to_string(classes) + " classes");
  }

  Array<T> gather(const std::vector<std::size_t>& rows) const {
    Shape s = x.shape();
    s[0] = rows.size();
    Array<T> out(std::move(s));
    const std::size_t n = example_size();
    for (std::size_t i = 0; i < rows.size(); ++i)
      std::memcpy(out.data() + i * n, x.data() + rows[i] * n, n * sizeof(T));
    return out;
  }

  std::vector<std::size_t> labels(const std::vector<std::size_t>& rows) const {
    std::vector<std::size_t> out(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) out[i] = y[rows[i]];
    return out;
  }

  Dataset subset(const std::vector<std::size_t>& rows) const {
    return {gather(rows), labels(rows), classes};
  }

  Dataset head(std::size_t n) const {
    std::vector<std::size_t> rows(std::min(n, size()));
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    return subset(rows);
  }
};

template <typename T>
struct Splits {
  Dataset<T> train, val, test;
};

template <typename To, typename From>
Dataset<To> cast(const Dataset<From>& d) {
  return {cast<To>(d.x), d.y, d.classes};
}

// Evaluation-mode probabilities computed in chunks to bound tape size.
template <typename T>
Array<T> batched_probabilities(const ArchConfig& arch, const ParameterSet<T>& params,
                               const Dataset<T>& data, std::size_t chunk = 256) {
  std::vector<T> values;
  std::size_t classes = 0;
  for (std::size_t begin = 0; begin < data.size(); begin += chunk) {
    std::vector<std::size_t> rows;
    for (std::size_t i = begin; i < std::min(begin + chunk, data.size()); ++i) rows.push_back(i);
    const auto p = probabilities(arch, params, data.gather(rows));
    classes = p.extent(1);
    values.insert(values.end(), p.values().begin(), p.values().end());
  }
  return Array<T>(Shape{data.size(), classes}, std::move(values));
}

template <typename T>
double evaluate_accuracy(const ArchConfig& arch, const ParameterSet<T>& params,
                         const Dataset<T>& data, std::size_t chunk = 256) {
  if (data.empty()) return 0.0;
  return accuracy(batched_probabilities(arch, params, data, chunk), data.y);
}

}  // namespace mmrt
