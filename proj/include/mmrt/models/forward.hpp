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

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "mmrt/core/ops.hpp"
#include "mmrt/core/rng.hpp"
#include "mmrt/models/parameter_set.hpp"
#include "mmrt/training/dropout.hpp"

namespace mmrt {

// Train-time behaviour and instrumentation for a forward pass. The default
// value is a plain evaluation pass.
struct ForwardOptions {
  double dropout = 0.0;
  RngStream* rng = nullptr;
  // Named intermediates in evaluation order (pre-softmax logits last).
  std::vector<std::pair<std::string, Var>>* trace = nullptr;
  // SRNN only: (membrane potential, threshold) per time step.
  std::vector<std::pair<Var, Var>>* membrane = nullptr;
};

namespace detail {

inline void record(const ForwardOptions* opt, std::string name, Var v) {
  if (opt && opt->trace) opt->trace->emplace_back(std::move(name), v);
}

template <typename T>
Var maybe_dropout(Tape<T>& tape, Var x, const ForwardOptions* opt) {
  if (!opt || opt->dropout <= 0.0) return x;
  if (!opt->rng) throw std::invalid_argument("dropout requires an rng stream");
  return ops::mul(tape, x, tape.constant(dropout_mask<T>(tape.value(x).shape(),
                                                         opt->dropout, *opt->rng)));
}

template <typename T>
Array<T> glorot_normal(Shape shape, std::size_t fan_in, std::size_t fan_out,
                       RngStream& rng) {
  Array<T> a(std::move(shape));
  const double std = std::sqrt(2.0 / static_cast<double>(fan_in + fan_out));
  for (auto& v : a.values()) v = static_cast<T>(std * rng.normal());
  return a;
}

template <typename T>
Var dense(Tape<T>& tape, Var x, Var w, Var b) {
  return ops::add_bias(tape, ops::matmul(tape, x, w), b);
}

}  // namespace detail
}  // namespace mmrt
