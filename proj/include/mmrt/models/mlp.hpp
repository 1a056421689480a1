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

#include <string>
#include <vector>

#include "mmrt/models/forward.hpp"

namespace mmrt {

// Fully connected ReLU network with a linear head. Inputs of any rank are
// flattened per example.
struct MlpConfig {
  std::size_t inputs = 196;
  std::vector<std::size_t> hidden = {128, 64};
  std::size_t classes = 10;

  friend bool operator==(const MlpConfig&, const MlpConfig&) = default;

  std::vector<std::size_t> widths() const {
    std::vector<std::size_t> w{inputs};
    w.insert(w.end(), hidden.begin(), hidden.end());
    w.push_back(classes);
    return w;
  }

  static std::string layer_name(std::size_t i, std::size_t layers) {
    return i + 1 == layers ? "out" : "dense" + std::to_string(i + 1);
  }

  template <typename T>
  ParameterSet<T> init(RngStream& rng) const {
    ParameterSet<T> p;
    const auto w = widths();
    for (std::size_t i = 0; i + 1 < w.size(); ++i) {
      const auto name = layer_name(i, w.size() - 1);
      p.add(name + ".weight", detail::glorot_normal<T>({w[i], w[i + 1]}, w[i], w[i + 1], rng),
            true);
      p.add(name + ".bias", Array<T>(Shape{w[i + 1]}), true);
    }
    return p;
  }

  template <typename T>
  Var logits(Tape<T>& tape, const std::vector<Var>& params, Var input,
             const ForwardOptions* opt) const {
    const Shape shape = tape.value(input).shape();
    if (shape.empty() || element_count(shape) / shape[0] != inputs)
      throw ShapeError("mlp: input " + shape_string(shape) + " does not have " +
                       std::to_string(inputs) + " features per example");
    Var h = ops::reshape(tape, input, Shape{shape[0], inputs});
    const std::size_t layers = hidden.size() + 1;
    for (std::size_t i = 0; i < layers; ++i) {
      h = detail::dense(tape, h, params.at(2 * i), params.at(2 * i + 1));
      if (i + 1 < layers) {
        h = ops::relu(tape, h);
        detail::record(opt, layer_name(i, layers), h);
        h = detail::maybe_dropout(tape, h, opt);
      }
    }
    detail::record(opt, "logits", h);
    return h;
  }
};

}  // namespace mmrt
