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
#include <stdexcept>
#include <vector>

#include "mmrt/models/parameter_set.hpp"

namespace mmrt {

template <typename T>
struct AdamState {
  std::vector<Array<T>> m, v;
  std::size_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState like(const ParameterSet<T>& params) {
    AdamState s;
    for (const auto& e : params) {
      s.m.emplace_back(e.value.shape());
      s.v.emplace_back(e.value.shape());
    }
    return s;
  }
};

// Bias-corrected Adam update of every parameter in place.
template <typename T>
void adam_step(AdamState<T>& state, ParameterSet<T>& params, const ParameterSet<T>& grads,
               double lr) {
  if (!(lr > 0.0)) throw std::invalid_argument("adam: learning rate must be > 0");
  if (state.m.size() != params.size() || grads.size() != params.size())
    throw ShapeError("adam: state, parameters and gradients differ in length");
  ++state.step;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  const T b1 = static_cast<T>(state.beta1), b2 = static_cast<T>(state.beta2);
  const T lr_t = static_cast<T>(lr / c1), sqrt_c2 = static_cast<T>(std::sqrt(c2));
  const T eps = static_cast<T>(state.epsilon);
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& p = params[k].value;
    const auto& g = grads[k].value;
    if (g.shape() != p.shape())
      throw ShapeError("adam: gradient " + shape_string(g.shape()) + " for parameter " +
                       params[k].name + " " + shape_string(p.shape()));
    auto& m = state.m[k];
    auto& v = state.v[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = b1 * m[i] + (T(1) - b1) * g[i];
      v[i] = b2 * v[i] + (T(1) - b2) * g[i] * g[i];
      p[i] -= lr_t * m[i] / (std::sqrt(v[i]) / sqrt_c2 + eps);
    }
  }
}

// Rescales all gradients together so their joint L2 norm is at most
// max_norm. Returns the norm before clipping.
template <typename T>
double clip_gradient_norm(ParameterSet<T>& grads, double max_norm) {
  double sq = 0.0;
  for (const auto& e : grads)
    for (T g : e.value.values()) sq += static_cast<double>(g) * static_cast<double>(g);
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const T s = static_cast<T>(max_norm / norm);
    for (auto& e : grads)
      for (auto& g : e.value.values()) g *= s;
  }
  return norm;
}

}  // namespace mmrt
