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

#include "mmrt/core/rng.hpp"
#include "mmrt/models/parameter_set.hpp"

namespace mmrt {

inline void require_zeta(double zeta, const char* op) {
  if (!(zeta >= 0.0)) throw std::invalid_argument(std::string(op) + ": zeta must be >= 0");
}

// Perturbation v with v_i ~ N(0, (zeta |theta_i|)^2) on susceptible entries
// and zeros elsewhere. Only susceptible entries consume random numbers.
template <typename T>
ParameterSet<T> proportional_direction(const ParameterSet<T>& params, double zeta,
                                       RngStream& rng) {
  require_zeta(zeta, "proportional_direction");
  auto out = params.zeros_like();
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (!params[k].susceptible) continue;
    const auto& theta = params[k].value;
    auto& v = out[k].value;
    for (std::size_t i = 0; i < theta.size(); ++i)
      v[i] = static_cast<T>(zeta * std::abs(static_cast<double>(theta[i])) * rng.normal());
  }
  return out;
}

// One draw of the deployed parameters: theta + proportional_direction. An
// entry whose standard deviation is zero is copied unchanged.
template <typename T>
ParameterSet<T> sample_mismatch(const ParameterSet<T>& params, double zeta, RngStream& rng) {
  require_zeta(zeta, "sample_mismatch");
  ParameterSet<T> out = params;
  if (zeta == 0.0) return out;
  const auto dir = proportional_direction(params, zeta, rng);
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (!params[k].susceptible) continue;
    auto& v = out[k].value;
    const auto& d = dir[k].value;
    for (std::size_t i = 0; i < v.size(); ++i)
      if (v[i] != T(0)) v[i] += d[i];
  }
  return out;
}

}  // namespace mmrt
