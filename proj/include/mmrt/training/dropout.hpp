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

#include <stdexcept>

#include "mmrt/core/array.hpp"
#include "mmrt/core/rng.hpp"

namespace mmrt {

// Inverted-dropout mask: 0 with probability p, 1/(1-p) otherwise.
template <typename T>
Array<T> dropout_mask(const Shape& shape, double p, RngStream& rng) {
  if (!(p >= 0.0 && p < 1.0))
    throw std::invalid_argument("dropout_mask: p must lie in [0, 1)");
  Array<T> mask(shape, T(1));
  if (p == 0.0) return mask;
  const T keep = static_cast<T>(1.0 / (1.0 - p));
  for (auto& m : mask.values()) m = rng.uniform() < p ? T(0) : keep;
  return mask;
}

}  // namespace mmrt
