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
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmrt/core/tape.hpp"

namespace mmrt {

struct GradCheckResult {
  double worst_relative_error = 0.0;
  std::string worst_input;
  std::size_t worst_index = 0;
  std::size_t checked = 0;
};

// Compares reverse-mode gradients of a scalar tape output against central
// differences, perturbing every element of every named input in `wrt`.
// The error per element is |analytic - numeric| / max(1, |numeric|).
inline GradCheckResult finite_difference_check(const Tape<double>& tape, Var output,
                                               const std::vector<std::string>& wrt,
                                               double step) {
  if (!(step > 0.0)) throw std::invalid_argument("finite_difference_check: step must be > 0");
  std::vector<Var> vars;
  for (const auto& name : wrt) vars.push_back(tape.input_var(name));
  const auto analytic = tape.gradient(output, vars);
  auto inputs = tape.bound_inputs();

  GradCheckResult result;
  for (std::size_t k = 0; k < wrt.size(); ++k) {
    Array<double>& x = inputs.at(wrt[k]);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double saved = x[i];
      x[i] = saved + step;
      const double up = tape.evaluate_var(inputs, output)[0];
      x[i] = saved - step;
      const double down = tape.evaluate_var(inputs, output)[0];
      x[i] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double err =
          std::abs(analytic[k][i] - numeric) / std::max(1.0, std::abs(numeric));
      if (result.checked++ == 0 || err > result.worst_relative_error) {
        result.worst_relative_error = err;
        result.worst_input = wrt[k];
        result.worst_index = i;
      }
    }
  }
  return result;
}

}  // namespace mmrt
