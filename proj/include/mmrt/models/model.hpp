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
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "mmrt/models/cnn.hpp"
#include "mmrt/models/mlp.hpp"
#include "mmrt/models/srnn.hpp"

namespace mmrt {

using ArchConfig = std::variant<MlpConfig, CnnConfig, SrnnConfig>;

inline std::string arch_name(const ArchConfig& arch) {
  static constexpr const char* kNames[] = {"mlp", "cnn", "srnn"};
  return kNames[arch.index()];
}

inline bool is_srnn(const ArchConfig& arch) {
  return std::holds_alternative<SrnnConfig>(arch);
}

template <typename T>
ParameterSet<T> init_parameters(const ArchConfig& arch, RngStream& rng) {
  return std::visit([&](const auto& cfg) { return cfg.template init<T>(rng); }, arch);
}

// Registers every parameter on the tape. As named inputs they can be
// differentiated and rebound; as constants they are fixed.
template <typename T>
std::vector<Var> bind_parameters(Tape<T>& tape, const ParameterSet<T>& params,
                                 bool as_inputs = true) {
  std::vector<Var> vars;
  vars.reserve(params.size());
  for (const auto& e : params)
    vars.push_back(as_inputs ? tape.input(e.name, e.value) : tape.constant(e.value));
  return vars;
}

template <typename T>
Var forward_logits(const ArchConfig& arch, Tape<T>& tape, const std::vector<Var>& params,
                   Var input, const ForwardOptions* opt = nullptr) {
  return std::visit(
      [&](const auto& cfg) { return cfg.template logits<T>(tape, params, input, opt); }, arch);
}

template <typename T>
Var forward_probabilities(const ArchConfig& arch, Tape<T>& tape,
                          const std::vector<Var>& params, Var input,
                          const ForwardOptions* opt = nullptr) {
  return ops::softmax(tape, forward_logits(arch, tape, params, input, opt));
}

// Evaluation-mode probability rows for a batch.
template <typename T>
Array<T> probabilities(const ArchConfig& arch, const ParameterSet<T>& params,
                       const Array<T>& batch) {
  Tape<T> tape;
  const auto vars = bind_parameters(tape, params, false);
  return tape.value(forward_probabilities(arch, tape, vars, tape.constant(batch)));
}

template <typename T>
std::vector<std::size_t> argmax_rows(const Array<T>& rows) {
  const std::size_t n = rows.extent(0), c = rows.extent(1);
  std::vector<std::size_t> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const T* r = rows.data() + i * c;
    out[i] = static_cast<std::size_t>(std::max_element(r, r + c) - r);
  }
  return out;
}

template <typename T>
double accuracy(const Array<T>& rows, const std::vector<std::size_t>& labels) {
  if (labels.empty()) return 0.0;
  const auto pred = argmax_rows(rows);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hits += pred[i] == labels[i];
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

template <typename T>
Array<T> one_hot(const std::vector<std::size_t>& labels, std::size_t classes) {
  Array<T> y(Shape{labels.size(), classes});
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= classes)
      throw std::out_of_range("label " + std::to_string(labels[i]) + " outside " +
                              std::to_string(classes) + " classes");
    y(i, labels[i]) = T(1);
  }
  return y;
}

}  // namespace mmrt
