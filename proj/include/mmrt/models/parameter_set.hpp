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
#include <string>
#include <vector>

#include "mmrt/core/array.hpp"

namespace mmrt {

template <typename T>
struct ParamEntry {
  std::string name;
  Array<T> value;
  // Participates in mismatch sampling, attacks and interval lifting.
  bool susceptible = true;
};

// Ordered collection of named parameter arrays.
template <typename T>
class ParameterSet {
 public:
  void add(std::string name, Array<T> value, bool susceptible) {
    for (const auto& e : entries_)
      if (e.name == name)
        throw std::invalid_argument("ParameterSet: duplicate name '" + name + "'");
    entries_.push_back({std::move(name), std::move(value), susceptible});
  }

  std::size_t size() const { return entries_.size(); }
  ParamEntry<T>& operator[](std::size_t i) { return entries_[i]; }
  const ParamEntry<T>& operator[](std::size_t i) const { return entries_[i]; }

  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  std::size_t index_of(const std::string& name) const {
    for (std::size_t i = 0; i < entries_.size(); ++i)
      if (entries_[i].name == name) return i;
    throw std::out_of_range("ParameterSet: no parameter named '" + name + "'");
  }
  Array<T>& at(const std::string& name) { return entries_[index_of(name)].value; }
  const Array<T>& at(const std::string& name) const {
    return entries_[index_of(name)].value;
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& e : entries_) n += e.value.size();
    return n;
  }

  // Same names, shapes and flags, zero values.
  ParameterSet zeros_like() const {
    ParameterSet out;
    for (const auto& e : entries_)
      out.entries_.push_back({e.name, Array<T>(e.value.shape(), T(0)), e.susceptible});
    return out;
  }

  friend bool operator==(const ParameterSet& a, const ParameterSet& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a[i].name != b[i].name || a[i].susceptible != b[i].susceptible ||
          !bit_identical(a[i].value, b[i].value))
        return false;
    return true;
  }

 private:
  std::vector<ParamEntry<T>> entries_;
};

template <typename To, typename From>
ParameterSet<To> cast(const ParameterSet<From>& p) {
  ParameterSet<To> out;
  for (const auto& e : p) out.add(e.name, cast<To>(e.value), e.susceptible);
  return out;
}

}  // namespace mmrt
