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

#include <algorithm>

#include "kernels/variants.hpp"

namespace mmrt::kernels::scalar {
namespace {

template <typename T>
void axpy(std::size_t n, T a, const T* x, T* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

template <typename T>
void add(std::size_t n, const T* a, const T* b, T* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

template <typename T>
void sub(std::size_t n, const T* a, const T* b, T* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
}

template <typename T>
void mul(std::size_t n, const T* a, const T* b, T* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

template <typename T>
void scale(std::size_t n, T s, const T* x, T* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = s * x[i];
}

template <typename T>
void relu(std::size_t n, const T* x, T* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = !(x[i] <= T(0)) ? x[i] : T(0);
}

template <typename T>
void clamp(std::size_t n, const T* x, const T* lo, const T* hi, T* out) {
  for (std::size_t i = 0; i < n; ++i) {
    T v = x[i] < lo[i] ? lo[i] : x[i];
    out[i] = v > hi[i] ? hi[i] : v;
  }
}

template <typename T>
void interval_axpy(std::size_t n, T a_lo, T a_hi, const T* x_lo, const T* x_hi,
                   T* y_lo, T* y_hi) {
  for (std::size_t i = 0; i < n; ++i) {
    const T p1 = a_lo * x_lo[i];
    const T p2 = a_lo * x_hi[i];
    const T p3 = a_hi * x_lo[i];
    const T p4 = a_hi * x_hi[i];
    y_lo[i] += std::min(std::min(p1, p2), std::min(p3, p4));
    y_hi[i] += std::max(std::max(p1, p2), std::max(p3, p4));
  }
}

template <typename T>
KernelTable<T> make() {
  return {&axpy<T>, &add<T>,  &sub<T>,   &mul<T>,
          &scale<T>, &relu<T>, &clamp<T>, &interval_axpy<T>};
}

}  // namespace

const KernelTable<float>& table_f32() {
  static const KernelTable<float> t = make<float>();
  return t;
}

const KernelTable<double>& table_f64() {
  static const KernelTable<double> t = make<double>();
  return t;
}

}  // namespace mmrt::kernels::scalar
