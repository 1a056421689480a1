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

// Compiled with -mavx2. Only reached after a runtime CPU check.

#include <immintrin.h>

#include <algorithm>

#include "kernels/variants.hpp"

namespace mmrt::kernels::avx2 {
namespace {

// Lane traits so one kernel body serves both precisions. The argument order
// of min/max mirrors std::min/std::max so signed zeros match the scalar path.
template <typename T>
struct Lanes;

template <>
struct Lanes<float> {
  using V = __m256;
  static constexpr std::size_t kWidth = 8;
  static V load(const float* p) { return _mm256_loadu_ps(p); }
  static void store(float* p, V v) { _mm256_storeu_ps(p, v); }
  static V set1(float a) { return _mm256_set1_ps(a); }
  static V zero() { return _mm256_setzero_ps(); }
  static V add(V a, V b) { return _mm256_add_ps(a, b); }
  static V sub(V a, V b) { return _mm256_sub_ps(a, b); }
  static V mul(V a, V b) { return _mm256_mul_ps(a, b); }
  static V std_min(V a, V b) { return _mm256_min_ps(b, a); }
  static V std_max(V a, V b) { return _mm256_max_ps(b, a); }
  static V select_lt(V a, V b, V if_true) {
    return _mm256_blendv_ps(a, if_true, _mm256_cmp_ps(a, b, _CMP_LT_OQ));
  }
  static V select_gt(V a, V b, V if_true) {
    return _mm256_blendv_ps(a, if_true, _mm256_cmp_ps(a, b, _CMP_GT_OQ));
  }
  static V relu(V x) { return _mm256_blendv_ps(zero(), x, _mm256_cmp_ps(x, zero(), _CMP_NLE_UQ)); }
};

template <>
struct Lanes<double> {
  using V = __m256d;
  static constexpr std::size_t kWidth = 4;
  static V load(const double* p) { return _mm256_loadu_pd(p); }
  static void store(double* p, V v) { _mm256_storeu_pd(p, v); }
  static V set1(double a) { return _mm256_set1_pd(a); }
  static V zero() { return _mm256_setzero_pd(); }
  static V add(V a, V b) { return _mm256_add_pd(a, b); }
  static V sub(V a, V b) { return _mm256_sub_pd(a, b); }
  static V mul(V a, V b) { return _mm256_mul_pd(a, b); }
  static V std_min(V a, V b) { return _mm256_min_pd(b, a); }
  static V std_max(V a, V b) { return _mm256_max_pd(b, a); }
  static V select_lt(V a, V b, V if_true) {
    return _mm256_blendv_pd(a, if_true, _mm256_cmp_pd(a, b, _CMP_LT_OQ));
  }
  static V select_gt(V a, V b, V if_true) {
    return _mm256_blendv_pd(a, if_true, _mm256_cmp_pd(a, b, _CMP_GT_OQ));
  }
  static V relu(V x) { return _mm256_blendv_pd(zero(), x, _mm256_cmp_pd(x, zero(), _CMP_NLE_UQ)); }
};

template <typename T>
void axpy(std::size_t n, T a, const T* x, T* y) {
  using L = Lanes<T>;
  const auto va = L::set1(a);
  std::size_t i = 0;
  for (; i + L::kWidth <= n; i += L::kWidth)
    L::store(y + i, L::add(L::load(y + i), L::mul(va, L::load(x + i))));
  for (; i < n; ++i) y[i] += a * x[i];
}

template <typename T>
void add(std::size_t n, const T* a, const T* b, T* out) {
  using L = Lanes<T>;
  std::size_t i = 0;
  for (; i + L::kWidth <= n; i += L::kWidth)
    L::store(out + i, L::add(L::load(a + i), L::load(b + i)));
  for (; i < n; ++i) out[i] = a[i] + b[i];
}

template <typename T>
void sub(std::size_t n, const T* a, const T* b, T* out) {
  using L = Lanes<T>;
  std::size_t i = 0;
  for (; i + L::kWidth <= n; i += L::kWidth)
    L::store(out + i, L::sub(L::load(a + i), L::load(b + i)));
  for (; i < n; ++i) out[i] = a[i] - b[i];
}

template <typename T>
void mul(std::size_t n, const T* a, const T* b, T* out) {
  using L = Lanes<T>;
  std::size_t i = 0;
  for (; i + L::kWidth <= n; i += L::kWidth)
    L::store(out + i, L::mul(L::load(a + i), L::load(b + i)));
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

template <typename T>
void scale(std::size_t n, T s, const T* x, T* out) {
  using L = Lanes<T>;
  const auto vs = L::set1(s);
  std::size_t i = 0;
  for (; i + L::kWidth <= n; i += L::kWidth)
    L::store(out + i, L::mul(vs, L::load(x + i)));
  for (; i < n; ++i) out[i] = s * x[i];
}

template <typename T>
void relu(std::size_t n, const T* x, T* out) {
  using L = Lanes<T>;
  std::size_t i = 0;
  for (; i + L::kWidth <= n; i += L::kWidth)
    L::store(out + i, L::relu(L::load(x + i)));
  for (; i < n; ++i) out[i] = !(x[i] <= T(0)) ? x[i] : T(0);
}

template <typename T>
void clamp(std::size_t n, const T* x, const T* lo, const T* hi, T* out) {
  using L = Lanes<T>;
  std::size_t i = 0;
  for (; i + L::kWidth <= n; i += L::kWidth) {
    const auto vlo = L::load(lo + i);
    const auto vhi = L::load(hi + i);
    const auto v = L::select_lt(L::load(x + i), vlo, vlo);
    L::store(out + i, L::select_gt(v, vhi, vhi));
  }
  for (; i < n; ++i) {
    T v = x[i] < lo[i] ? lo[i] : x[i];
    out[i] = v > hi[i] ? hi[i] : v;
  }
}

template <typename T>
void interval_axpy(std::size_t n, T a_lo, T a_hi, const T* x_lo, const T* x_hi,
                   T* y_lo, T* y_hi) {
  using L = Lanes<T>;
  const auto alo = L::set1(a_lo);
  const auto ahi = L::set1(a_hi);
  std::size_t i = 0;
  for (; i + L::kWidth <= n; i += L::kWidth) {
    const auto xl = L::load(x_lo + i);
    const auto xh = L::load(x_hi + i);
    const auto p1 = L::mul(alo, xl);
    const auto p2 = L::mul(alo, xh);
    const auto p3 = L::mul(ahi, xl);
    const auto p4 = L::mul(ahi, xh);
    const auto lo = L::std_min(L::std_min(p1, p2), L::std_min(p3, p4));
    const auto hi = L::std_max(L::std_max(p1, p2), L::std_max(p3, p4));
    L::store(y_lo + i, L::add(L::load(y_lo + i), lo));
    L::store(y_hi + i, L::add(L::load(y_hi + i), hi));
  }
  for (; i < n; ++i) {
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

}  // namespace mmrt::kernels::avx2
