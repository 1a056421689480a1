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

// Data-parallel inner loops used by the dense numerics, interval propagation
// and the adversary's box projection. Every entry exists as a portable scalar
// reference and, where the CPU allows, a SIMD variant chosen at startup.
//
// The SIMD variants vectorize across independent output elements only; no
// kernel reorders a reduction, so all variants return identical values.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace mmrt::kernels {

enum class Backend { kScalar, kAvx2, kNeon };

std::string_view backend_name(Backend b);

template <typename T>
struct KernelTable {
  // y += a * x
  void (*axpy)(std::size_t n, T a, const T* x, T* y);
  void (*add)(std::size_t n, const T* a, const T* b, T* out);
  void (*sub)(std::size_t n, const T* a, const T* b, T* out);
  void (*mul)(std::size_t n, const T* a, const T* b, T* out);
  void (*scale)(std::size_t n, T s, const T* x, T* out);
  void (*relu)(std::size_t n, const T* x, T* out);
  // out = min(max(x, lo), hi)
  void (*clamp)(std::size_t n, const T* x, const T* lo, const T* hi, T* out);
  // Interval product accumulation. For every i, the four products of
  // [a_lo, a_hi] with [x_lo[i], x_hi[i]] are formed; y_lo[i] += min and
  // y_hi[i] += max.
  void (*interval_axpy)(std::size_t n, T a_lo, T a_hi, const T* x_lo,
                        const T* x_hi, T* y_lo, T* y_hi);
};

// Backends compiled into this binary and supported by the running CPU.
// The scalar backend is always first.
std::vector<Backend> available_backends();

Backend active_backend();

// Throws std::invalid_argument for a backend the CPU cannot run.
void set_backend(Backend b);

template <typename T>
const KernelTable<T>& table(Backend b);

template <typename T>
const KernelTable<T>& active() {
  return table<T>(active_backend());
}

// C (m x n) (+)= A (m x k) * B (k x n), all row-major. Built on axpy in
// i-k-j order; zero entries of A are skipped.
template <typename T>
void gemm(std::size_t m, std::size_t k, std::size_t n, const T* a, const T* b,
          T* c, bool accumulate);

// Interval counterpart of gemm with identical loop order. Degenerate
// intervals reproduce gemm exactly.
template <typename T>
void interval_gemm(std::size_t m, std::size_t k, std::size_t n, const T* a_lo,
                   const T* a_hi, const T* b_lo, const T* b_hi, T* c_lo,
                   T* c_hi);

}  // namespace mmrt::kernels
