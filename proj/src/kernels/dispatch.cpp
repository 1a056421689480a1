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

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "kernels/variants.hpp"

namespace mmrt::kernels {
namespace {

bool cpu_supports(Backend b) {
  switch (b) {
    case Backend::kScalar:
      return true;
    case Backend::kAvx2:
#if defined(MMRT_HAVE_AVX2)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Backend::kNeon:
#if defined(MMRT_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Backend initial_backend() {
  // MMRT_KERNELS pins the backend, mainly for equivalence runs.
  if (const char* env = std::getenv("MMRT_KERNELS")) {
    const std::string want(env);
    for (Backend b : available_backends())
      if (backend_name(b) == want) return b;
  }
  return available_backends().back();
}

std::atomic<Backend>& current() {
  static std::atomic<Backend> b{initial_backend()};
  return b;
}

}  // namespace

std::string_view backend_name(Backend b) {
  switch (b) {
    case Backend::kScalar:
      return "scalar";
    case Backend::kAvx2:
      return "avx2";
    case Backend::kNeon:
      return "neon";
  }
  return "unknown";
}

std::vector<Backend> available_backends() {
  std::vector<Backend> out{Backend::kScalar};
  for (Backend b : {Backend::kAvx2, Backend::kNeon})
    if (cpu_supports(b)) out.push_back(b);
  return out;
}

Backend active_backend() { return current().load(std::memory_order_relaxed); }

void set_backend(Backend b) {
  if (!cpu_supports(b))
    throw std::invalid_argument("kernel backend '" +
                                std::string(backend_name(b)) +
                                "' is not available on this CPU");
  current().store(b, std::memory_order_relaxed);
}

template <>
const KernelTable<float>& table<float>(Backend b) {
  switch (b) {
#if defined(MMRT_HAVE_AVX2)
    case Backend::kAvx2:
      return avx2::table_f32();
#endif
#if defined(MMRT_HAVE_NEON)
    case Backend::kNeon:
      return neon::table_f32();
#endif
    default:
      return scalar::table_f32();
  }
}

template <>
const KernelTable<double>& table<double>(Backend b) {
  switch (b) {
#if defined(MMRT_HAVE_AVX2)
    case Backend::kAvx2:
      return avx2::table_f64();
#endif
#if defined(MMRT_HAVE_NEON)
    case Backend::kNeon:
      return neon::table_f64();
#endif
    default:
      return scalar::table_f64();
  }
}

template <typename T>
void gemm(std::size_t m, std::size_t k, std::size_t n, const T* a, const T* b,
          T* c, bool accumulate) {
  const auto& kt = active<T>();
  for (std::size_t i = 0; i < m; ++i) {
    T* crow = c + i * n;
    if (!accumulate)
      for (std::size_t j = 0; j < n; ++j) crow[j] = T(0);
    const T* arow = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      if (arow[p] == T(0)) continue;
      kt.axpy(n, arow[p], b + p * n, crow);
    }
  }
}

template <typename T>
void interval_gemm(std::size_t m, std::size_t k, std::size_t n, const T* a_lo,
                   const T* a_hi, const T* b_lo, const T* b_hi, T* c_lo,
                   T* c_hi) {
  const auto& kt = active<T>();
  for (std::size_t i = 0; i < m; ++i) {
    T* lo_row = c_lo + i * n;
    T* hi_row = c_hi + i * n;
    for (std::size_t j = 0; j < n; ++j) lo_row[j] = hi_row[j] = T(0);
    for (std::size_t p = 0; p < k; ++p) {
      const T alo = a_lo[i * k + p];
      const T ahi = a_hi[i * k + p];
      if (alo == T(0) && ahi == T(0)) continue;
      kt.interval_axpy(n, alo, ahi, b_lo + p * n, b_hi + p * n, lo_row, hi_row);
    }
  }
}

template void gemm<float>(std::size_t, std::size_t, std::size_t, const float*,
                          const float*, float*, bool);
template void gemm<double>(std::size_t, std::size_t, std::size_t,
                           const double*, const double*, double*, bool);
template void interval_gemm<float>(std::size_t, std::size_t, std::size_t,
                                   const float*, const float*, const float*,
                                   const float*, float*, float*);
template void interval_gemm<double>(std::size_t, std::size_t, std::size_t,
                                    const double*, const double*,
                                    const double*, const double*, double*,
                                    double*);

}  // namespace mmrt::kernels
