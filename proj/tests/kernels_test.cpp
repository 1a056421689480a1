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
#include <cmath>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "mmrt/core/rng.hpp"
#include "mmrt/kernels/kernels.hpp"

using namespace mmrt;
using kernels::Backend;

namespace {

template <typename T>
std::vector<T> random_vec(RngStream& rng, std::size_t n, bool with_zeros = true) {
  std::vector<T> v(n);
  for (auto& x : v) {
    x = static_cast<T>(rng.normal());
    if (with_zeros && rng.below(7) == 0) x = T(0);
  }
  return v;
}

// Scalar and SIMD variants must agree as values; signed zeros are allowed to
// differ only where IEEE equality already treats them as equal.
template <typename T>
void expect_equal(const std::vector<T>& a, const std::vector<T>& b) {
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

template <typename T>
void check_backend(Backend b) {
  const auto& ref = kernels::table<T>(Backend::kScalar);
  const auto& simd = kernels::table<T>(b);
  RngStream rng(7, static_cast<std::uint64_t>(b));
  for (std::size_t n = 0; n < 40; ++n) {
    const auto x = random_vec<T>(rng, n), y = random_vec<T>(rng, n);
    auto lo = random_vec<T>(rng, n, false), hi = lo;
    for (auto& h : hi) h += static_cast<T>(std::abs(rng.normal()));
    const T a = static_cast<T>(rng.normal());

    auto r1 = y, r2 = y;
    ref.axpy(n, a, x.data(), r1.data());
    simd.axpy(n, a, x.data(), r2.data());
    expect_equal(r1, r2);

    for (auto fn : {&kernels::KernelTable<T>::add, &kernels::KernelTable<T>::sub,
                    &kernels::KernelTable<T>::mul}) {
      std::vector<T> o1(n), o2(n);
      (ref.*fn)(n, x.data(), y.data(), o1.data());
      (simd.*fn)(n, x.data(), y.data(), o2.data());
      expect_equal(o1, o2);
    }

    std::vector<T> o1(n), o2(n);
    ref.scale(n, a, x.data(), o1.data());
    simd.scale(n, a, x.data(), o2.data());
    expect_equal(o1, o2);

    ref.relu(n, x.data(), o1.data());
    simd.relu(n, x.data(), o2.data());
    expect_equal(o1, o2);
    if (n > 0) CHECK(std::memcmp(o1.data(), o2.data(), n * sizeof(T)) == 0);

    ref.clamp(n, x.data(), lo.data(), hi.data(), o1.data());
    simd.clamp(n, x.data(), lo.data(), hi.data(), o2.data());
    expect_equal(o1, o2);

    auto ylo1 = y, yhi1 = y, ylo2 = y, yhi2 = y;
    ref.interval_axpy(n, a, a + T(0.5), lo.data(), hi.data(), ylo1.data(), yhi1.data());
    simd.interval_axpy(n, a, a + T(0.5), lo.data(), hi.data(), ylo2.data(), yhi2.data());
    expect_equal(ylo1, ylo2);
    expect_equal(yhi1, yhi2);
  }
}

template <typename T>
std::vector<T> run_gemm(Backend b, std::size_t m, std::size_t k, std::size_t n,
                        const std::vector<T>& a, const std::vector<T>& x) {
  kernels::set_backend(b);
  std::vector<T> c(m * n);
  kernels::gemm(m, k, n, a.data(), x.data(), c.data(), false);
  return c;
}

}  // namespace

TEST_CASE("scalar backend is always available and listed first") {
  const auto backends = kernels::available_backends();
  REQUIRE(!backends.empty());
  CHECK(backends.front() == Backend::kScalar);
}

TEST_CASE("every SIMD backend matches the scalar reference elementwise") {
  for (Backend b : kernels::available_backends()) {
    CAPTURE(std::string(kernels::backend_name(b)));
    check_backend<float>(b);
    check_backend<double>(b);
  }
}

TEST_CASE("gemm and interval gemm agree across backends") {
  const Backend saved = kernels::active_backend();
  RngStream rng(11, 0);
  const std::size_t m = 5, k = 13, n = 19;
  const auto a = random_vec<double>(rng, m * k), x = random_vec<double>(rng, k * n);
  const auto ref = run_gemm<double>(Backend::kScalar, m, k, n, a, x);

  // Direct triple loop in the same k order.
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p)
        if (a[i * k + p] != 0.0) s += a[i * k + p] * x[p * n + j];
      CHECK(ref[i * n + j] == s);
    }

  for (Backend b : kernels::available_backends()) {
    CAPTURE(std::string(kernels::backend_name(b)));
    expect_equal(ref, run_gemm<double>(b, m, k, n, a, x));
    // Degenerate intervals reproduce gemm exactly.
    std::vector<double> lo(m * n), hi(m * n);
    kernels::interval_gemm(m, k, n, a.data(), a.data(), x.data(), x.data(), lo.data(),
                           hi.data());
    expect_equal(ref, lo);
    expect_equal(ref, hi);
  }
  kernels::set_backend(saved);
}

TEST_CASE("setting an unavailable backend throws") {
  const auto backends = kernels::available_backends();
  for (Backend b : {Backend::kAvx2, Backend::kNeon}) {
    if (std::find(backends.begin(), backends.end(), b) == backends.end())
      CHECK_THROWS_AS(kernels::set_backend(b), std::invalid_argument);
  }
}

TEST_CASE("relu propagates NaN on every backend") {
  for (auto b : kernels::available_backends()) {
    const auto& t = kernels::table<double>(b);
    std::vector<double> x(11, -1.0), out(11);
    x[3] = std::nan("");
    x[9] = std::nan("");
    x[5] = 2.0;
    t.relu(x.size(), x.data(), out.data());
    CHECK(std::isnan(out[3]));
    CHECK(std::isnan(out[9]));
    CHECK(out[5] == 2.0);
    CHECK(out[0] == 0.0);
  }
}
