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

#include <cmath>
#include <numeric>

#include "doctest.h"
#include "mmrt/core/gradcheck.hpp"
#include "mmrt/core/ops.hpp"
#include "mmrt/core/rng.hpp"

using namespace mmrt;

namespace {

Array<double> random_array(RngStream& rng, Shape shape, double scale = 1.0) {
  Array<double> a(std::move(shape));
  for (auto& v : a.values()) v = scale * rng.normal();
  return a;
}

Array<double> one_hot(std::vector<int> labels, std::size_t classes) {
  Array<double> y(Shape{labels.size(), classes});
  for (std::size_t i = 0; i < labels.size(); ++i) y(i, labels[i]) = 1.0;
  return y;
}

// Quadruple-loop valid convolution, independent of im2col/gemm.
Array<double> direct_conv(const Array<double>& x, const Array<double>& k) {
  const std::size_t n = x.extent(0), h = x.extent(1), w = x.extent(2), c = x.extent(3);
  const std::size_t kh = k.extent(0), kw = k.extent(1), f = k.extent(3);
  Array<double> out(Shape{n, h - kh + 1, w - kw + 1, f});
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t y = 0; y + kh <= h; ++y)
      for (std::size_t xx = 0; xx + kw <= w; ++xx)
        for (std::size_t o = 0; o < f; ++o) {
          double s = 0.0;
          for (std::size_t dy = 0; dy < kh; ++dy)
            for (std::size_t dx = 0; dx < kw; ++dx)
              for (std::size_t ch = 0; ch < c; ++ch)
                s += x[((b * h + y + dy) * w + xx + dx) * c + ch] *
                     k[((dy * kw + dx) * c + ch) * f + o];
          out[((b * (h - kh + 1) + y) * (w - kw + 1) + xx) * f + o] = s;
        }
  return out;
}

}  // namespace

TEST_CASE("matmul by identity returns the operand") {
  RngStream rng(1, 0);
  Tape<double> t;
  Array<double> eye(Shape{3, 3});
  for (int i = 0; i < 3; ++i) eye(i, i) = 1.0;
  const auto a = random_array(rng, {3, 3});
  auto out = ops::matmul(t, t.constant(eye), t.constant(a));
  CHECK(t.value(out) == a);
}

TEST_CASE("softmax of equal logits is uniform and rows sum to one") {
  Tape<double> t;
  auto p = ops::softmax(t, t.constant(Array<double>(Shape{1, 2}, {0.0, 0.0})));
  CHECK(t.value(p)[0] == 0.5);
  CHECK(t.value(p)[1] == 0.5);

  RngStream rng(2, 0);
  auto q = ops::softmax(t, t.constant(random_array(rng, {50, 7}, 30.0)));
  for (std::size_t r = 0; r < 50; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < 7; ++c) s += t.value(q)(r, c);
    CHECK(std::abs(s - 1.0) <= 1e-9);
  }
}

TEST_CASE("softmax survives large logits") {
  Tape<double> t;
  auto p = ops::softmax(t, t.constant(Array<double>(Shape{1, 3}, {1000.0, 999.0, -1000.0})));
  for (double v : t.value(p).values()) CHECK(std::isfinite(v));
}

TEST_CASE("conv2d equals direct summation") {
  RngStream rng(3, 0);
  const auto x = random_array(rng, {2, 6, 6, 2});
  const auto k = random_array(rng, {3, 3, 2, 4});
  Tape<double> t;
  auto y = ops::conv2d(t, t.constant(x), t.constant(k));
  const auto expected = direct_conv(x, k);
  REQUIRE(t.value(y).shape() == expected.shape());
  for (std::size_t i = 0; i < expected.size(); ++i)
    CHECK(t.value(y)[i] == doctest::Approx(expected[i]).epsilon(1e-12));
}

TEST_CASE("conv2d rejects inputs smaller than the kernel") {
  Tape<double> t;
  auto x = t.constant(Array<double>(Shape{1, 2, 2, 1}));
  auto k = t.constant(Array<double>(Shape{3, 3, 1, 1}));
  CHECK_THROWS_AS(ops::conv2d(t, x, k), ShapeError);
}

TEST_CASE("maxpool uses ceil windows") {
  Tape<double> t;
  Array<double> x(Shape{1, 3, 3, 1}, {1, 5, 2, 4, 3, 9, 7, 8, 6});
  auto y = ops::maxpool2x2(t, t.constant(x));
  REQUIRE(t.value(y).shape() == Shape{1, 2, 2, 1});
  CHECK(t.value(y).vec() == std::vector<double>{5, 9, 8, 6});
}

TEST_CASE("derivative of x squared at 3 is 6") {
  Tape<double> t;
  auto x = t.input("x", Array<double>::scalar(3.0));
  auto y = ops::mul(t, x, x);
  const std::vector<Var> wrt{x};
  CHECK(t.gradient(y, wrt)[0][0] == 6.0);
}

TEST_CASE("cross-entropy of softmax has gradient p minus y over batch") {
  RngStream rng(4, 0);
  Tape<double> t;
  auto z = t.input("z", random_array(rng, {4, 5}));
  auto p = ops::softmax(t, z);
  const auto y = one_hot({0, 3, 4, 1}, 5);
  auto loss = ops::cross_entropy(t, p, t.constant(y));
  const std::vector<Var> wrt{z};
  const auto g = t.gradient(loss, wrt)[0];
  for (std::size_t i = 0; i < g.size(); ++i)
    CHECK(g[i] == doctest::Approx((t.value(p)[i] - y[i]) / 4.0).epsilon(1e-12));
}

TEST_CASE("gradient requires a scalar output") {
  Tape<double> t;
  auto x = t.input("x", Array<double>(Shape{2}, {1.0, 2.0}));
  auto y = ops::scale(t, x, 2.0);
  const std::vector<Var> wrt{x};
  CHECK_THROWS_AS(t.gradient(y, wrt), ShapeError);
}

TEST_CASE("unused inputs get zero gradients") {
  Tape<double> t;
  auto x = t.input("x", Array<double>::scalar(2.0));
  auto unused = t.input("u", Array<double>(Shape{3}, 1.0));
  auto y = ops::mul(t, x, x);
  const std::vector<Var> wrt{unused};
  CHECK(t.gradient(y, wrt)[0] == Array<double>(Shape{3}, 0.0));
}

TEST_CASE("shape errors name the primitive and shapes") {
  Tape<double> t;
  auto a = t.constant(Array<double>(Shape{2, 3}));
  auto b = t.constant(Array<double>(Shape{2, 3}));
  try {
    ops::matmul(t, a, b);
    FAIL("expected ShapeError");
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("matmul") != std::string::npos);
    CHECK(msg.find("[2,3]") != std::string::npos);
  }
}

TEST_CASE("finite-difference check is exact for linear and quadratic maps") {
  RngStream rng(5, 0);
  {
    Tape<double> t;
    auto x = t.input("x", random_array(rng, {3, 4}));
    auto w = t.constant(random_array(rng, {4, 1}));
    auto y = ops::reshape(t, ops::matmul(t, x, w), Shape{3});
    auto s = ops::reshape(t, ops::matmul(t, t.constant(Array<double>(Shape{1, 3}, 1.0)),
                                         ops::reshape(t, y, Shape{3, 1})),
                          Shape{1});
    CHECK(finite_difference_check(t, s, {"x"}, 1e-5).worst_relative_error <= 1e-10);
  }
  {
    Tape<double> t;
    auto x = t.input("x", Array<double>::scalar(1.7));
    auto y = ops::mul(t, x, x);
    CHECK(finite_difference_check(t, y, {"x"}, 1e-5).worst_relative_error <= 1e-8);
  }
}

TEST_CASE("two-layer MLP gradients match central differences") {
  RngStream rng(6, 0);
  Tape<double> t;
  auto x = t.constant(random_array(rng, {5, 4}));
  auto w1 = t.input("w1", random_array(rng, {4, 6}, 0.5));
  auto b1 = t.input("b1", random_array(rng, {6}, 0.1));
  auto w2 = t.input("w2", random_array(rng, {6, 3}, 0.5));
  auto b2 = t.input("b2", random_array(rng, {3}, 0.1));
  auto h = ops::relu(t, ops::add_bias(t, ops::matmul(t, x, w1), b1));
  auto p = ops::softmax(t, ops::add_bias(t, ops::matmul(t, h, w2), b2));
  auto loss = ops::cross_entropy(t, p, t.constant(one_hot({0, 1, 2, 1, 0}, 3)));
  const auto r = finite_difference_check(t, loss, {"w1", "b1", "w2", "b2"}, 1e-5);
  CHECK(r.checked == 24 + 6 + 18 + 3);
  CHECK(r.worst_relative_error <= 1e-4);
}

TEST_CASE("every smooth primitive passes the finite-difference check") {
  RngStream rng(7, 0);
  Tape<double> t;
  auto a = t.input("a", random_array(rng, {2, 5, 5, 2}));
  auto k = t.input("k", random_array(rng, {2, 2, 2, 3}, 0.5));
  auto bias = t.input("bias", random_array(rng, {3}, 0.1));
  auto c = ops::add_bias(t, ops::conv2d(t, a, k), bias);          // [2,4,4,3]
  auto pooled = ops::maxpool2x2(t, c);                              // [2,2,2,3]
  auto flat = ops::reshape(t, pooled, Shape{2, 12});
  auto m = t.input("m", random_array(rng, {2, 12}));
  auto lo = t.constant(Array<double>(Shape{2, 12}, -1.5));
  auto hi = t.constant(Array<double>(Shape{2, 12}, 1.5));
  auto mixed = ops::add(t, ops::mul(t, flat, m), ops::scale(t, ops::abs(t, m), 0.3));
  auto clamped = ops::clamp(t, ops::sub(t, mixed, ops::add_scalar(t, m, 0.2)), lo, hi);
  auto logits = ops::relu(t, clamped);
  auto p = ops::softmax(t, logits);
  auto q = ops::softmax(t, t.input("z", random_array(rng, {2, 12})));
  auto kl = ops::kl_div(t, q, p);
  auto ce = ops::cross_entropy(t, p, t.constant(one_hot({3, 7}, 12)));
  auto total = ops::add(t, kl, ce);
  const auto r = finite_difference_check(t, total, {"a", "k", "bias", "m", "z"}, 1e-5);
  CHECK(r.worst_relative_error <= 1e-4);
}

TEST_CASE("KL divergence of identical rows is zero") {
  RngStream rng(8, 0);
  Tape<double> t;
  auto p = ops::softmax(t, t.constant(random_array(rng, {6, 4})));
  auto kl = ops::kl_div(t, p, p);
  CHECK(std::abs(t.value(kl)[0]) <= 1e-12);
}

TEST_CASE("tape replay is bit-identical and rebinding changes outputs") {
  RngStream rng(9, 0);
  Tape<double> t;
  auto x = t.input("x", random_array(rng, {3, 4}));
  auto w = t.input("w", random_array(rng, {4, 2}));
  auto p = ops::softmax(t, ops::matmul(t, x, w));
  t.set_output("p", p);
  const auto inputs = t.bound_inputs();
  const auto first = t.evaluate(inputs);
  const auto second = t.evaluate(inputs);
  CHECK(bit_identical(first.at("p"), t.value(p)));
  CHECK(bit_identical(first.at("p"), second.at("p")));

  auto changed = inputs;
  changed.at("w")[0] += 1.0;
  CHECK(!(t.evaluate(changed).at("p") == t.value(p)));

  auto missing = inputs;
  missing.erase("w");
  CHECK_THROWS_AS(t.evaluate(missing), std::invalid_argument);
  auto wrong = inputs;
  wrong.at("w") = Array<double>(Shape{2, 4});
  CHECK_THROWS_AS(t.evaluate(wrong), ShapeError);
}

TEST_CASE("surrogate spike derivative") {
  CHECK(ops::surrogate_spike_derivative(1.0, 1.0, 0.3) == doctest::Approx(0.3));
  CHECK(ops::surrogate_spike_derivative(1.5, 1.0, 0.3) == doctest::Approx(0.15));
  CHECK(ops::surrogate_spike_derivative(2.0, 1.0, 0.3) == 0.0);
  CHECK(ops::surrogate_spike_derivative(-0.5, 1.0, 0.3) == 0.0);
  CHECK(ops::surrogate_spike_derivative(5.0, 2.0, 0.3) == 0.0);
}

TEST_CASE("Philox-4x32-10 known-answer vectors") {
  CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) ==
        std::array<std::uint32_t, 4>{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                   {0xffffffffu, 0xffffffffu}) ==
        std::array<std::uint32_t, 4>{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                   {0xa4093822u, 0x299f31d0u}) ==
        std::array<std::uint32_t, 4>{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("rng streams are reproducible and distinct") {
  RngStream a(42, 1), b(42, 1), c(42, 2);
  std::vector<std::uint64_t> xs, ys, zs;
  for (int i = 0; i < 10; ++i) {
    xs.push_back(a.next_u64());
    ys.push_back(b.next_u64());
    zs.push_back(c.next_u64());
  }
  CHECK(xs == ys);
  CHECK(xs != zs);
  CHECK(a.counter() == 10);
  CHECK(RngStream(42, 1).child(3).next_u64() == RngStream(42, 1).child(3).next_u64());
  CHECK(RngStream(42, 1).child(3).next_u64() != RngStream(42, 1).child(4).next_u64());
}

TEST_CASE("rng golden sequence") {
  RngStream rng(2021, 7);
  const std::vector<std::uint64_t> golden = {
      0x94a7de00bcb8d566ull, 0xf3772d0a99e5afbeull, 0x70a019a3450073cbull,
      0xa0f5f7d44d16a2a1ull, 0x6d5aded8e0bf2459ull, 0xc15f163b7e1beb12ull,
      0xdebc21319816f804ull, 0x1a6ce7b5b7872d64ull, 0x040a266af138bfecull,
      0xc503358888b90591ull};
  std::vector<std::uint64_t> got;
  for (int i = 0; i < 10; ++i) got.push_back(rng.next_u64());
  CHECK(got == golden);

  RngStream g(2021, 8);
  const std::vector<double> golden_normals = {
      0.87293365741328244,  -0.34907941306179341, -1.213351809752659,
      -0.57291073444433649, -0.82512436732860894, -1.0622674529660499,
      0.8852921085378429,   0.2240981205675007,   -0.52690043260726471,
      -1.5138249968884356};
  for (double expected : golden_normals) CHECK(g.normal() == doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("normal draws have unit moments") {
  RngStream rng(3, 3);
  const int n = 200000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s += z;
    s2 += z * z;
  }
  CHECK(std::abs(s / n) < 0.01);
  CHECK(std::abs(s2 / n - 1.0) < 0.01);
}
