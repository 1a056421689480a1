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

#include "doctest.h"
#include "mmrt/verify/interval.hpp"

using namespace mmrt;

namespace {

constexpr double kSlack = 1e-12;

Array<double> random_array(RngStream& rng, Shape shape, double scale = 1.0) {
  Array<double> a(std::move(shape));
  for (auto& v : a.values()) v = scale * rng.normal();
  return a;
}

// A point drawn from the box; every fourth draw uses a random corner so the
// extremes are exercised.
Array<double> sample_in(const IntervalArray<double>& box, RngStream& rng, bool corner) {
  Array<double> x(box.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (corner)
      x[i] = rng.below(2) ? box.hi[i] : box.lo[i];
    else
      x[i] = box.lo[i] + rng.uniform() * (box.hi[i] - box.lo[i]);
  }
  return x;
}

ParameterSet<double> sample_params(const ParameterSet<double>& p,
                                   const std::vector<IntervalArray<double>>& box, RngStream& rng,
                                   bool corner) {
  auto out = p;
  for (std::size_t k = 0; k < p.size(); ++k) out[k].value = sample_in(box[k], rng, corner);
  return out;
}

Array<double> concrete_logits(const ArchConfig& arch, const ParameterSet<double>& p,
                              const Array<double>& x) {
  Tape<double> tape;
  const auto vars = bind_parameters(tape, p, false);
  return tape.value(forward_logits<double>(arch, tape, vars, tape.constant(x)));
}

std::vector<std::pair<std::string, Array<double>>> concrete_trace(const ArchConfig& arch,
                                                                  const ParameterSet<double>& p,
                                                                  const Array<double>& x) {
  Tape<double> tape;
  const auto vars = bind_parameters(tape, p, false);
  std::vector<std::pair<std::string, Var>> trace;
  ForwardOptions opt;
  opt.trace = &trace;
  forward_logits<double>(arch, tape, vars, tape.constant(x), &opt);
  std::vector<std::pair<std::string, Array<double>>> out;
  for (const auto& [name, v] : trace) out.emplace_back(name, tape.value(v));
  return out;
}

// Every instrumented layer of every sampled network lies in its interval.
void check_containment(const ArchConfig& arch, const ParameterSet<double>& p,
                       const Array<double>& x, double zeta, int samples, RngStream& rng) {
  const auto box = lift_weights(p, zeta);
  const auto f = interval_forward<double>(arch, box, x, true);
  int outside = 0;
  for (int s = 0; s < samples; ++s) {
    const auto q = sample_params(p, box, rng, s % 4 == 0);
    const auto trace = concrete_trace(arch, q, x);
    REQUIRE(trace.size() == f.trace.size());
    for (std::size_t k = 0; k < trace.size(); ++k) {
      REQUIRE(trace[k].first == f.trace[k].first);
      outside += !f.trace[k].second.contains(trace[k].second, kSlack);
    }
  }
  CHECK(outside == 0);
}

}  // namespace

TEST_CASE("lift_weights") {
  ParameterSet<double> p;
  p.add("w", Array<double>(Shape{3}, {-2.0, 0.0, 4.0}), true);
  p.add("c", Array<double>(Shape{1}, 3.0), false);
  const auto zero = lift_weights(p, 0.0);
  CHECK(zero[0].degenerate());
  CHECK(bit_identical(zero[0].lo, p.at("w")));
  const auto box = lift_weights(p, 0.1);
  CHECK(box[0].lo[0] == doctest::Approx(-2.2));
  CHECK(box[0].hi[0] == doctest::Approx(-1.8));
  CHECK(box[0].lo[1] == 0.0);
  CHECK(box[0].hi[1] == 0.0);
  CHECK(box[1].degenerate());
  CHECK_THROWS_AS(lift_weights(p, -0.1), std::invalid_argument);
}

TEST_CASE("interval affine") {
  const IntervalArray<double> w{Array<double>(Shape{1, 1}, -1.0), Array<double>(Shape{1, 1}, 1.0)};
  const auto x = IntervalArray<double>::point(Array<double>(Shape{1, 1}, 2.0));
  const auto zero = IntervalArray<double>::point(Array<double>(Shape{1}));
  const auto y = interval::affine(x, w, zero);
  CHECK(y.lo[0] == -2.0);
  CHECK(y.hi[0] == 2.0);

  RngStream rng(1, 0);
  const auto a = random_array(rng, {4, 3}), m = random_array(rng, {3, 5}), b = random_array(rng, {5});
  Tape<double> tape;
  const auto exact =
      tape.value(ops::add_bias(tape, ops::matmul(tape, tape.constant(a), tape.constant(m)),
                               tape.constant(b)));
  const auto point = interval::affine(IntervalArray<double>::point(a),
                                      IntervalArray<double>::point(m),
                                      IntervalArray<double>::point(b));
  CHECK(bit_identical(point.lo, exact));
  CHECK(bit_identical(point.hi, exact));

  CHECK_THROWS_AS(interval::matmul(IntervalArray<double>::point(a), IntervalArray<double>::point(a)),
                  ShapeError);
}

TEST_CASE("interval affine contains 10^4 sampled products on a 3x3 instance") {
  RngStream rng(2, 0);
  auto widen = [&](Shape s) {
    auto c = random_array(rng, s);
    Array<double> lo(s), hi(s);
    for (std::size_t i = 0; i < c.size(); ++i) {
      const double r = 0.5 * rng.uniform();
      lo[i] = c[i] - r;
      hi[i] = c[i] + r;
    }
    return IntervalArray<double>{lo, hi};
  };
  const auto w = widen({3, 3}), x = widen({1, 3}), b = widen({3});
  const auto y = interval::affine(x, w, b);
  int outside = 0;
  for (int s = 0; s < 10000; ++s) {
    const bool corner = s % 4 == 0;
    const auto ws = sample_in(w, rng, corner), xs = sample_in(x, rng, corner),
               bs = sample_in(b, rng, corner);
    Array<double> out(Shape{1, 3});
    for (std::size_t j = 0; j < 3; ++j) {
      out[j] = bs[j];
      for (std::size_t i = 0; i < 3; ++i) out[j] += xs[i] * ws(i, j);
    }
    outside += !y.contains(out, kSlack);
  }
  CHECK(outside == 0);
}

TEST_CASE("interval relu and max-pool") {
  const IntervalArray<double> x{Array<double>(Shape{2}, {-1.0, -3.0}), Array<double>(Shape{2}, {2.0, -1.0})};
  const auto r = interval::relu(x);
  CHECK(r.lo[0] == 0.0);
  CHECK(r.hi[0] == 2.0);
  CHECK(r.hi[1] == 0.0);

  RngStream rng(3, 0);
  const auto c = random_array(rng, {1, 5, 5, 2});
  Array<double> lo(c.shape()), hi(c.shape());
  for (std::size_t i = 0; i < c.size(); ++i) {
    lo[i] = c[i] - rng.uniform();
    hi[i] = c[i] + rng.uniform();
  }
  const IntervalArray<double> box{lo, hi};
  const auto pooled = interval::maxpool2x2(box);
  Tape<double> tape;
  CHECK(bit_identical(interval::maxpool2x2(IntervalArray<double>::point(c)).lo,
                      tape.value(ops::maxpool2x2(tape, tape.constant(c)))));
  int outside = 0;
  for (int s = 0; s < 10000; ++s) {
    Tape<double> t;
    const auto concrete = t.value(ops::maxpool2x2(t, t.constant(sample_in(box, rng, s % 4 == 0))));
    outside += !pooled.contains(concrete);
  }
  CHECK(outside == 0);
}

TEST_CASE("point propagation equals concrete logits for every architecture") {
  RngStream rng(4, 0);
  const std::vector<std::pair<ArchConfig, Array<double>>> cases = {
      {MlpConfig{6, {5, 4}, 3}, random_array(rng, {4, 6})},
      {CnnConfig{8, 8, 1, {3, 2}, 2, {5}, 4}, random_array(rng, {3, 8, 8, 1})},
      {SrnnConfig{.inputs = 2, .hidden = 6, .classes = 3}, random_array(rng, {2, 9, 2}, 40.0)},
  };
  for (const auto& [arch, x] : cases) {
    CAPTURE(arch_name(arch));
    const auto p = init_parameters<double>(arch, rng);
    const auto f = interval_forward<double>(arch, lift_weights(p, 0.0), x);
    const auto exact = concrete_logits(arch, p, x);
    CHECK(bit_identical(f.logits.lo, exact));
    CHECK(bit_identical(f.logits.hi, exact));
    CHECK(f.uncertain == 0);
  }
}

TEST_CASE("mlp and cnn logits contain 10^3 sampled networks") {
  RngStream rng(5, 0);
  const MlpConfig mlp{5, {6, 4}, 3};
  check_containment(mlp, mlp.init<double>(rng), random_array(rng, {3, 5}), 0.1, 1000, rng);
  const CnnConfig cnn{7, 7, 1, {3}, 3, {4}, 3};
  auto p = cnn.init<double>(rng);
  p.at("conv1.bias") = random_array(rng, {3}, 0.1);
  check_containment(cnn, p, random_array(rng, {2, 7, 7, 1}), 0.05, 1000, rng);
}

TEST_CASE("srnn with zero weights yields the b_out interval as logits") {
  SrnnConfig cfg{.inputs = 2, .hidden = 4, .classes = 3};
  RngStream rng(6, 0);
  auto p = cfg.init<double>(rng);
  for (const char* name : {"w_in", "w_rec", "w_out"}) p.at(name).fill(0.0);
  p.at("b_out") = Array<double>(Shape{3}, {0.3, -0.7, 1.1});
  const auto f = interval_forward<double>(cfg, lift_weights(p, 0.2), random_array(rng, {2, 5, 2}));
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t c = 0; c < 3; ++c) {
      const double b = p.at("b_out")[c];
      CHECK(f.logits.lo(i, c) == doctest::Approx(b - 0.2 * std::abs(b)).epsilon(1e-15));
      CHECK(f.logits.hi(i, c) == doctest::Approx(b + 0.2 * std::abs(b)).epsilon(1e-15));
    }
}

TEST_CASE("srnn logits contain 10^3 sampled networks on a 4-neuron 5-step instance") {
  SrnnConfig cfg{.inputs = 2, .hidden = 4, .classes = 3};
  RngStream rng(7, 0);
  ParameterSet<double> p;
  p.add("w_in", random_array(rng, {2, 4}, 10.0), true);
  p.add("w_rec", random_array(rng, {4, 4}, 0.05), true);
  p.add("w_out", random_array(rng, {4, 3}), true);
  p.add("b_out", random_array(rng, {3}, 0.1), true);
  Array<double> x(Shape{3, 5, 2});
  for (auto& v : x.values()) v = 1.0 + rng.uniform();
  for (double zeta : {0.01, 0.1, 0.3}) {
    CAPTURE(zeta);
    check_containment(cfg, p, x, zeta, 1000, rng);
  }
  const auto wide = interval_forward<double>(cfg, lift_weights(p, 0.3), x);
  CHECK(wide.uncertain > 0);
  CHECK(wide.always > 0);
  CHECK(wide.always + wide.never + wide.uncertain == 3 * 5 * 4);
}

TEST_CASE("interval widths grow with zeta") {
  SrnnConfig cfg{.inputs = 2, .hidden = 5, .classes = 3};
  RngStream rng(8, 0);
  auto p = cfg.init<double>(rng);
  p.at("w_in") = random_array(rng, {2, 5}, 30.0);
  const auto x = random_array(rng, {2, 6, 2}, 2.0);
  IntervalForward<double> prev = interval_forward<double>(cfg, lift_weights(p, 0.0), x);
  for (double zeta : {0.01, 0.05, 0.2}) {
    const auto f = interval_forward<double>(cfg, lift_weights(p, zeta), x);
    for (std::size_t i = 0; i < f.logits.size(); ++i) {
      CHECK(f.logits.lo[i] <= prev.logits.lo[i] + kSlack);
      CHECK(f.logits.hi[i] >= prev.logits.hi[i] - kSlack);
    }
    prev = f;
  }
}

TEST_CASE("verified_correct decision rule") {
  const double lo1[] = {3, 1}, hi1[] = {4, 2};
  CHECK(verified_correct(lo1, hi1, 2, 0));
  CHECK_FALSE(verified_correct(lo1, hi1, 2, 1));
  const double lo2[] = {3, 3.5}, hi2[] = {4, 5};
  CHECK_FALSE(verified_correct(lo2, hi2, 2, 0));
  CHECK_FALSE(verified_correct(lo2, hi2, 2, 1));
  const double pt[] = {0.2, 0.9, 0.1};
  CHECK(verified_correct(pt, pt, 3, 1));
  CHECK_FALSE(verified_correct(pt, pt, 3, 0));
  const double tie[] = {0.5, 0.5};
  CHECK_FALSE(verified_correct(tie, tie, 2, 0));
  CHECK_THROWS_AS(verified_correct(pt, pt, 1, 0), std::invalid_argument);
}

TEST_CASE("verified accuracy equals clean accuracy at zero and falls with zeta") {
  RngStream rng(9, 0);
  const MlpConfig cfg{4, {8}, 3};
  const auto p = cfg.init<double>(rng);
  Dataset<double> d{random_array(rng, {200, 4}), std::vector<std::size_t>(200), 3};
  const auto pred = argmax_rows(probabilities<double>(cfg, p, d.x));
  for (std::size_t i = 0; i < 200; ++i) d.y[i] = i % 4 == 0 ? (pred[i] + 1) % 3 : pred[i];
  CHECK(verified_accuracy<double>(cfg, p, 0.0, d, 64) == evaluate_accuracy<double>(cfg, p, d));
  double prev = 1.0;
  for (double zeta : {0.0, 0.01, 0.05, 0.1, 0.3, 1.0}) {
    const double acc = verified_accuracy<double>(cfg, p, zeta, d, 64);
    CHECK(acc <= prev);
    prev = acc;
  }
  CHECK(prev < 0.75);
}
