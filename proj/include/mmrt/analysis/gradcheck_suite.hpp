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

#include <functional>
#include <string>
#include <vector>

#include "mmrt/core/gradcheck.hpp"
#include "mmrt/core/ops.hpp"
#include "mmrt/models/model.hpp"

namespace mmrt {

struct GradCheckCase {
  std::string name;
  GradCheckResult result;
};

struct GradCheckSuite {
  std::vector<GradCheckCase> cases;

  const GradCheckCase& worst() const {
    std::size_t w = 0;
    for (std::size_t i = 1; i < cases.size(); ++i)
      if (cases[i].result.worst_relative_error > cases[w].result.worst_relative_error) w = i;
    return cases.at(w);
  }
};

namespace detail {

inline Array<double> gc_random(RngStream& rng, Shape shape, double scale = 1.0) {
  Array<double> a(std::move(shape));
  for (auto& v : a.values()) v = scale * rng.normal();
  return a;
}

// Contracts any output with fixed random weights into a [1,1] scalar.
inline Var gc_reduce(Tape<double>& t, Var out, RngStream& rng) {
  const std::size_t n = t.value(out).size();
  Var flat = ops::reshape(t, out, Shape{1, n});
  return ops::matmul(t, flat, t.constant(gc_random(rng, {n, 1})));
}

inline Array<double> gc_one_hot(const std::vector<std::size_t>& labels, std::size_t classes) {
  return one_hot<double>(labels, classes);
}

inline GradCheckResult gc_model(const ArchConfig& arch, const ParameterSet<double>& params,
                                const Array<double>& x, const std::vector<std::size_t>& labels) {
  Tape<double> tape;
  const auto vars = bind_parameters(tape, params);
  const Var p = forward_probabilities<double>(arch, tape, vars, tape.constant(x));
  const Var loss =
      ops::cross_entropy(tape, p, tape.constant(gc_one_hot(labels, tape.value(p).extent(1))));
  std::vector<std::string> names;
  for (const auto& e : params) names.push_back(e.name);
  return finite_difference_check(tape, loss, names, 1e-5);
}

}  // namespace detail

// Central-difference checks in binary64 over every differentiable primitive
// and a tiny instance of each architecture. The spiking cases keep every
// membrane potential far from its threshold, where the surrogate vanishes
// and the true derivative of the forward pass is what backward computes.
// A separate case compares the spike backward against the surrogate formula
// at points near threshold.
inline GradCheckSuite run_gradcheck_suite(std::uint64_t seed = 0) {
  using detail::gc_random;
  using detail::gc_reduce;
  RngStream rng(seed, 0x67726164);
  GradCheckSuite suite;
  constexpr double h = 1e-5;

  auto unary = [&](const std::string& name, Shape shape,
                   const std::function<Var(Tape<double>&, Var)>& f, double scale = 1.0) {
    Tape<double> t;
    Var a = t.input("a", gc_random(rng, std::move(shape), scale));
    Var loss = gc_reduce(t, f(t, a), rng);
    suite.cases.push_back({name, finite_difference_check(t, loss, {"a"}, h)});
  };
  auto binary = [&](const std::string& name, Shape sa, Shape sb,
                    const std::function<Var(Tape<double>&, Var, Var)>& f) {
    Tape<double> t;
    Var a = t.input("a", gc_random(rng, std::move(sa)));
    Var b = t.input("b", gc_random(rng, std::move(sb)));
    Var loss = gc_reduce(t, f(t, a, b), rng);
    suite.cases.push_back({name, finite_difference_check(t, loss, {"a", "b"}, h)});
  };

  binary("matmul", {3, 4}, {4, 5}, [](auto& t, Var a, Var b) { return ops::matmul(t, a, b); });
  binary("add", {3, 4}, {3, 4}, [](auto& t, Var a, Var b) { return ops::add(t, a, b); });
  binary("sub", {3, 4}, {3, 4}, [](auto& t, Var a, Var b) { return ops::sub(t, a, b); });
  binary("mul", {3, 4}, {3, 4}, [](auto& t, Var a, Var b) { return ops::mul(t, a, b); });
  binary("add_bias", {3, 4}, {4}, [](auto& t, Var a, Var b) { return ops::add_bias(t, a, b); });
  binary("conv2d", {2, 5, 5, 2}, {2, 3, 2, 3},
         [](auto& t, Var a, Var b) { return ops::conv2d(t, a, b); });
  unary("scale", {3, 4}, [](auto& t, Var a) { return ops::scale(t, a, 0.7); });
  unary("add_scalar", {3, 4}, [](auto& t, Var a) { return ops::add_scalar(t, a, 0.3); });
  unary("relu", {4, 5}, [](auto& t, Var a) { return ops::relu(t, a); });
  unary("abs", {4, 5}, [](auto& t, Var a) { return ops::abs(t, a); });
  unary("reshape", {3, 4}, [](auto& t, Var a) { return ops::reshape(t, a, Shape{2, 6}); });
  unary("maxpool2x2", {2, 5, 5, 2}, [](auto& t, Var a) { return ops::maxpool2x2(t, a); });
  unary("softmax", {3, 5}, [](auto& t, Var a) { return ops::softmax(t, a); });
  {
    Tape<double> t;
    Var a = t.input("a", gc_random(rng, {4, 5}, 2.0));
    Var lo = t.constant(Array<double>(Shape{4, 5}, -1.0));
    Var hi = t.constant(Array<double>(Shape{4, 5}, 1.0));
    Var loss = gc_reduce(t, ops::clamp(t, a, lo, hi), rng);
    suite.cases.push_back({"clamp", finite_difference_check(t, loss, {"a"}, h)});
  }
  {
    Tape<double> t;
    Var p = ops::softmax(t, t.input("a", gc_random(rng, {4, 5})));
    Var loss = ops::cross_entropy(t, p, t.constant(detail::gc_one_hot({0, 3, 4, 1}, 5)));
    suite.cases.push_back({"cross_entropy", finite_difference_check(t, loss, {"a"}, h)});
  }
  {
    Tape<double> t;
    Var p = ops::softmax(t, t.input("a", gc_random(rng, {4, 5})));
    Var q = ops::softmax(t, t.input("b", gc_random(rng, {4, 5})));
    Var loss = ops::kl_div(t, p, q);
    suite.cases.push_back({"kl_div", finite_difference_check(t, loss, {"a", "b"}, h)});
  }
  {
    // |v - b| >= b everywhere, so the surrogate is zero and so is the true
    // derivative.
    Tape<double> t;
    Array<double> v(Shape{2, 4}, {3.5, -0.2, 2.7, -1.0, 0.0, 4.0, -3.0, 2.1});
    Var vv = t.input("a", v);
    Var bb = t.input("b", Array<double>(Shape{2, 4}, 1.0));
    Var r = t.constant(Array<double>(Shape{2, 4}, 0.0));
    Var loss = gc_reduce(t, ops::spike(t, vv, bb, r, 0.3), rng);
    suite.cases.push_back({"spike_off_kink", finite_difference_check(t, loss, {"a", "b"}, h)});
  }
  {
    // Near threshold the spike backward must equal the surrogate formula.
    Tape<double> t;
    Array<double> v(Shape{1, 6}, {0.5, 0.9, 1.0, 1.1, 1.6, 1.2});
    Array<double> b(Shape{1, 6}, 1.0);
    Array<double> r(Shape{1, 6}, {0, 0, 0, 0, 0, 2});
    Var vv = t.input("a", v), bb = t.input("b", b);
    Var o = ops::spike(t, vv, bb, t.constant(r), 0.3);
    Var loss = ops::matmul(t, o, t.constant(Array<double>(Shape{6, 1}, 1.0)));
    const auto g = t.gradient(loss, std::vector<Var>{vv, bb});
    GradCheckResult res;
    for (std::size_t i = 0; i < 6; ++i) {
      const double expected = r[i] != 0 ? 0.0 : 0.3 * std::max(1.0 - std::abs(v[i] - 1.0), 0.0);
      for (int k = 0; k < 2; ++k) {
        const double want = k == 0 ? expected : -expected;
        const double err = std::abs(g[k][i] - want);
        if (res.checked++ == 0 || err > res.worst_relative_error) {
          res.worst_relative_error = err;
          res.worst_input = k == 0 ? "a" : "b";
          res.worst_index = i;
        }
      }
    }
    suite.cases.push_back({"spike_surrogate_formula", res});
  }

  const MlpConfig mlp{5, {4, 3}, 3};
  suite.cases.push_back({"mlp", detail::gc_model(mlp, mlp.init<double>(rng),
                                                 gc_random(rng, {3, 5}), {0, 2, 1})});

  const CnnConfig cnn{8, 8, 1, {2, 2}, 2, {3}, 3};
  auto cnn_params = cnn.init<double>(rng);
  for (auto& e : cnn_params)
    if (e.name.ends_with(".bias")) e.value = gc_random(rng, e.value.shape(), 0.1);
  suite.cases.push_back({"cnn", detail::gc_model(cnn, cnn_params, gc_random(rng, {2, 8, 8, 1}), {1, 2})});

  // Input weights drive half the neurons far past threshold and hold the
  // others far below it, so no spike can flip under the probe step.
  SrnnConfig srnn;
  srnn.inputs = 2;
  srnn.hidden = 4;
  srnn.classes = 3;
  ParameterSet<double> sp;
  sp.add("w_in", Array<double>(Shape{2, 4}, {2000, -900, 2500, -1200, 1800, -1100, 2200, -800}), true);
  sp.add("w_rec", gc_random(rng, {4, 4}, 0.01), true);
  sp.add("w_out", gc_random(rng, {4, 3}), true);
  sp.add("b_out", gc_random(rng, {3}, 0.1), true);
  Array<double> x(Shape{2, 5, 2});
  for (auto& v : x.values()) v = 1.0 + rng.uniform();
  suite.cases.push_back({"srnn_off_kink", detail::gc_model(srnn, sp, x, {0, 2})});
  return suite;
}

}  // namespace mmrt
