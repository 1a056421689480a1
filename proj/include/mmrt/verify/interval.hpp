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
#include <utility>
#include <variant>
#include <vector>

#include "mmrt/kernels/kernels.hpp"
#include "mmrt/mismatch/mismatch.hpp"
#include "mmrt/models/model.hpp"
#include "mmrt/training/dataset.hpp"

namespace mmrt {

// Elementwise closed intervals [lo, hi]. Bounds are computed in the working
// precision without directed rounding.
template <typename T>
struct IntervalArray {
  Array<T> lo, hi;

  IntervalArray() = default;
  IntervalArray(Array<T> l, Array<T> h) : lo(std::move(l)), hi(std::move(h)) {
    if (lo.shape() != hi.shape())
      throw ShapeError("interval: bounds " + shape_string(lo.shape()) + " and " +
                       shape_string(hi.shape()) + " differ");
  }
  static IntervalArray point(const Array<T>& x) { return {x, x}; }

  const Shape& shape() const { return lo.shape(); }
  std::size_t size() const { return lo.size(); }
  bool degenerate() const { return bit_identical(lo, hi); }
  bool contains(const Array<T>& x, T slack = T(0)) const {
    if (x.shape() != shape()) return false;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (!(x[i] >= lo[i] - slack && x[i] <= hi[i] + slack)) return false;
    return true;
  }
  IntervalArray reshaped(Shape s) const { return {lo.reshaped(s), hi.reshaped(std::move(s))}; }
};

enum class SpikeState { kNever, kAlways, kUncertain };

template <typename T>
SpikeState spike_state(T o_lo, T o_hi) {
  if (o_hi == T(0)) return SpikeState::kNever;
  if (o_lo == T(1)) return SpikeState::kAlways;
  return SpikeState::kUncertain;
}

// [theta - zeta|theta|, theta + zeta|theta|] for susceptible arrays; other
// arrays become point intervals. Order follows the parameter set.
template <typename T>
std::vector<IntervalArray<T>> lift_weights(const ParameterSet<T>& params, double zeta) {
  require_zeta(zeta, "lift_weights");
  std::vector<IntervalArray<T>> out;
  out.reserve(params.size());
  const T z = static_cast<T>(zeta);
  for (const auto& e : params) {
    if (!e.susceptible) {
      out.push_back(IntervalArray<T>::point(e.value));
      continue;
    }
    Array<T> lo(e.value.shape()), hi(e.value.shape());
    for (std::size_t i = 0; i < e.value.size(); ++i) {
      const T r = z * std::abs(e.value[i]);
      lo[i] = e.value[i] - r;
      hi[i] = e.value[i] + r;
    }
    out.emplace_back(std::move(lo), std::move(hi));
  }
  return out;
}

namespace interval {

template <typename T>
IntervalArray<T> matmul(const IntervalArray<T>& x, const IntervalArray<T>& w) {
  if (x.lo.rank() != 2 || w.lo.rank() != 2 || x.lo.extent(1) != w.lo.extent(0))
    throw ShapeError("interval matmul: cannot multiply " + shape_string(x.shape()) + " by " +
                     shape_string(w.shape()));
  const std::size_t m = x.lo.extent(0), k = x.lo.extent(1), n = w.lo.extent(1);
  IntervalArray<T> out{Array<T>(Shape{m, n}), Array<T>(Shape{m, n})};
  kernels::interval_gemm(m, k, n, x.lo.data(), x.hi.data(), w.lo.data(), w.hi.data(),
                         out.lo.data(), out.hi.data());
  return out;
}

template <typename T>
IntervalArray<T> add(const IntervalArray<T>& a, const IntervalArray<T>& b) {
  if (a.shape() != b.shape())
    throw ShapeError("interval add: " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  IntervalArray<T> out = a;
  for (std::size_t i = 0; i < a.size(); ++i) {
    out.lo[i] = a.lo[i] + b.lo[i];
    out.hi[i] = a.hi[i] + b.hi[i];
  }
  return out;
}

template <typename T>
IntervalArray<T> add_bias(const IntervalArray<T>& x, const IntervalArray<T>& b) {
  const std::size_t n = b.size();
  if (x.lo.rank() == 0 || x.shape().back() != n)
    throw ShapeError("interval add_bias: " + shape_string(x.shape()) + " vs " +
                     shape_string(b.shape()));
  IntervalArray<T> out = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    out.lo[i] = x.lo[i] + b.lo[i % n];
    out.hi[i] = x.hi[i] + b.hi[i % n];
  }
  return out;
}

// x W + b with the four-products rule per term.
template <typename T>
IntervalArray<T> affine(const IntervalArray<T>& x, const IntervalArray<T>& w,
                        const IntervalArray<T>& b) {
  return add_bias(matmul(x, w), b);
}

template <typename T>
IntervalArray<T> conv2d(const IntervalArray<T>& x, const IntervalArray<T>& k) {
  const auto g = ops::detail::conv_geometry(x.lo, k.lo);
  const auto lo = ops::im2col(x.lo, g.kh, g.kw);
  const auto hi = ops::im2col(x.hi, g.kh, g.kw);
  const Shape s{g.n, g.oh, g.ow, g.f};
  IntervalArray<T> out{Array<T>(s), Array<T>(s)};
  kernels::interval_gemm(g.n * g.oh * g.ow, g.kh * g.kw * g.c, g.f, lo.data(), hi.data(),
                         k.lo.data(), k.hi.data(), out.lo.data(), out.hi.data());
  return out;
}

template <typename T>
IntervalArray<T> relu(const IntervalArray<T>& x) {
  IntervalArray<T> out = x;
  const auto& kt = kernels::active<T>();
  kt.relu(x.size(), x.lo.data(), out.lo.data());
  kt.relu(x.size(), x.hi.data(), out.hi.data());
  return out;
}

template <typename T>
IntervalArray<T> maxpool2x2(const IntervalArray<T>& x) {
  Tape<T> tape;
  return {tape.value(ops::maxpool2x2(tape, tape.constant(x.lo))),
          tape.value(ops::maxpool2x2(tape, tape.constant(x.hi)))};
}

template <typename T>
IntervalArray<T> scale(const IntervalArray<T>& x, T s) {
  if (s < T(0)) throw std::invalid_argument("interval scale: negative factor");
  IntervalArray<T> out = x;
  const auto& kt = kernels::active<T>();
  kt.scale(x.size(), s, x.lo.data(), out.lo.data());
  kt.scale(x.size(), s, x.hi.data(), out.hi.data());
  return out;
}

}  // namespace interval

template <typename T>
struct IntervalForward {
  IntervalArray<T> logits;
  // Named intermediates in evaluation order, mirroring the concrete trace.
  std::vector<std::pair<std::string, IntervalArray<T>>> trace;
  // SRNN only: spike-state counts summed over neurons, steps and examples.
  std::size_t never = 0, always = 0, uncertain = 0;
};

namespace detail {

template <typename T>
void record(IntervalForward<T>& f, std::string name, const IntervalArray<T>& x, bool keep) {
  if (keep) f.trace.emplace_back(std::move(name), x);
}

template <typename T>
void interval_logits(const MlpConfig& cfg, const std::vector<IntervalArray<T>>& w,
                     const Array<T>& batch, IntervalForward<T>& f, bool keep) {
  const Shape s = batch.shape();
  if (s.empty() || element_count(s) / s[0] != cfg.inputs)
    throw ShapeError("mlp: input " + shape_string(s) + " does not have " +
                     std::to_string(cfg.inputs) + " features per example");
  auto h = IntervalArray<T>::point(batch.reshaped(Shape{s[0], cfg.inputs}));
  const std::size_t layers = cfg.hidden.size() + 1;
  for (std::size_t i = 0; i < layers; ++i) {
    h = interval::affine(h, w.at(2 * i), w.at(2 * i + 1));
    if (i + 1 < layers) {
      h = interval::relu(h);
      record(f, MlpConfig::layer_name(i, layers), h, keep);
    }
  }
  f.logits = std::move(h);
}

template <typename T>
void interval_logits(const CnnConfig& cfg, const std::vector<IntervalArray<T>>& w,
                     const Array<T>& batch, IntervalForward<T>& f, bool keep) {
  const Shape s = batch.shape();
  if (s.empty() || element_count(s) / s[0] != cfg.height * cfg.width * cfg.channels)
    throw ShapeError("cnn: input " + shape_string(s) + " is not a batch of images");
  auto h = IntervalArray<T>::point(batch.reshaped(Shape{s[0], cfg.height, cfg.width, cfg.channels}));
  std::size_t k = 0;
  for (std::size_t i = 0; i < cfg.conv_channels.size(); ++i, k += 2) {
    h = interval::add_bias(interval::conv2d(h, w.at(k)), w.at(k + 1));
    h = interval::relu(interval::maxpool2x2(h));
    record(f, "conv" + std::to_string(i + 1), h, keep);
  }
  h = h.reshaped(Shape{s[0], cfg.flat_features()});
  for (std::size_t i = 0; i <= cfg.dense.size(); ++i, k += 2) {
    h = interval::affine(h, w.at(k), w.at(k + 1));
    if (i < cfg.dense.size()) {
      h = interval::relu(h);
      record(f, "dense" + std::to_string(i + 1), h, keep);
    }
  }
  f.logits = std::move(h);
}

// Interval image of the adaptive LIF recurrence. The refractory counter is
// tracked as an interval too: a neuron can fire only if its counter may be
// zero and must fire only if it is certainly zero and V_lo > B_hi.
template <typename T>
void interval_logits(const SrnnConfig& cfg, const std::vector<IntervalArray<T>>& w,
                     const Array<T>& batch, IntervalForward<T>& f, bool keep) {
  cfg.validate();
  const auto currents = cfg.input_currents(batch);
  const std::size_t n = currents.front().extent(0), h = cfg.hidden;
  const Shape s{n, h};
  const T rho_v = static_cast<T>(cfg.rho_mem());
  const T rho_b = static_cast<T>(cfg.rho_ada());
  const T leak_in = static_cast<T>(1.0 - cfg.rho_mem());
  const T inv_dt = static_cast<T>(1.0 / cfg.dt);
  const T b_gain = static_cast<T>((1.0 - cfg.rho_ada()) / cfg.dt);
  const T beta = static_cast<T>(cfg.beta_ada), b0 = static_cast<T>(cfg.b0);
  const T steps = static_cast<T>(cfg.refractory_steps());

  IntervalArray<T> v{Array<T>(s), Array<T>(s)}, b{Array<T>(s), Array<T>(s)};
  Array<T> r_lo(s), r_hi(s);
  IntervalArray<T> total;
  for (std::size_t t = 0; t < currents.size(); ++t) {
    record(f, "membrane" + std::to_string(t), v, keep);
    IntervalArray<T> thr{Array<T>(s), Array<T>(s)}, o{Array<T>(s), Array<T>(s)};
    for (std::size_t i = 0; i < v.size(); ++i) {
      thr.lo[i] = b.lo[i] * beta + b0;
      thr.hi[i] = b.hi[i] * beta + b0;
      o.lo[i] = (r_hi[i] == T(0) && v.lo[i] > thr.hi[i]) ? T(1) : T(0);
      o.hi[i] = (r_lo[i] == T(0) && v.hi[i] > thr.lo[i]) ? T(1) : T(0);
      switch (spike_state(o.lo[i], o.hi[i])) {
        case SpikeState::kNever: ++f.never; break;
        case SpikeState::kAlways: ++f.always; break;
        case SpikeState::kUncertain: ++f.uncertain; break;
      }
    }
    record(f, "spikes" + std::to_string(t), o, keep);
    const auto drive = interval::add(
        interval::matmul(IntervalArray<T>::point(currents[t]), w.at(0)),
        interval::matmul(interval::scale(o, inv_dt), w.at(1)));
    for (std::size_t i = 0; i < v.size(); ++i) {
      // Reset o * B with o in [o_lo, o_hi] and B > 0.
      const T reset_lo = o.lo[i] * thr.lo[i], reset_hi = o.hi[i] * thr.hi[i];
      v.lo[i] = (rho_v * v.lo[i] + leak_in * drive.lo[i]) - reset_hi;
      v.hi[i] = (rho_v * v.hi[i] + leak_in * drive.hi[i]) - reset_lo;
      b.lo[i] = rho_b * b.lo[i] + b_gain * o.lo[i];
      b.hi[i] = rho_b * b.hi[i] + b_gain * o.hi[i];
      const T down_lo = std::max(r_lo[i] - T(1), T(0)), down_hi = std::max(r_hi[i] - T(1), T(0));
      r_lo[i] = o.lo[i] > T(0) ? steps : down_lo;
      r_hi[i] = o.hi[i] > T(0) ? steps : down_hi;
    }
    total = t == 0 ? o : interval::add(total, o);
  }
  const auto rate = interval::scale(total, static_cast<T>(1.0 / currents.size()));
  record(f, "rate", rate, keep);
  f.logits = interval::affine(rate, w.at(2), w.at(3));
}

}  // namespace detail

// Pre-softmax logit intervals for every example under all weights in the
// lifted box.
template <typename T>
IntervalForward<T> interval_forward(const ArchConfig& arch,
                                    const std::vector<IntervalArray<T>>& weights,
                                    const Array<T>& batch, bool keep_trace = false) {
  IntervalForward<T> f;
  std::visit([&](const auto& cfg) { detail::interval_logits(cfg, weights, batch, f, keep_trace); },
             arch);
  if (keep_trace) f.trace.emplace_back("logits", f.logits);
  return f;
}

// Provably correct: the label's lower bound is the largest lower bound and
// its interval is disjoint from every other class interval.
template <typename T>
bool verified_correct(const T* lo, const T* hi, std::size_t classes, std::size_t label) {
  if (classes < 2) throw std::invalid_argument("verified_correct: need at least two classes");
  if (label >= classes) throw std::out_of_range("verified_correct: label outside classes");
  for (std::size_t c = 0; c < classes; ++c) {
    if (c == label) continue;
    if (lo[c] > lo[label]) return false;
    if (!(hi[c] < lo[label] || lo[c] > hi[label])) return false;
  }
  return true;
}

template <typename T>
std::vector<bool> verified_correct(const IntervalArray<T>& logits,
                                   const std::vector<std::size_t>& labels) {
  const std::size_t c = logits.lo.extent(1);
  std::vector<bool> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i)
    out[i] = verified_correct(logits.lo.data() + i * c, logits.hi.data() + i * c, c, labels[i]);
  return out;
}

template <typename T>
double verified_accuracy(const ArchConfig& arch, const ParameterSet<T>& params, double zeta,
                         const Dataset<T>& data, std::size_t chunk = 256) {
  if (data.empty()) return 0.0;
  const auto weights = lift_weights(params, zeta);
  std::size_t ok = 0;
  for (std::size_t begin = 0; begin < data.size(); begin += chunk) {
    std::vector<std::size_t> rows;
    for (std::size_t i = begin; i < std::min(begin + chunk, data.size()); ++i) rows.push_back(i);
    const auto f = interval_forward(arch, weights, data.gather(rows));
    for (bool v : verified_correct(f.logits, data.labels(rows))) ok += v;
  }
  return static_cast<double>(ok) / static_cast<double>(data.size());
}

}  // namespace mmrt
