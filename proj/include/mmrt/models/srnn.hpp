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

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmrt/models/forward.hpp"

namespace mmrt {

// Recurrent network of adaptive leaky integrate-and-fire neurons with a
// rate readout. Per step, in order:
//   B      = b0 + beta * b
//   o      = 1(V > B), forced to 0 while refractory
//   b'     = rho_ada * b + (1 - rho_ada) * o / dt
//   reset  = o * B
//   V'     = rho_mem * V + (1 - rho_mem) * (I W_in + (o / dt) W_rec) - reset
//   refr'  = ceil(t_refr / dt) for spiking neurons, else max(refr - 1, 0)
// The readout is softmax(mean_t(o) W_out + b_out).
//
// Times are in milliseconds. The decay factors only depend on ratios, but
// o / dt does not: with dt = 1 a spike contributes one unit of adaptation
// and recurrent drive instead of a thousand.
struct SrnnConfig {
  std::size_t inputs = 1;
  std::size_t hidden = 128;
  std::size_t classes = 4;
  double dt = 1.0;
  double tau_mem = 20.0;
  double tau_ada = 100.0;
  double beta_ada = 1.8;
  double b0 = 1.0;
  double t_refr = 2.0;
  double dampening = 0.3;
  // Rank-2 inputs (vectors, flattened images) are presented as a constant
  // current for this many steps.
  std::size_t repeat_steps = 0;

  friend bool operator==(const SrnnConfig&, const SrnnConfig&) = default;

  // Sizes giving roughly 65k trainable parameters, the scale of the
  // keyword-spotting network the method was demonstrated on.
  static SrnnConfig reference_scale() {
    SrnnConfig c;
    c.inputs = 64;
    c.hidden = 220;
    c.classes = 6;
    return c;
  }

  void validate() const {
    if (!(dt > 0 && tau_mem > 0 && tau_ada > 0 && t_refr > 0))
      throw std::invalid_argument("srnn: dt, tau_mem, tau_ada and t_refr must be > 0");
    if (!(b0 > 0)) throw std::invalid_argument("srnn: b0 must be > 0");
    if (beta_ada < 0) throw std::invalid_argument("srnn: beta_ada must be >= 0");
  }

  double rho_mem() const { return std::exp(-dt / tau_mem); }
  double rho_ada() const { return std::exp(-dt / tau_ada); }
  std::size_t refractory_steps() const {
    return static_cast<std::size_t>(std::ceil(t_refr / dt - 1e-9));
  }

  template <typename T>
  ParameterSet<T> init(RngStream& rng) const {
    validate();
    ParameterSet<T> p;
    p.add("w_in", detail::glorot_normal<T>({inputs, hidden}, inputs, hidden, rng), true);
    p.add("w_rec", detail::glorot_normal<T>({hidden, hidden}, hidden, hidden, rng), true);
    p.add("w_out", detail::glorot_normal<T>({hidden, classes}, hidden, classes, rng), true);
    p.add("b_out", Array<T>(Shape{classes}), true);
    return p;
  }

  // Time-major view of a batch: steps x [N, inputs].
  template <typename T>
  std::vector<Array<T>> input_currents(const Array<T>& batch) const {
    const auto& s = batch.shape();
    std::size_t n = 0, steps = 0;
    bool repeated = false;
    if (s.size() == 3 && s[2] == inputs) {
      n = s[0];
      steps = s[1];
    } else if (s.size() >= 2 && element_count(s) / s[0] == inputs && repeat_steps > 0) {
      n = s[0];
      steps = repeat_steps;
      repeated = true;
    } else {
      throw ShapeError("srnn: input " + shape_string(s) + " is neither [N,T," +
                       std::to_string(inputs) + "] nor a repeatable [N," +
                       std::to_string(inputs) + "] batch");
    }
    if (steps == 0) throw ShapeError("srnn: sequence must have at least one step");
    std::vector<Array<T>> out;
    out.reserve(steps);
    for (std::size_t t = 0; t < steps; ++t) {
      Array<T> cur(Shape{n, inputs});
      for (std::size_t b = 0; b < n; ++b)
        for (std::size_t i = 0; i < inputs; ++i)
          cur(b, i) = repeated ? batch[b * inputs + i] : batch[(b * steps + t) * inputs + i];
      out.push_back(std::move(cur));
    }
    return out;
  }

  struct StateVars {
    Var v, b, refr, o;
  };

  template <typename T>
  StateVars initial_state(Tape<T>& tape, std::size_t batch) const {
    const Shape s{batch, hidden};
    return {tape.constant(Array<T>(s)), tape.constant(Array<T>(s)),
            tape.constant(Array<T>(s)), tape.constant(Array<T>(s))};
  }

  // One integration step. `spikes_out`, when given, receives the spikes as
  // seen downstream (after train-time dropout).
  template <typename T>
  StateVars step(Tape<T>& tape, Var w_in, Var w_rec, const StateVars& s, Var current,
                 const ForwardOptions* opt, Var* spikes_out = nullptr) const {
    const T rho_v = static_cast<T>(rho_mem());
    const T rho_b = static_cast<T>(rho_ada());
    const T inv_dt = static_cast<T>(1.0 / dt);
    Var threshold = ops::add_scalar(tape, ops::scale(tape, s.b, static_cast<T>(beta_ada)),
                                    static_cast<T>(b0));
    if (opt && opt->membrane) opt->membrane->emplace_back(s.v, threshold);
    Var o = ops::spike(tape, s.v, threshold, s.refr, static_cast<T>(dampening));
    Var seen = detail::maybe_dropout(tape, o, opt);
    if (spikes_out) *spikes_out = seen;

    Var b_next = ops::add(tape, ops::scale(tape, s.b, rho_b),
                          ops::scale(tape, o, static_cast<T>((1.0 - rho_ada()) / dt)));
    Var reset = ops::mul(tape, o, threshold);
    Var drive = ops::add(tape, ops::matmul(tape, current, w_in),
                         ops::matmul(tape, ops::scale(tape, seen, inv_dt), w_rec));
    Var v_next = ops::sub(tape,
                          ops::add(tape, ops::scale(tape, s.v, rho_v),
                                   ops::scale(tape, drive, static_cast<T>(1.0 - rho_mem()))),
                          reset);
    Var refr_next =
        ops::refractory_update(tape, s.refr, o, static_cast<T>(refractory_steps()));
    return {v_next, b_next, refr_next, o};
  }

  template <typename T>
  Var logits(Tape<T>& tape, const std::vector<Var>& params, Var input,
             const ForwardOptions* opt) const {
    validate();
    const auto currents = input_currents(tape.value(input));
    const std::size_t n = currents.front().extent(0);
    StateVars s = initial_state(tape, n);
    Var total;
    for (std::size_t t = 0; t < currents.size(); ++t) {
      Var seen;
      detail::record(opt, "membrane" + std::to_string(t), s.v);
      s = step(tape, params.at(0), params.at(1), s, tape.constant(currents[t]), opt, &seen);
      detail::record(opt, "spikes" + std::to_string(t), s.o);
      total = t == 0 ? seen : ops::add(tape, total, seen);
    }
    Var rate = ops::scale(tape, total, static_cast<T>(1.0 / currents.size()));
    detail::record(opt, "rate", rate);
    Var out = detail::dense(tape, rate, params.at(2), params.at(3));
    detail::record(opt, "logits", out);
    return out;
  }
};

// Concrete single step on plain arrays (no gradient), sharing the graph
// definition above.
template <typename T>
struct SrnnState {
  Array<T> v, b, refr, o;
};

template <typename T>
SrnnState<T> srnn_step(const SrnnConfig& cfg, const Array<T>& w_in, const Array<T>& w_rec,
                       const SrnnState<T>& state, const Array<T>& current) {
  Tape<T> tape;
  typename SrnnConfig::StateVars s{tape.constant(state.v), tape.constant(state.b),
                                   tape.constant(state.refr), tape.constant(state.o)};
  const auto next = cfg.step(tape, tape.constant(w_in), tape.constant(w_rec), s,
                             tape.constant(current), nullptr);
  return {tape.value(next.v), tape.value(next.b), tape.value(next.refr), tape.value(next.o)};
}

}  // namespace mmrt
