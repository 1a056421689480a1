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
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmrt/mismatch/mismatch.hpp"
#include "mmrt/models/model.hpp"

namespace mmrt {

struct AttackConfig {
  double zeta = 0.1;
  std::size_t n_steps = 10;
  double eps_init = 0.01;
  double beta_rob = 0.25;

  friend bool operator==(const AttackConfig&, const AttackConfig&) = default;

  void validate() const {
    if (!(zeta >= 0.0)) throw std::invalid_argument("attack: zeta must be >= 0");
    if (n_steps < 1) throw std::invalid_argument("attack: n_steps must be >= 1");
    if (!(eps_init >= 0.0)) throw std::invalid_argument("attack: eps_init must be >= 0");
    if (!(beta_rob >= 0.0)) throw std::invalid_argument("attack: beta_rob must be >= 0");
  }
};

// Per-entry record of one attack: the summed ascent signs and the jitter
// draw used to initialise it. Non-susceptible entries stay zero.
template <typename T>
struct AttackTrace {
  ParameterSet<T> sign_sum;
  ParameterSet<T> jitter;
};

template <typename T>
struct AttackResult {
  ParameterSet<T> theta_star;
  AttackTrace<T> trace;
};

// Relative Gaussian noise added to susceptible parameters on every forward
// pass. Gradients flow straight through to the clean parameters.
struct ForwardNoise {
  double relative_std = 0.0;
  RngStream* rng = nullptr;

  bool active() const { return relative_std > 0.0; }
};

// Loss to ascend, given the probability rows of the attacked network.
template <typename T>
using AttackObjective = std::function<Var(Tape<T>&, Var)>;

// Called with the projected starting point (step 0) and after every ascent
// step with the step index and the current parameters.
template <typename T>
using StepObserver = std::function<void(std::size_t, const ParameterSet<T>&)>;

template <typename T>
T sign_of(T x) {
  return static_cast<T>((x > T(0)) - (x < T(0)));
}

template <typename T>
void project_box_inplace(Array<T>& m, const Array<T>& theta, T zeta) {
  if (m.shape() != theta.shape())
    throw ShapeError("project_box: " + shape_string(m.shape()) + " vs " +
                     shape_string(theta.shape()));
  for (std::size_t i = 0; i < m.size(); ++i) {
    const T r = zeta * std::abs(theta[i]);
    m[i] = std::min(std::max(m[i], theta[i] - r), theta[i] + r);
  }
}

// Clamps every susceptible entry of m into [theta - zeta|theta|,
// theta + zeta|theta|]. Other entries are returned unchanged.
template <typename T>
ParameterSet<T> project_box(ParameterSet<T> m, const ParameterSet<T>& theta, double zeta) {
  require_zeta(zeta, "project_box");
  if (m.size() != theta.size()) throw ShapeError("project_box: parameter sets differ");
  for (std::size_t k = 0; k < m.size(); ++k)
    if (theta[k].susceptible) project_box_inplace(m[k].value, theta[k].value, static_cast<T>(zeta));
  return m;
}

namespace detail {

template <typename T>
std::vector<Var> bind_with_noise(Tape<T>& tape, const ParameterSet<T>& params,
                                 const ForwardNoise& noise, const std::string& prefix = "") {
  std::vector<Var> vars;
  vars.reserve(params.size());
  for (const auto& e : params) vars.push_back(tape.input(prefix + e.name, e.value));
  if (!noise.active()) return vars;
  if (!noise.rng) throw std::invalid_argument("forward noise requires an rng stream");
  const auto delta = proportional_direction(params, noise.relative_std, *noise.rng);
  std::vector<Var> noisy;
  noisy.reserve(vars.size());
  for (std::size_t k = 0; k < params.size(); ++k)
    noisy.push_back(params[k].susceptible
                        ? ops::add(tape, vars[k], tape.constant(delta[k].value))
                        : vars[k]);
  return noisy;
}

template <typename T>
Array<T> noisy_probabilities(const ArchConfig& arch, const ParameterSet<T>& params,
                             const Array<T>& batch, const ForwardNoise& noise) {
  if (!noise.active()) return probabilities(arch, params, batch);
  Tape<T> tape;
  const auto vars = bind_with_noise(tape, params, noise);
  return tape.value(forward_probabilities(arch, tape, vars, tape.constant(batch)));
}

}  // namespace detail

// Sign-gradient ascent of `objective` inside the relative box of radius
// zeta|theta|: jittered start theta + |theta| eps R, then n_steps steps of
// size zeta|theta|/n_steps, each followed by projection.
template <typename T>
AttackResult<T> pga_box_attack(const ArchConfig& arch, const ParameterSet<T>& theta,
                               const Array<T>& batch, const AttackObjective<T>& objective,
                               double zeta, std::size_t n_steps, double eps_init,
                               RngStream& rng, const ForwardNoise& noise = {},
                               const StepObserver<T>& observer = {}) {
  AttackConfig{zeta, n_steps, eps_init, 0.0}.validate();
  AttackResult<T> res{theta, {theta.zeros_like(), theta.zeros_like()}};
  auto& star = res.theta_star;
  for (std::size_t k = 0; k < theta.size(); ++k) {
    if (!theta[k].susceptible) continue;
    auto& r = res.trace.jitter[k].value;
    auto& m = star[k].value;
    const auto& th = theta[k].value;
    for (std::size_t i = 0; i < th.size(); ++i) {
      r[i] = static_cast<T>(rng.normal());
      m[i] = th[i] + std::abs(th[i]) * static_cast<T>(eps_init) * r[i];
    }
  }
  star = project_box(std::move(star), theta, zeta);
  if (observer) observer(0, star);

  const T steps = static_cast<T>(n_steps);
  for (std::size_t t = 1; t <= n_steps; ++t) {
    Tape<T> tape;
    const auto vars = detail::bind_with_noise(tape, star, noise);
    std::vector<Var> wrt;
    for (const auto& e : star) wrt.push_back(tape.input_var(e.name));
    const Var loss = objective(tape, forward_probabilities(arch, tape, vars, tape.constant(batch)));
    const auto grads = tape.gradient(loss, wrt);
    for (std::size_t k = 0; k < theta.size(); ++k) {
      if (!theta[k].susceptible) continue;
      auto& m = star[k].value;
      auto& s = res.trace.sign_sum[k].value;
      const auto& th = theta[k].value;
      for (std::size_t i = 0; i < m.size(); ++i) {
        const T dir = sign_of(grads[k][i]);
        m[i] += static_cast<T>(zeta) * std::abs(th[i]) / steps * dir;
        s[i] += dir;
      }
      project_box_inplace(m, th, static_cast<T>(zeta));
    }
    if (observer) observer(t, star);
  }
  return res;
}

// Mean over rows of KL(nominal || attacked) with the probability floor.
template <typename T>
double robustness_loss(const Array<T>& p_nominal, const Array<T>& p_attacked) {
  Tape<T> tape;
  return static_cast<double>(
      tape.value(ops::kl_div(tape, tape.constant(p_nominal), tape.constant(p_attacked)))[0]);
}

// Weight-space adversary maximising the robustness loss against the
// nominal predictions, which are computed once and held fixed.
template <typename T>
AttackResult<T> pga_attack(const ArchConfig& arch, const ParameterSet<T>& theta,
                           const Array<T>& batch, const AttackConfig& cfg, RngStream& rng,
                           const ForwardNoise& noise = {}, const StepObserver<T>& observer = {}) {
  cfg.validate();
  const Array<T> nominal = detail::noisy_probabilities(arch, theta, batch, noise);
  const AttackObjective<T> kl = [&nominal](Tape<T>& tape, Var q) {
    return ops::kl_div(tape, tape.constant(nominal), q);
  };
  return pga_box_attack(arch, theta, batch, kl, cfg.zeta, cfg.n_steps, cfg.eps_init, rng, noise,
                        observer);
}

// Diagonal of d theta* / d theta under the diagonal-Jacobian assumption:
// 1 + sign(theta)(zeta + eps R) / n_steps * sign_sum on susceptible entries,
// 1 elsewhere.
template <typename T>
ParameterSet<T> attack_jacobian(const ParameterSet<T>& theta, const AttackTrace<T>& trace,
                                const AttackConfig& cfg) {
  auto j = theta.zeros_like();
  for (std::size_t k = 0; k < theta.size(); ++k) {
    auto& d = j[k].value;
    if (!theta[k].susceptible) {
      d.fill(T(1));
      continue;
    }
    const auto& th = theta[k].value;
    const auto& r = trace.jitter[k].value;
    const auto& s = trace.sign_sum[k].value;
    for (std::size_t i = 0; i < d.size(); ++i)
      d[i] = T(1) + sign_of(th[i]) *
                        (static_cast<T>(cfg.zeta) + static_cast<T>(cfg.eps_init) * r[i]) /
                        static_cast<T>(cfg.n_steps) * s[i];
  }
  return j;
}

template <typename T>
struct CombinedGradient {
  ParameterSet<T> gradient;
  double natural_loss = 0.0;
  double robustness_loss = 0.0;
  // Empty when beta_rob is zero and no attack ran.
  AttackResult<T> attack;
};

// Gradient of L_Nat + beta * KL(f(theta), f(theta*)) with respect to theta,
// where theta* comes from a fresh attack and its dependence on theta is
// approximated by the diagonal Jacobian. With beta = 0 no attack runs and
// the result is the plain cross-entropy gradient.
template <typename T>
CombinedGradient<T> combined_gradient(const ArchConfig& arch, const ParameterSet<T>& theta,
                                      const Array<T>& batch, const Array<T>& one_hot_labels,
                                      const AttackConfig& cfg, RngStream& rng,
                                      const ForwardNoise& noise = {},
                                      const ForwardOptions* opt = nullptr) {
  cfg.validate();
  CombinedGradient<T> out;
  const bool robust = cfg.beta_rob > 0.0;
  if (robust) out.attack = pga_attack(arch, theta, batch, cfg, rng, noise);

  Tape<T> tape;
  const auto vars = detail::bind_with_noise(tape, theta, noise);
  std::vector<Var> wrt;
  for (const auto& e : theta) wrt.push_back(tape.input_var(e.name));
  const Var p = forward_probabilities(arch, tape, vars, tape.constant(batch), opt);
  const Var nat = ops::cross_entropy(tape, p, tape.constant(one_hot_labels));
  out.natural_loss = static_cast<double>(tape.value(nat)[0]);
  Var total = nat;
  if (robust) {
    const auto star_vars = detail::bind_with_noise(tape, out.attack.theta_star, noise, "*");
    for (const auto& e : theta) wrt.push_back(tape.input_var("*" + e.name));
    const Var q = forward_probabilities(arch, tape, star_vars, tape.constant(batch), opt);
    const Var rob = ops::kl_div(tape, p, q);
    out.robustness_loss = static_cast<double>(tape.value(rob)[0]);
    total = ops::add(tape, nat, ops::scale(tape, rob, static_cast<T>(cfg.beta_rob)));
  }
  auto grads = tape.gradient(total, wrt);
  out.gradient = theta.zeros_like();
  const std::size_t n = theta.size();
  for (std::size_t k = 0; k < n; ++k) out.gradient[k].value = std::move(grads[k]);
  if (robust) {
    const auto jac = attack_jacobian(theta, out.attack.trace, cfg);
    for (std::size_t k = 0; k < n; ++k) {
      auto& g = out.gradient[k].value;
      const auto& gs = grads[n + k];
      const auto& d = jac[k].value;
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += d[i] * gs[i];
    }
  }
  return out;
}

}  // namespace mmrt
