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

#include <chrono>
#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmrt/adversary/adversary.hpp"
#include "mmrt/training/adam.hpp"
#include "mmrt/training/dataset.hpp"

namespace mmrt {

enum class Method { kStandard, kBeta, kBetaForward, kForwardNoise, kDropout, kAwp };

inline const std::vector<std::pair<Method, std::string>>& method_names() {
  static const std::vector<std::pair<Method, std::string>> names = {
      {Method::kStandard, "standard"},         {Method::kBeta, "beta"},
      {Method::kBetaForward, "beta_forward"},  {Method::kForwardNoise, "forward_noise"},
      {Method::kDropout, "dropout"},           {Method::kAwp, "awp"},
  };
  return names;
}

inline std::string to_string(Method m) {
  for (const auto& [k, v] : method_names())
    if (k == m) return v;
  throw std::invalid_argument("unknown training method");
}

inline Method parse_method(const std::string& s) {
  for (const auto& [k, v] : method_names())
    if (v == s) return k;
  throw std::invalid_argument("unknown training method '" + s + "'");
}

struct TrainConfig {
  Method method = Method::kStandard;
  double learning_rate = 1e-3;
  std::size_t epochs = 10;
  std::size_t batch_size = 64;
  double beta_rob = 0.25;
  double dropout_p = 0.3;
  // Relative: each susceptible weight is perturbed with std sigma |theta|.
  double forward_noise_std = 0.3;
  double awp_gamma = 0.1;
  // Joint gradient L2-norm limit; 0 disables clipping.
  double grad_clip = 0.0;
  AttackConfig attack;
  std::uint64_t seed = 0;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;

  void validate() const {
    if (!(learning_rate > 0.0)) throw std::invalid_argument("train: learning_rate must be > 0");
    if (batch_size == 0) throw std::invalid_argument("train: batch_size must be >= 1");
    if (!(beta_rob >= 0.0)) throw std::invalid_argument("train: beta_rob must be >= 0");
    if (!(dropout_p >= 0.0 && dropout_p < 1.0))
      throw std::invalid_argument("train: dropout_p must lie in [0, 1)");
    if (!(forward_noise_std >= 0.0))
      throw std::invalid_argument("train: forward_noise_std must be >= 0");
    if (!(awp_gamma >= 0.0)) throw std::invalid_argument("train: awp_gamma must be >= 0");
    if (!(grad_clip >= 0.0)) throw std::invalid_argument("train: grad_clip must be >= 0");
    attack.validate();
  }

  // The attack actually run for the beta methods.
  AttackConfig robust_attack() const {
    AttackConfig a = attack;
    a.beta_rob = uses_beta() ? beta_rob : 0.0;
    return a;
  }

  bool uses_beta() const { return method == Method::kBeta || method == Method::kBetaForward; }
  bool uses_forward_noise() const {
    return method == Method::kForwardNoise || method == Method::kBetaForward;
  }
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double robustness_loss = 0.0;
  double val_accuracy = 0.0;
  double seconds = 0.0;
  // Forward-backward passes performed during the epoch.
  std::size_t gradient_passes = 0;
};

struct RunReport {
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  double best_val_accuracy = 0.0;
  double test_accuracy = 0.0;
};

template <typename T>
struct TrainResult {
  ParameterSet<T> best;
  RunReport report;
};

template <typename T>
struct BatchGradient {
  ParameterSet<T> gradient;
  double loss = 0.0;
  double robustness_loss = 0.0;
  std::size_t passes = 0;
};

// Random streams used by one training run, split by purpose so that
// enabling one mechanism never shifts another's draws.
struct TrainStreams {
  RngStream init, shuffle, attack, noise, dropout;

  explicit TrainStreams(std::uint64_t seed)
      : init(seed, 0), shuffle(seed, 1), attack(seed, 2), noise(seed, 3), dropout(seed, 4) {}
};

// The per-batch update direction for the configured method.
template <typename T>
BatchGradient<T> method_gradient(const ArchConfig& arch, const ParameterSet<T>& theta,
                                 const Array<T>& x, const Array<T>& y, const TrainConfig& cfg,
                                 TrainStreams& streams) {
  BatchGradient<T> out;
  ForwardOptions opt;
  if (cfg.method == Method::kDropout) {
    opt.dropout = cfg.dropout_p;
    opt.rng = &streams.dropout;
  }
  ForwardNoise noise;
  if (cfg.uses_forward_noise()) noise = {cfg.forward_noise_std, &streams.noise};

  if (cfg.method == Method::kAwp) {
    const AttackObjective<T> ce = [&y](Tape<T>& tape, Var q) {
      return ops::cross_entropy(tape, q, tape.constant(y));
    };
    const auto adv = pga_box_attack(arch, theta, x, ce, cfg.awp_gamma, cfg.attack.n_steps,
                                    cfg.attack.eps_init, streams.attack);
    // Gradient at the perturbed point, applied to the clean parameters.
    AttackConfig none = cfg.attack;
    none.beta_rob = 0.0;
    auto g = combined_gradient(arch, adv.theta_star, x, y, none, streams.attack);
    out.gradient = std::move(g.gradient);
    out.loss = g.natural_loss;
    out.passes = cfg.attack.n_steps + 1;
    return out;
  }
  const AttackConfig attack = cfg.robust_attack();
  auto g = combined_gradient(arch, theta, x, y, attack, streams.attack, noise, &opt);
  out.gradient = std::move(g.gradient);
  out.loss = g.natural_loss;
  out.robustness_loss = g.robustness_loss;
  out.passes = attack.beta_rob > 0.0 ? attack.n_steps + 1 : 1;
  return out;
}

using EpochCallback = std::function<void(const EpochRecord&)>;

// Runs cfg.epochs full epochs of mini-batch Adam and returns the parameters
// with the highest validation accuracy (earliest epoch on ties).
template <typename T>
TrainResult<T> train(const ArchConfig& arch, const Splits<T>& data, const TrainConfig& cfg,
                     std::optional<ParameterSet<T>> initial = std::nullopt,
                     const EpochCallback& on_epoch = {}) {
  cfg.validate();
  if (data.train.empty() || data.val.empty())
    throw std::invalid_argument("train: train and validation splits must be non-empty");
  data.train.validate("train split");
  data.val.validate("validation split");

  TrainStreams streams(cfg.seed);
  ParameterSet<T> theta = initial ? *initial : init_parameters<T>(arch, streams.init);
  AdamState<T> adam = AdamState<T>::like(theta);
  TrainResult<T> result{theta, {}};
  bool have_best = false;

  std::vector<std::size_t> order(data.train.size());
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[streams.shuffle.below(i)]);

    EpochRecord rec;
    rec.epoch = epoch;
    std::size_t batches = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size, ++batches) {
      const std::vector<std::size_t> rows(
          order.begin() + static_cast<std::ptrdiff_t>(begin),
          order.begin() + static_cast<std::ptrdiff_t>(std::min(begin + cfg.batch_size, order.size())));
      const auto x = data.train.gather(rows);
      const auto y = one_hot<T>(data.train.labels(rows), data.train.classes);
      auto g = method_gradient(arch, theta, x, y, cfg, streams);
      if (!std::isfinite(g.loss) || !std::isfinite(g.robustness_loss))
        throw std::runtime_error("training diverged: non-finite loss at epoch " +
                                 std::to_string(epoch) + ", batch " +
                                 std::to_string(batches + 1) + " (method " +
                                 to_string(cfg.method) + ", lr " +
                                 std::to_string(cfg.learning_rate) + ")");
      if (cfg.grad_clip > 0.0) clip_gradient_norm(g.gradient, cfg.grad_clip);
      adam_step(adam, theta, g.gradient, cfg.learning_rate);
      rec.train_loss += g.loss;
      rec.robustness_loss += g.robustness_loss;
      rec.gradient_passes += g.passes;
    }
    rec.train_loss /= static_cast<double>(batches);
    rec.robustness_loss /= static_cast<double>(batches);
    rec.val_accuracy = evaluate_accuracy(arch, theta, data.val);
    rec.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.report.history.push_back(rec);
    if (!have_best || rec.val_accuracy > result.report.best_val_accuracy) {
      have_best = true;
      result.best = theta;
      result.report.best_epoch = epoch;
      result.report.best_val_accuracy = rec.val_accuracy;
    }
    if (on_epoch) on_epoch(rec);
  }
  if (!data.test.empty()) result.report.test_accuracy = evaluate_accuracy(arch, result.best, data.test);
  return result;
}

// Learning-rate and clipping defaults per architecture.
inline TrainConfig default_train_config(const ArchConfig& arch) {
  TrainConfig cfg;
  if (is_srnn(arch)) cfg.grad_clip = 10.0;
  return cfg;
}

}  // namespace mmrt
