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
#include <cmath>
#include <stdexcept>
#include <vector>

#include "mmrt/adversary/adversary.hpp"
#include "mmrt/mismatch/mismatch.hpp"
#include "mmrt/training/dataset.hpp"

namespace mmrt {

struct RobustnessRow {
  double zeta = 0.0;
  double mean = 0.0;
  double std = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::vector<double> accuracies;
};

struct RobustnessTable {
  std::vector<RobustnessRow> rows;
};

inline RobustnessRow summarize(double zeta, std::vector<double> acc) {
  RobustnessRow row;
  row.zeta = zeta;
  if (acc.empty()) return row;
  row.min = *std::min_element(acc.begin(), acc.end());
  row.max = *std::max_element(acc.begin(), acc.end());
  if (row.min == row.max) {
    row.mean = row.min;
  } else {
    double sum = 0.0;
    for (double a : acc) sum += a;
    row.mean = std::clamp(sum / static_cast<double>(acc.size()), row.min, row.max);
    double sq = 0.0;
    for (double a : acc) sq += (a - row.mean) * (a - row.mean);
    row.std = acc.size() > 1 ? std::sqrt(sq / static_cast<double>(acc.size() - 1)) : 0.0;
  }
  row.accuracies = std::move(acc);
  return row;
}

// Stream for one (zeta, checkpoint, sample) cell, independent of the order
// in which cells are evaluated.
inline RngStream cell_stream(std::uint64_t seed, std::size_t zeta_index, std::size_t checkpoint,
                             std::size_t sample) {
  return RngStream(seed, 0x6d69736dULL).child((zeta_index << 40) ^ (checkpoint << 20) ^ sample);
}

// Test accuracy under n_samples mismatch draws per checkpoint and zeta.
template <typename T>
RobustnessTable mismatch_eval(const ArchConfig& arch, const std::vector<ParameterSet<T>>& checkpoints,
                              const std::vector<double>& zetas, std::size_t n_samples,
                              const Dataset<T>& test, std::uint64_t seed) {
  if (n_samples < 1) throw std::invalid_argument("mismatch_eval: n_samples must be >= 1");
  if (test.empty()) throw std::invalid_argument("mismatch_eval: empty test set");
  if (checkpoints.empty()) throw std::invalid_argument("mismatch_eval: no checkpoints");
  RobustnessTable table;
  for (std::size_t z = 0; z < zetas.size(); ++z) {
    std::vector<double> acc;
    for (std::size_t c = 0; c < checkpoints.size(); ++c)
      for (std::size_t s = 0; s < n_samples; ++s) {
        RngStream rng = cell_stream(seed, z, c, s);
        acc.push_back(evaluate_accuracy(arch, sample_mismatch(checkpoints[c], zetas[z], rng), test));
      }
    table.rows.push_back(summarize(zetas[z], std::move(acc)));
  }
  return table;
}

struct AttackPoint {
  double zeta = 0.0;
  double accuracy = 0.0;
  // Mean KL between nominal and attacked predictions.
  double kl = 0.0;
};

enum class AttackObjectiveKind { kCrossEntropy, kKl };

// Accuracy after a fresh weight attack on every chunk of the test set.
// Cross-entropy attacks use the labels; KL attacks only the nominal
// predictions.
template <typename T>
std::vector<AttackPoint> attack_eval(const ArchConfig& arch, const ParameterSet<T>& theta,
                                     const std::vector<double>& zetas, const AttackConfig& attack,
                                     const Dataset<T>& test, AttackObjectiveKind kind,
                                     std::uint64_t seed, std::size_t chunk = 256) {
  if (test.empty()) throw std::invalid_argument("attack_eval: empty test set");
  std::vector<AttackPoint> out;
  for (std::size_t z = 0; z < zetas.size(); ++z) {
    require_zeta(zetas[z], "attack_eval");
    AttackConfig cfg = attack;
    cfg.zeta = zetas[z];
    std::size_t hits = 0;
    double kl = 0.0;
    for (std::size_t begin = 0, part = 0; begin < test.size(); begin += chunk, ++part) {
      std::vector<std::size_t> rows;
      for (std::size_t i = begin; i < std::min(begin + chunk, test.size()); ++i) rows.push_back(i);
      const auto x = test.gather(rows);
      const auto labels = test.labels(rows);
      const auto y = one_hot<T>(labels, test.classes);
      const auto nominal = probabilities(arch, theta, x);
      RngStream rng = cell_stream(seed, z, 0, part);
      AttackResult<T> res;
      if (kind == AttackObjectiveKind::kKl) {
        res = pga_attack(arch, theta, x, cfg, rng);
      } else {
        const AttackObjective<T> ce = [&y](Tape<T>& tape, Var q) {
          return ops::cross_entropy(tape, q, tape.constant(y));
        };
        res = pga_box_attack(arch, theta, x, ce, cfg.zeta, cfg.n_steps, cfg.eps_init, rng);
      }
      const auto attacked = probabilities(arch, res.theta_star, x);
      const auto pred = argmax_rows(attacked);
      for (std::size_t i = 0; i < rows.size(); ++i) hits += pred[i] == labels[i];
      kl += robustness_loss(nominal, attacked) * static_cast<double>(rows.size());
    }
    out.push_back({zetas[z], static_cast<double>(hits) / static_cast<double>(test.size()),
                   kl / static_cast<double>(test.size())});
  }
  return out;
}

template <typename T>
std::vector<AttackPoint> task_pga_eval(const ArchConfig& arch, const ParameterSet<T>& theta,
                                       const std::vector<double>& zetas, const AttackConfig& attack,
                                       const Dataset<T>& test, std::uint64_t seed) {
  return attack_eval(arch, theta, zetas, attack, test, AttackObjectiveKind::kCrossEntropy, seed);
}

template <typename T>
std::vector<AttackPoint> kl_pga_eval(const ArchConfig& arch, const ParameterSet<T>& theta,
                                     const std::vector<double>& zetas, const AttackConfig& attack,
                                     const Dataset<T>& test, std::uint64_t seed) {
  return attack_eval(arch, theta, zetas, attack, test, AttackObjectiveKind::kKl, seed);
}

struct LandscapeGrid {
  double zeta = 0.0;
  std::vector<double> alphas;
  // losses[trial][alpha]
  std::vector<std::vector<double>> losses;
  std::vector<std::uint64_t> trial_streams;

  // Mean over trials of the average loss at alpha = -1 and +1 minus the
  // loss at alpha = 0.
  double flatness() const {
    const auto at = [&](double a) {
      std::size_t best = 0;
      for (std::size_t i = 1; i < alphas.size(); ++i)
        if (std::abs(alphas[i] - a) < std::abs(alphas[best] - a)) best = i;
      return best;
    };
    const std::size_t lo = at(-1.0), mid = at(0.0), hi = at(1.0);
    double sum = 0.0;
    for (const auto& row : losses) sum += 0.5 * (row[lo] + row[hi]) - row[mid];
    return losses.empty() ? 0.0 : sum / static_cast<double>(losses.size());
  }
};

// Evenly spaced alphas on [-2, 2], exactly symmetric about zero.
inline std::vector<double> landscape_alphas(std::size_t n) {
  if (n < 3 || n % 2 == 0) throw std::invalid_argument("landscape: n_alphas must be odd and >= 3");
  std::vector<double> a(n);
  const double half = static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double k = 2.0 * static_cast<double>(i) - half;
    a[i] = 2.0 * k / half;
  }
  return a;
}

template <typename T>
double test_loss(const ArchConfig& arch, const ParameterSet<T>& params, const Dataset<T>& test) {
  const auto p = batched_probabilities(arch, params, test);
  Tape<T> tape;
  const auto y = one_hot<T>(test.y, test.classes);
  return static_cast<double>(
      tape.value(ops::cross_entropy(tape, tape.constant(p), tape.constant(y)))[0]);
}

template <typename T>
ParameterSet<T> along(const ParameterSet<T>& theta, const ParameterSet<T>& v, double alpha) {
  auto out = theta;
  const T a = static_cast<T>(alpha);
  for (std::size_t k = 0; k < theta.size(); ++k)
    for (std::size_t i = 0; i < theta[k].value.size(); ++i)
      out[k].value[i] = theta[k].value[i] + a * v[k].value[i];
  return out;
}

// Cross-entropy along random proportional directions theta + alpha v.
template <typename T>
LandscapeGrid landscape_sweep(const ArchConfig& arch, const ParameterSet<T>& theta,
                              const Dataset<T>& test, double zeta, std::size_t n_trials,
                              std::size_t n_alphas, std::uint64_t seed) {
  LandscapeGrid grid;
  grid.zeta = zeta;
  grid.alphas = landscape_alphas(n_alphas);
  for (std::size_t t = 0; t < n_trials; ++t) {
    RngStream rng = cell_stream(seed, 0, 1, t);
    grid.trial_streams.push_back(rng.stream());
    const auto v = proportional_direction(theta, zeta, rng);
    std::vector<double> row;
    // alpha = 0 goes through the same path; theta + 0 v reproduces theta
    // bit for bit, so that column equals the nominal loss exactly.
    for (double a : grid.alphas) row.push_back(test_loss(arch, along(theta, v, a), test));
    grid.losses.push_back(std::move(row));
  }
  return grid;
}

struct MembraneHistogram {
  double lo = -1.0, hi = 2.0;
  std::vector<std::size_t> counts;
  std::size_t total = 0;
  // Fraction of samples with |V/B - 1| < 0.1.
  double near_threshold = 0.0;

  double bin_width() const { return (hi - lo) / static_cast<double>(counts.size()); }
  std::size_t bin_of(double r) const {
    const double pos = std::floor((r - lo) / bin_width());
    if (!(pos >= 0.0)) return 0;
    return std::min(static_cast<std::size_t>(pos), counts.size() - 1);
  }
};

// Histogram of V/B over every step, neuron and example, with values outside
// [lo, hi) folded into the edge bins.
template <typename T>
MembraneHistogram membrane_histogram(const SrnnConfig& cfg, const ParameterSet<T>& theta,
                                     const Array<T>& batch, std::size_t n_bins, double lo = -1.0,
                                     double hi = 2.0) {
  if (n_bins < 10) throw std::invalid_argument("membrane_histogram: n_bins must be >= 10");
  if (!(hi > lo)) throw std::invalid_argument("membrane_histogram: empty range");
  MembraneHistogram h{lo, hi, std::vector<std::size_t>(n_bins, 0), 0, 0.0};
  Tape<T> tape;
  std::vector<std::pair<Var, Var>> membrane;
  ForwardOptions opt;
  opt.membrane = &membrane;
  cfg.logits(tape, bind_parameters(tape, theta, false), tape.constant(batch), &opt);
  std::size_t near = 0;
  for (const auto& [v, b] : membrane) {
    const auto& vv = tape.value(v);
    const auto& bb = tape.value(b);
    for (std::size_t i = 0; i < vv.size(); ++i) {
      const double r = static_cast<double>(vv[i]) / static_cast<double>(bb[i]);
      ++h.counts[h.bin_of(r)];
      near += std::abs(r - 1.0) < 0.1;
      ++h.total;
    }
  }
  h.near_threshold = h.total ? static_cast<double>(near) / static_cast<double>(h.total) : 0.0;
  return h;
}

}  // namespace mmrt
