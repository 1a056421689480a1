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

#include "mmrt/io/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>

#include "mmrt/io/files.hpp"

namespace mmrt {

namespace {

void shuffle_rows(Dataset<double>& d, RngStream& rng) {
  std::vector<std::size_t> order(d.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  d = d.subset(order);
}

// Narrow QRS-like bump centred at `c`.
double pulse(double t, double c, double width) {
  const double z = (t - c) / width;
  return std::exp(-0.5 * z * z);
}

}  // namespace

Dataset<double> synth_ecg(std::size_t n_sequences, std::size_t length, RngStream& rng,
                          double current_scale) {
  if (length < 50) throw std::invalid_argument("synth_ecg: length must be >= 50");
  Dataset<double> d{Array<double>(Shape{n_sequences, length, 1}), {}, kEcgClasses};
  for (std::size_t n = 0; n < n_sequences; ++n) {
    const auto label = static_cast<EcgClass>(n % kEcgClasses);
    d.y.push_back(n % kEcgClasses);
    // Narrow period and onset ranges keep the beat count of unedited
    // sequences constant, so a dropped beat is not confused with a slow
    // rhythm.
    const double period = 0.16 * length + 0.02 * length * rng.uniform();
    const double phase = 2.0 + 2.0 * rng.uniform();
    const double amp = 0.9 + 0.2 * rng.uniform();
    std::vector<double> beats;
    for (double c = phase; c < length + 3.0; c += period) beats.push_back(c);
    // Ectopic premature beats arrive early and are wider and taller.
    std::size_t ectopic = beats.size();
    // Edit a beat well inside the sequence.
    std::size_t target = beats.size() / 2;
    if (target + 1 >= beats.size()) target = beats.size() - 2;
    if (label == EcgClass::kPremature) {
      const double shift = (0.35 + 0.15 * rng.uniform()) * period;
      for (std::size_t b = target; b < beats.size(); ++b) beats[b] -= shift;
      ectopic = target;
    } else if (label == EcgClass::kMissing) {
      beats.erase(beats.begin() + static_cast<std::ptrdiff_t>(target));
    }
    const bool noisy = label == EcgClass::kNoisyBaseline;
    const double wander_amp = noisy ? 0.45 + 0.2 * rng.uniform() : 0.0;
    const double wander_freq = 2.0 * std::numbers::pi / (15.0 + 10.0 * rng.uniform());
    const double wander_phase = 2.0 * std::numbers::pi * rng.uniform();
    const double noise = noisy ? 0.15 : 0.03;
    for (std::size_t t = 0; t < length; ++t) {
      double v = 0.0;
      for (std::size_t b = 0; b < beats.size(); ++b)
        v += b == ectopic ? 1.4 * amp * pulse(static_cast<double>(t), beats[b], 1.8)
                          : amp * pulse(static_cast<double>(t), beats[b], 0.8);
      v += wander_amp * (1.0 + std::sin(wander_freq * t + wander_phase)) * 0.5;
      v += noise * rng.normal();
      d.x[n * length + t] = current_scale * v;
    }
  }
  shuffle_rows(d, rng);
  return d;
}

Dataset<double> synth_spike(std::size_t n_sequences, std::size_t steps, std::size_t channels,
                            std::size_t classes, RngStream& rng, double current_scale) {
  if (classes < 2 || channels < classes || steps < 2)
    throw std::invalid_argument("synth_spike: need classes >= 2, channels >= classes, steps >= 2");
  Dataset<double> d{Array<double>(Shape{n_sequences, steps, channels}), {}, classes};
  const std::size_t group = channels / classes;
  for (std::size_t n = 0; n < n_sequences; ++n) {
    const std::size_t label = n % classes;
    d.y.push_back(label);
    // Class k drives channel group k early and group k+1 late. The switch
    // time varies, and the weak rate contrast keeps a single step from
    // giving the class away.
    const std::size_t early = label, late = (label + 1) % classes;
    const auto switch_at = static_cast<std::size_t>((0.35 + 0.3 * rng.uniform()) * steps);
    for (std::size_t t = 0; t < steps; ++t) {
      const std::size_t active = t < switch_at ? early : late;
      for (std::size_t c = 0; c < channels; ++c) {
        const bool hot = c / group == active;
        const double rate = hot ? 0.2 : 0.1;
        d.x[(n * steps + t) * channels + c] = rng.uniform() < rate ? current_scale : 0.0;
      }
    }
  }
  shuffle_rows(d, rng);
  return d;
}

FmnistFiles::FmnistFiles(const std::filesystem::path& dir)
    : train_images(dir / "train-images-idx3-ubyte"),
      train_labels(dir / "train-labels-idx1-ubyte"),
      test_images(dir / "t10k-images-idx3-ubyte"),
      test_labels(dir / "t10k-labels-idx1-ubyte") {}

namespace {

constexpr std::size_t kSide = 28;
constexpr std::size_t kFmnistClasses = 10;

bool band(double x, double lo, double hi) { return x >= lo && x <= hi; }

// Membership of garment `label` at normalised coordinates: u is the signed
// horizontal offset from the centre line, v runs from 0 (top) to 1 (bottom).
// `style` in [0,1) varies sleeve length, hem width and similar details.
double silhouette(std::size_t label, double u, double v, double style) {
  const double a = std::abs(u);
  switch (label) {
    case 0: {  // t-shirt: torso plus short sleeves
      const bool torso = a < 0.22 && band(v, 0.15, 0.9);
      const double sleeve_end = 0.34 + 0.06 * style;
      const bool sleeve = a < 0.42 && band(v, 0.15 + 0.35 * (a - 0.22), sleeve_end);
      return torso || sleeve ? 1.0 : 0.0;
    }
    case 1: {  // trouser: waistband and two legs
      const bool waist = a < 0.2 && band(v, 0.06, 0.2);
      const bool legs = band(a, 0.03 + 0.02 * style, 0.2 + 0.03 * v) && band(v, 0.06, 0.95);
      return waist || legs ? 1.0 : 0.0;
    }
    case 2: {  // pullover: torso plus long sleeves
      const bool torso = a < 0.24 && band(v, 0.12, 0.86);
      const bool sleeve = band(a, 0.24, 0.37 + 0.03 * style) && band(v, 0.14 + 0.3 * (a - 0.24), 0.84);
      return torso || sleeve ? 0.9 : 0.0;
    }
    case 3: {  // dress: flared trapezoid
      const double half = 0.1 + (0.22 + 0.08 * style) * v;
      return a < half && band(v, 0.06, 0.95) ? 1.0 : 0.0;
    }
    case 4: {  // coat: long wide body with a darker front opening
      const bool torso = a < 0.27 && band(v, 0.08, 0.95);
      const bool sleeve = band(a, 0.27, 0.42) && band(v, 0.1 + 0.3 * (a - 0.27), 0.9);
      if (!(torso || sleeve)) return 0.0;
      return a < 0.02 + 0.01 * style ? 0.35 : 0.85;
    }
    case 5: {  // sandal: low sole with straps
      const bool sole = band(v, 0.74, 0.8) && a < 0.42;
      const bool straps = band(v, 0.5 + 0.1 * (u + 0.42), 0.74) && a < 0.38 &&
                          std::fmod((u + 1.0) * (6.0 + 2.0 * style), 1.0) < 0.45;
      return sole || straps ? 0.9 : 0.0;
    }
    case 6: {  // shirt: torso, slim long sleeves, collar and button line
      const bool torso = a < 0.21 && band(v, 0.13, 0.9);
      const bool sleeve = band(a, 0.21, 0.34) && band(v, 0.15 + 0.35 * (a - 0.21), 0.8 - 0.1 * style);
      if (!(torso || sleeve)) return 0.0;
      if (a < 0.015 && std::fmod(v * 12.0, 1.0) < 0.5) return 0.3;
      if (band(v, 0.13, 0.2) && a < 0.08) return 0.45;
      return 0.75;
    }
    case 7: {  // sneaker: low shoe, taller at the heel
      const double top = 0.6 - 0.12 * (0.42 - u) / 0.84 - 0.04 * style;
      const bool body = a < 0.44 && band(v, top, 0.78);
      const bool sole = a < 0.45 && band(v, 0.78, 0.83);
      return body ? 0.8 : sole ? 1.0 : 0.0;
    }
    case 8: {  // bag: box with a handle arc
      const bool box = a < 0.36 && band(v, 0.38, 0.9);
      const double r = std::hypot(u, (v - 0.38) * 1.3);
      const bool handle = v < 0.38 && band(r, 0.16 + 0.04 * style, 0.22 + 0.04 * style);
      return box || handle ? 0.85 : 0.0;
    }
    default: {  // ankle boot: shaft plus forward foot
      const bool shaft = band(u, -0.3, 0.05) && band(v, 0.15, 0.82);
      const bool foot = band(u, -0.3, 0.42) && band(v, 0.55 + 0.05 * style, 0.82);
      const bool heel = band(u, -0.3, -0.12) && band(v, 0.82, 0.88);
      return shaft || foot || heel ? 0.9 : 0.0;
    }
  }
}

}  // namespace

IdxData synthetic_fmnist_images(std::size_t n, std::uint64_t seed, std::vector<std::uint8_t>& labels) {
  RngStream rng(seed, 0x66617368);
  IdxData images{Shape{n, kSide, kSide}, std::vector<std::uint8_t>(n * kSide * kSide)};
  labels.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto label = static_cast<std::size_t>(rng.below(kFmnistClasses));
    labels[i] = static_cast<std::uint8_t>(label);
    const double sx = 0.8 + 0.3 * rng.uniform(), sy = 0.85 + 0.25 * rng.uniform();
    const double dx = 0.08 * (rng.uniform() - 0.5), dy = 0.08 * (rng.uniform() - 0.5);
    const double shear = 0.2 * (rng.uniform() - 0.5);
    const double style = rng.uniform();
    const double brightness = 110.0 + 145.0 * rng.uniform();
    const double gradient = 0.4 * (rng.uniform() - 0.5);
    for (std::size_t r = 0; r < kSide; ++r) {
      for (std::size_t c = 0; c < kSide; ++c) {
        const double y = (r + 0.5) / kSide, x = (c + 0.5) / kSide - 0.5;
        const double v = (y - 0.5 - dy) / sy + 0.5;
        const double u = (x - dx - shear * (y - 0.5)) / sx;
        double p = silhouette(label, u, v, style);
        if (p > 0) p *= 1.0 + gradient * (v - 0.5) + 0.12 * rng.normal();
        p = p * brightness + 6.0 * std::abs(rng.normal());
        images.bytes[(i * kSide + r) * kSide + c] =
            static_cast<std::uint8_t>(std::clamp(std::lround(p), 0L, 255L));
      }
    }
  }
  return images;
}

void write_synthetic_fmnist(const std::filesystem::path& dir, std::size_t n_train,
                            std::size_t n_test, std::uint64_t seed) {
  const FmnistFiles files(dir);
  std::vector<std::uint8_t> labels;
  write_idx(files.train_images, synthetic_fmnist_images(n_train, seed, labels));
  write_idx(files.train_labels, IdxData{Shape{n_train}, labels});
  write_idx(files.test_images, synthetic_fmnist_images(n_test, seed + 1, labels));
  write_idx(files.test_labels, IdxData{Shape{n_test}, labels});
}

namespace {

Dataset<double> fmnist_slice(const IdxData& images, const IdxData& labels, std::size_t begin,
                             std::size_t count, std::size_t pool) {
  const std::size_t side = images.shape[1], out_side = side / pool;
  const std::size_t px = out_side * out_side;
  Dataset<double> d{Array<double>(Shape{count, px}), {}, kFmnistClasses};
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint8_t* img = images.bytes.data() + (begin + i) * side * side;
    for (std::size_t r = 0; r < out_side; ++r)
      for (std::size_t c = 0; c < out_side; ++c) {
        std::uint8_t m = 0;
        for (std::size_t a = 0; a < pool; ++a)
          for (std::size_t b = 0; b < pool; ++b)
            m = std::max(m, img[(r * pool + a) * side + c * pool + b]);
        d.x[i * px + r * out_side + c] = m / 255.0;
      }
    const auto label = labels.bytes[begin + i];
    if (label >= kFmnistClasses)
      throw IdxError("fmnist: label " + std::to_string(label) + " outside 0..9");
    d.y.push_back(label);
  }
  return d;
}

void check_pair(const IdxData& images, const IdxData& labels, const std::string& which) {
  if (images.shape.size() != 3 || images.shape[1] != kSide || images.shape[2] != kSide)
    throw IdxError("fmnist: " + which + " images have shape " + shape_string(images.shape) +
                   ", expected [n,28,28]");
  if (labels.shape.size() != 1 || labels.shape[0] != images.shape[0])
    throw IdxError("fmnist: " + which + " labels do not match the image count");
}

}  // namespace

Splits<double> load_fmnist(const std::filesystem::path& dir, const DataConfig& cfg) {
  const FmnistFiles files(dir);
  for (const auto* p : {&files.train_images, &files.train_labels, &files.test_images, &files.test_labels})
    if (!std::filesystem::exists(*p))
      throw std::runtime_error("fmnist: missing " + p->string() +
                               " (run `mmrt synth-data` or place the IDX files there)");
  const IdxData train_x = read_idx(files.train_images), train_y = read_idx(files.train_labels);
  const IdxData test_x = read_idx(files.test_images), test_y = read_idx(files.test_labels);
  check_pair(train_x, train_y, "train");
  check_pair(test_x, test_y, "test");
  if (cfg.n_train + cfg.n_val > train_x.shape[0] || cfg.n_test > test_x.shape[0])
    throw std::runtime_error("fmnist: requested " + std::to_string(cfg.n_train) + "+" +
                             std::to_string(cfg.n_val) + " train/val and " +
                             std::to_string(cfg.n_test) + " test examples, files hold " +
                             std::to_string(train_x.shape[0]) + " and " +
                             std::to_string(test_x.shape[0]));
  return {fmnist_slice(train_x, train_y, 0, cfg.n_train, cfg.pool),
          fmnist_slice(train_x, train_y, cfg.n_train, cfg.n_val, cfg.pool),
          fmnist_slice(test_x, test_y, 0, cfg.n_test, cfg.pool)};
}

Splits<double> make_splits(const ExperimentConfig& cfg) {
  const DataConfig& d = cfg.data;
  if (cfg.task == Task::kFmnist) return load_fmnist(cfg.data_dir, d);
  RngStream root(d.seed, 0x64617461);
  RngStream train_rng = root.child(0), val_rng = root.child(1), test_rng = root.child(2);
  auto make = [&](std::size_t n, RngStream& rng) {
    return cfg.task == Task::kSynthEcg
               ? synth_ecg(n, d.length, rng, d.current_scale)
               : synth_spike(n, d.length, d.channels, d.classes, rng, d.current_scale);
  };
  return {make(d.n_train, train_rng), make(d.n_val, val_rng), make(d.n_test, test_rng)};
}

std::string dataset_hash(const Dataset<double>& d) {
  std::vector<std::uint8_t> bytes(d.x.size() * sizeof(double));
  std::memcpy(bytes.data(), d.x.data(), bytes.size());
  for (auto y : d.y) bytes.push_back(static_cast<std::uint8_t>(y));
  return hex64(fnv1a64(bytes));
}

}  // namespace mmrt
