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

#include <cstdint>
#include <filesystem>
#include <string>

#include "mmrt/core/rng.hpp"
#include "mmrt/io/config.hpp"
#include "mmrt/io/idx.hpp"
#include "mmrt/training/dataset.hpp"

namespace mmrt {

inline constexpr std::size_t kEcgClasses = 4;
enum class EcgClass : std::size_t { kNormal = 0, kPremature = 1, kMissing = 2, kNoisyBaseline = 3 };

// Periodic pulse trains, shape [n, length, 1]. Labels cycle through the four
// classes before shuffling, so n divisible by 4 gives an exact balance.
Dataset<double> synth_ecg(std::size_t n_sequences, std::size_t length, RngStream& rng,
                          double current_scale = 1.0);

// Poisson spike rasters of shape [n, steps, channels] whose firing-rate
// pattern over channel groups and time halves identifies the class.
Dataset<double> synth_spike(std::size_t n_sequences, std::size_t steps, std::size_t channels,
                            std::size_t classes, RngStream& rng, double current_scale = 1.0);

// Standard FMNIST file names inside a data directory.
struct FmnistFiles {
  std::filesystem::path train_images, train_labels, test_images, test_labels;
  explicit FmnistFiles(const std::filesystem::path& dir);
};

// Synthetic 28x28 clothing silhouettes in 10 classes, written as IDX files
// with the standard names. Stand-in when the real dataset is unavailable.
void write_synthetic_fmnist(const std::filesystem::path& dir, std::size_t n_train,
                            std::size_t n_test, std::uint64_t seed);
IdxData synthetic_fmnist_images(std::size_t n, std::uint64_t seed, std::vector<std::uint8_t>& labels);

// Images are max-pooled by `pool`, scaled to [0,1] and flattened to
// [n, (28/pool)^2]. Train and val are consecutive slices of the training file.
Splits<double> load_fmnist(const std::filesystem::path& dir, const DataConfig& cfg);

// Dataset for an experiment config, built from `seed` for synthetic tasks.
Splits<double> make_splits(const ExperimentConfig& cfg);

// Stable fingerprint of a dataset's inputs and labels.
std::string dataset_hash(const Dataset<double>& d);

}  // namespace mmrt
