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
#include <utility>
#include <vector>

#include "json.hpp"
#include "mmrt/training/train.hpp"

namespace mmrt {

using Json = nlohmann::json;

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

Json to_json(const ArchConfig& arch);
ArchConfig arch_from_json(const Json& j);
Json to_json(const AttackConfig& cfg);
AttackConfig attack_from_json(const Json& j);
// The attack section is stored separately: `attack` is left at its default
// and the robustness weight lives in attack.beta_rob.
Json to_json(const TrainConfig& cfg);
TrainConfig train_from_json(const Json& j);

enum class Task { kFmnist, kSynthEcg, kSynthSpike };
std::string to_string(Task t);
Task parse_task(const std::string& s);

struct DataConfig {
  // Seeds the synthetic generators; independent of the training seed so that
  // several training runs share one dataset.
  std::uint64_t seed = 0;
  std::size_t n_train = 800;
  std::size_t n_val = 200;
  std::size_t n_test = 400;
  // synth_ecg: samples per sequence; synth_spike: time steps.
  std::size_t length = 60;
  // synth_spike only.
  std::size_t channels = 16;
  std::size_t classes = 4;
  // Multiplies sequence inputs so they act as currents of useful size.
  double current_scale = 1.0;
  // fmnist: max-pool factor applied to 28x28 images (1 or 2).
  std::size_t pool = 2;

  friend bool operator==(const DataConfig&, const DataConfig&) = default;
};

struct EvalConfig {
  std::vector<double> zetas = {0.0, 0.1, 0.2, 0.3, 0.5, 0.7};
  std::size_t n_samples = 20;
  std::vector<std::string> checkpoints;
  double landscape_zeta = 0.2;
  std::size_t n_trials = 5;
  std::size_t n_alphas = 41;
  std::vector<double> verify_zetas = {0.0, 1e-4, 1e-3, 1e-2};
  std::size_t histogram_bins = 40;
  // Caps the number of test examples used by evaluation commands; 0 = all.
  std::size_t max_examples = 0;

  friend bool operator==(const EvalConfig&, const EvalConfig&) = default;
};

struct ExperimentConfig {
  std::string preset = "ecg-srnn-desk-v1";
  Task task = Task::kSynthEcg;
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  std::string data_dir = "data";
  ArchConfig model = SrnnConfig{};
  TrainConfig train;
  DataConfig data;
  EvalConfig eval;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;

  // train.attack mirrors the top-level attack section, and train.beta_rob
  // its beta_rob.
  const AttackConfig& attack() const { return train.attack; }
};

Json to_json(const ExperimentConfig& cfg);
ExperimentConfig experiment_from_json(const Json& j);

std::vector<std::string> preset_names();
ExperimentConfig preset(const std::string& name);

// Applies "a.b=value" style overrides to a JSON document. Values are parsed
// as JSON when possible and taken as strings otherwise.
void apply_override(Json& j, const std::string& dotted_path, const std::string& value);

// Preset (named in the file or overrides, default otherwise), then file
// contents, then overrides in order.
ExperimentConfig load_experiment(const std::filesystem::path* file,
                                 const std::vector<std::pair<std::string, std::string>>& overrides);

// Canonical serialisation and its hash; identical for semantically equal
// configs. The output directory is not part of an experiment's identity.
std::string canonical_dump(const ExperimentConfig& cfg);
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace mmrt
