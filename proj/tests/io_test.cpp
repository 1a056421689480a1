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

#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "mmrt/io/checkpoint.hpp"
#include "mmrt/io/config.hpp"
#include "mmrt/io/datasets.hpp"
#include "mmrt/io/files.hpp"
#include "mmrt/io/idx.hpp"
#include "mmrt/io/report.hpp"

using namespace mmrt;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mmrt_io_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string first_line(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

template <typename F>
std::string error_of(F&& f) {
  try {
    f();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

Checkpoint<double> sample_checkpoint() {
  RngStream rng(3, 0);
  const ArchConfig arch = MlpConfig{6, {5}, 3};
  Checkpoint<double> c{arch, {{"epoch", 4}, {"val_accuracy", 0.75}}, init_parameters<double>(arch, rng)};
  // Values that expose byte-order and rounding mistakes.
  c.params[1].value[0] = -0.0;
  c.params[1].value[1] = 5e-324;
  c.params[1].value[2] = 1.0 / 3.0;
  return c;
}

}  // namespace

TEST_CASE("idx golden bytes decode to a 2x3 array") {
  const std::vector<std::uint8_t> bytes{0, 0, 8, 2, 0, 0, 0, 2, 0, 0, 0, 3, 1, 2, 3, 4, 5, 6};
  const auto d = parse_idx(bytes);
  CHECK(d.shape == Shape{2, 3});
  const auto a = d.to_array<double>();
  CHECK(a(0, 0) == 1);
  CHECK(a(0, 2) == 3);
  CHECK(a(1, 0) == 4);
  CHECK(a(1, 2) == 6);
  CHECK(encode_idx(d) == bytes);
  CHECK(d.to_array<float>(1.0 / 255)[5] == doctest::Approx(6.0 / 255));
}

TEST_CASE("idx rejects malformed payloads") {
  std::vector<std::uint8_t> bytes{0, 0, 8, 2, 0, 0, 0, 2, 0, 0, 0, 3, 1, 2, 3, 4, 5, 6};
  auto bad = bytes;
  bad[2] = 0x09;
  CHECK(error_of([&] { parse_idx(bad); }).find("unsupported element type") != std::string::npos);
  bad = bytes;
  bad.pop_back();
  CHECK(error_of([&] { parse_idx(bad); }).find("truncated") != std::string::npos);
  bad = bytes;
  bad[0] = 1;
  CHECK(error_of([&] { parse_idx(bad); }).find("bad magic") != std::string::npos);
  bad = bytes;
  bad[3] = 4;
  CHECK(error_of([&] { parse_idx(bad); }).find("rank 4 outside 1..3") != std::string::npos);
  bad = bytes;
  bad[3] = 0;
  CHECK(error_of([&] { parse_idx(bad); }).find("rank 0") != std::string::npos);
  CHECK(error_of([&] { parse_idx(std::vector<std::uint8_t>{0, 0}); }).find("truncated") != std::string::npos);
}

TEST_CASE("idx files round trip through disk") {
  const auto dir = scratch("idx");
  const IdxData d{Shape{4}, {9, 8, 7, 255}};
  write_idx(dir / "labels", d);
  const auto back = read_idx(dir / "labels");
  CHECK(back.shape == d.shape);
  CHECK(back.bytes == d.bytes);
  CHECK_THROWS_AS(read_idx(dir / "missing"), std::runtime_error);
}

TEST_CASE("checkpoint round trip is bit-identical") {
  const auto dir = scratch("ckpt");
  const auto c = sample_checkpoint();
  save_checkpoint(dir / "a.mmrt", c);
  const auto back = load_checkpoint<double>(dir / "a.mmrt");
  CHECK(back.arch == c.arch);
  CHECK(back.metadata == c.metadata);
  CHECK(back.params == c.params);
  CHECK(std::signbit(back.params[1].value[0]));
  // Saving the loaded checkpoint reproduces the file byte for byte.
  save_checkpoint(dir / "b.mmrt", back);
  CHECK(read_file(dir / "a.mmrt") == read_file(dir / "b.mmrt"));
  CHECK(!fs::exists(dir / "a.mmrt.tmp"));

  RngStream rng(1, 0);
  SrnnConfig s;
  s.inputs = 2;
  s.hidden = 5;
  const Checkpoint<float> f{s, Json::object(), init_parameters<float>(s, rng)};
  save_checkpoint(dir / "f.mmrt", f);
  CHECK(load_checkpoint<float>(dir / "f.mmrt").params == f.params);
  CHECK(error_of([&] { load_checkpoint<double>(dir / "f.mmrt"); }).find("precision mismatch") !=
        std::string::npos);
}

TEST_CASE("checkpoint header layout") {
  const auto bytes = encode_checkpoint(sample_checkpoint());
  REQUIRE(bytes.size() > 10);
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "MMRT");
  CHECK(bytes[4] == 0);
  CHECK(bytes[5] == 1);
  const std::size_t arch_len = (std::size_t{bytes[6]} << 24) | (bytes[7] << 16) | (bytes[8] << 8) | bytes[9];
  const auto arch = Json::parse(std::string(bytes.begin() + 10, bytes.begin() + 10 + arch_len));
  CHECK(arch["type"] == "mlp");
}

TEST_CASE("checkpoint loading rejects damaged files") {
  const auto good = encode_checkpoint(sample_checkpoint());
  auto bad = good;
  bad[0] ^= 0xff;
  CHECK(error_of([&] { checkpoint_from_bytes<double>(bad); }).find("bad magic") != std::string::npos);
  bad = good;
  bad[5] += 1;
  CHECK(error_of([&] { checkpoint_from_bytes<double>(bad); }).find("unsupported version") !=
        std::string::npos);
  bad = good;
  bad.pop_back();
  CHECK(error_of([&] { checkpoint_from_bytes<double>(bad); }).find("truncated") != std::string::npos);
  bad = good;
  bad.push_back(0);
  CHECK(error_of([&] { checkpoint_from_bytes<double>(bad); }).find("trailing") != std::string::npos);

  // An array whose shape disagrees with the architecture.
  auto raw = decode_checkpoint(good);
  raw.arrays[0].shape = {5, 6};
  CHECK(error_of([&] { checkpoint_from_bytes<double>(encode_checkpoint(raw)); }).find("size mismatch") !=
        std::string::npos);
  raw = decode_checkpoint(good);
  raw.arrays.pop_back();
  CHECK(error_of([&] { checkpoint_from_bytes<double>(encode_checkpoint(raw)); }).find("size mismatch") !=
        std::string::npos);
}

TEST_CASE("csv headers match the golden files") {
  const fs::path golden = MMRT_GOLDEN_DIR;
  RobustnessTable table;
  table.rows.push_back(summarize(0.0, {0.5, 0.7}));
  table.rows.push_back(summarize(0.1, {0.25, 0.25}));
  LandscapeGrid grid{0.2, {-1, 0, 1}, {{1, 0.5, 1.5}}, {7}};
  RunReport report;
  report.history.push_back({1, 0.9, 0.1, 0.5, 2.0, 10});
  MembraneHistogram h{-1, 2, std::vector<std::size_t>(10, 1), 10, 0.1};

  const std::vector<std::pair<std::string, CsvTable>> tables = {
      {"mismatch.csv", mismatch_csv(table)},
      {"mismatch_samples.csv", mismatch_samples_csv(table)},
      {"attack.csv", attack_csv({{0.1, 0.4, 0.2}})},
      {"landscape.csv", landscape_csv(grid)},
      {"history.csv", history_csv(report)},
      {"membrane_hist.csv", histogram_csv(h)},
  };
  for (const auto& [name, t] : tables) {
    CAPTURE(name);
    std::istringstream in(t.str());
    std::string header;
    std::getline(in, header);
    CHECK(header == first_line(golden / name));
  }
  CHECK(mismatch_csv(table).str() == "zeta,mean,std,min\n0,0.6,0.14142135623730948,0.5\n0.1,0.25,0,0.25\n");
  CHECK(landscape_csv(grid).rows() == 3);
}

TEST_CASE("numbers format with a dot and round trip") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(1e-4) == "1e-04");
  CHECK(format_number(-2.5) == "-2.5");
  CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
  CHECK(format_number(std::size_t{12}) == "12");
}

TEST_CASE("svg plot is well-formed") {
  const auto svg = svg_line_plot("a < b", "x", "y", {{"s", {0, 1, 2}, {1, 0.5, 0.25}}});
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("a &lt; b") != std::string::npos);
  CHECK(svg.find("<polyline") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK_THROWS(svg_line_plot("t", "x", "y", {{"bad", {0, 1}, {1}}}));
}

TEST_CASE("config round trip preserves the hash") {
  for (const auto& name : preset_names()) {
    CAPTURE(name);
    const auto cfg = preset(name);
    const auto back = experiment_from_json(Json::parse(to_json(cfg).dump()));
    CHECK(back == cfg);
    CHECK(config_hash(back) == config_hash(cfg));
  }
  auto a = preset("fmnist-mlp-desk-v1"), b = a;
  b.train.method = Method::kBeta;
  CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("config rejects unknown keys and bad values") {
  auto j = to_json(preset("ecg-srnn-desk-v1"));
  j["train"]["learnig_rate"] = 0.1;
  CHECK(error_of([&] { experiment_from_json(j); }).find("unknown key 'learnig_rate'") != std::string::npos);
  j = to_json(preset("ecg-srnn-desk-v1"));
  j["train"]["method"] = "sgd";
  CHECK_THROWS_AS(experiment_from_json(j), ConfigError);
  j = to_json(preset("ecg-srnn-desk-v1"));
  j["model"]["tau_mem"] = -1;
  CHECK_THROWS_AS(experiment_from_json(j), ConfigError);
  j = to_json(preset("ecg-srnn-desk-v1"));
  j["eval"]["n_alphas"] = 4;
  CHECK_THROWS_AS(experiment_from_json(j), ConfigError);
  CHECK_THROWS_AS(preset("nope"), ConfigError);
}

TEST_CASE("dotted overrides and file layering") {
  const auto dir = scratch("cfg");
  write_text_atomic(dir / "c.json",
                    R"({"experiment": {"preset": "fmnist-mlp-desk-v1"}, "train": {"epochs": 2}})");
  const fs::path file = dir / "c.json";
  const auto cfg = load_experiment(&file, {{"train.method", "beta"},
                                           {"attack.zeta", "0.2"},
                                           {"eval.zetas", "[0, 0.1]"},
                                           {"experiment.out", "/tmp/x"}});
  CHECK(cfg.task == Task::kFmnist);
  CHECK(cfg.train.epochs == 2);
  CHECK(cfg.train.method == Method::kBeta);
  CHECK(cfg.attack().zeta == 0.2);
  CHECK(cfg.eval.zetas == std::vector<double>{0, 0.1});
  CHECK(cfg.out_dir == "/tmp/x");
  // Switching the model type starts from that type's defaults.
  const auto cnn = load_experiment(nullptr, {{"experiment.preset", "\"fmnist-mlp-desk-v1\""},
                                             {"model.type", "cnn"}});
  CHECK(std::holds_alternative<CnnConfig>(cnn.model));
  CHECK_THROWS_AS(load_experiment(nullptr, {{"train.nope", "1"}}), ConfigError);
}

TEST_CASE("synthetic ecg is balanced, seeded and well-formed") {
  RngStream a(5, 0), b(5, 0);
  const auto d = synth_ecg(40, 60, a);
  CHECK(d.x.shape() == Shape{40, 60, 1});
  std::vector<int> counts(4, 0);
  for (auto y : d.y) ++counts[y];
  CHECK(counts == std::vector<int>{10, 10, 10, 10});
  CHECK(dataset_hash(d) == dataset_hash(synth_ecg(40, 60, b)));
  RngStream c(6, 0);
  CHECK(dataset_hash(d) != dataset_hash(synth_ecg(40, 60, c)));
  RngStream g(0, 0);
  CHECK(dataset_hash(synth_ecg(8, 50, g).head(1)) == "c13dd4ff7ed5537c");
  RngStream e(0, 0);
  CHECK_THROWS_AS(synth_ecg(4, 49, e), std::invalid_argument);
}

TEST_CASE("synthetic spike rasters are binary and balanced") {
  RngStream rng(2, 0);
  const auto d = synth_spike(12, 20, 8, 4, rng, 3.0);
  CHECK(d.x.shape() == Shape{12, 20, 8});
  for (double v : d.x.values()) CHECK((v == 0.0 || v == 3.0));
  std::vector<int> counts(4, 0);
  for (auto y : d.y) ++counts[y];
  CHECK(counts == std::vector<int>{3, 3, 3, 3});
}

TEST_CASE("synthetic fmnist files load with pooling") {
  const auto dir = scratch("fmnist");
  write_synthetic_fmnist(dir, 30, 10, 1);
  CHECK(read_idx(FmnistFiles(dir).train_images).shape == Shape{30, 28, 28});
  DataConfig cfg;
  cfg.n_train = 20;
  cfg.n_val = 10;
  cfg.n_test = 10;
  cfg.pool = 2;
  const auto s = load_fmnist(dir, cfg);
  CHECK(s.train.x.shape() == Shape{20, 196});
  CHECK(s.val.size() == 10);
  CHECK(s.test.size() == 10);
  for (double v : s.train.x.values()) CHECK((v >= 0.0 && v <= 1.0));
  // Pooling is a max over 2x2 windows of the raw bytes.
  const auto raw = read_idx(FmnistFiles(dir).train_images);
  std::uint8_t m = 0;
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) m = std::max(m, raw.bytes[(0 * 28 + 14 + r) * 28 + 14 + c]);
  CHECK(s.train.x[7 * 14 + 7] == m / 255.0);
  cfg.n_train = 25;
  CHECK_THROWS(load_fmnist(dir, cfg));
  CHECK_THROWS(load_fmnist(dir / "absent", cfg));
}

TEST_CASE("attack.beta_rob drives the training robustness weight") {
  const auto cfg = load_experiment(nullptr, {{"attack.beta_rob", "0.1"}, {"train.method", "beta"}});
  CHECK(cfg.train.beta_rob == 0.1);
  CHECK(cfg.train.robust_attack().beta_rob == 0.1);
  CHECK(to_json(cfg)["attack"]["beta_rob"] == 0.1);
  CHECK_FALSE(to_json(cfg)["train"].contains("beta_rob"));
  CHECK(experiment_from_json(to_json(cfg)) == cfg);
}
