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
#include "mmrt/cli/app.hpp"
#include "mmrt/io/config.hpp"
#include "mmrt/io/files.hpp"

using namespace mmrt;
namespace fs = std::filesystem;

namespace {

struct Run {
  int status;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int status = cli::run(args, out, err);
  return {status, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mmrt_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::vector<std::string> lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::string golden_header(const std::string& name) {
  return lines(fs::path(MMRT_GOLDEN_DIR) / name).at(0);
}

// A small ECG SRNN run that trains in well under a second.
std::vector<std::string> tiny(std::vector<std::string> args, const fs::path& out) {
  for (const char* kv : {"--data.n_train=40", "--data.n_val=20", "--data.n_test=20", "--model.hidden=8",
                         "--train.epochs=2", "--eval.n_samples=2", "--eval.n_trials=2", "--eval.n_alphas=5",
                         "--attack.n_steps=2"})
    args.emplace_back(kv);
  args.insert(args.end(), {"--preset", "ecg-srnn-desk-v1", "--seed", "3", "--out", out.string()});
  return args;
}

}  // namespace

TEST_CASE("gradcheck writes the worst relative error and passes") {
  const auto dir = scratch("gradcheck");
  const auto r = run({"gradcheck", "--out", dir.string()});
  CHECK(r.status == 0);
  CHECK(r.out.find("PASS") != std::string::npos);
  const auto bytes = read_file(dir / cli::kGradcheckJson);
  const auto j = Json::parse(bytes.begin(), bytes.end());
  CHECK(j["worst_relative_error"].get<double>() <= 1e-4);
  CHECK(j["cases"].size() >= 15);
}

TEST_CASE("train twice with the same seed gives identical outputs") {
  const auto a = scratch("train_a"), b = scratch("train_b");
  const auto ra = run(tiny({"train"}, a));
  const auto rb = run(tiny({"train"}, b));
  REQUIRE_MESSAGE(ra.status == 0, ra.err);
  REQUIRE(rb.status == 0);
  CHECK(ra.out.find("train: srnn/standard seed 3") == 0);
  for (const char* f : {cli::kCheckpointFile, cli::kHistoryCsv, cli::kMetricsFile, "history.svg"}) {
    CAPTURE(f);
    CHECK(read_file(a / f) == read_file(b / f));
  }
  CHECK(fs::exists(a / cli::kTimingFile));
  CHECK(lines(a / cli::kHistoryCsv).at(0) == golden_header("history.csv"));
  CHECK(lines(a / cli::kHistoryCsv).size() == 3);

  const auto c = scratch("train_c");
  REQUIRE(run(tiny({"train", "--train.method", "beta"}, c)).status == 0);
  CHECK(read_file(a / cli::kCheckpointFile) != read_file(c / cli::kCheckpointFile));
}

TEST_CASE("evaluation subcommands write their tables") {
  const auto dir = scratch("eval");
  REQUIRE(run(tiny({"train"}, dir)).status == 0);
  const auto train_metrics = read_file(dir / cli::kMetricsFile);

  auto r = run(tiny({"mismatch-eval", "--eval.zetas", "[0, 0.1]"}, dir));
  REQUIRE_MESSAGE(r.status == 0, r.err);
  auto csv = lines(dir / cli::kMismatchCsv);
  CHECK(csv.size() == 3);
  CHECK(csv[0] == "zeta,mean,std,min");
  CHECK(csv[0] == golden_header("mismatch.csv"));
  CHECK(csv[1].rfind("0,", 0) == 0);
  CHECK(csv[2].rfind("0.1,", 0) == 0);
  CHECK(lines(dir / cli::kMismatchSamplesCsv).size() == 1 + 2 * 2);

  r = run(tiny({"attack-eval", "--eval.zetas", "[0.1]"}, dir));
  REQUIRE_MESSAGE(r.status == 0, r.err);
  CHECK(lines(dir / cli::kAttackCsv).at(0) == golden_header("attack.csv"));
  CHECK(lines(dir / cli::kAttackCsv).size() == 2);
  CHECK(run(tiny({"attack-eval", "--objective", "kl"}, dir)).status == 0);
  CHECK(run(tiny({"attack-eval", "--objective", "l2"}, dir)).status != 0);

  r = run(tiny({"landscape"}, dir));
  REQUIRE_MESSAGE(r.status == 0, r.err);
  CHECK(lines(dir / cli::kLandscapeCsv).at(0) == golden_header("landscape.csv"));
  CHECK(lines(dir / cli::kLandscapeCsv).size() == 1 + 5 * 2);

  r = run(tiny({"verify"}, dir));
  REQUIRE_MESSAGE(r.status == 0, r.err);
  CHECK(lines(dir / cli::kVerifyCsv).at(0) == golden_header("verify.csv"));
  CHECK(lines(dir / cli::kVerifyCsv).size() == 5);

  r = run(tiny({"membrane-hist"}, dir));
  REQUIRE_MESSAGE(r.status == 0, r.err);
  CHECK(lines(dir / cli::kHistogramCsv).at(0) == golden_header("membrane_hist.csv"));
  for (const char* svg : {"mismatch.svg", "attack.svg", "landscape.svg", "verify.svg", "membrane_hist.svg"})
    CHECK(fs::exists(dir / svg));
  for (const char* json : {cli::kMismatchJson, cli::kAttackJson, cli::kLandscapeJson, cli::kVerifyJson,
                           cli::kHistogramJson})
    CHECK(fs::exists(dir / json));
  CHECK(read_file(dir / cli::kMetricsFile) == train_metrics);

  // Repeating an evaluation reproduces its outputs exactly.
  const auto before = read_file(dir / cli::kLandscapeCsv);
  REQUIRE(run(tiny({"landscape"}, dir)).status == 0);
  CHECK(read_file(dir / cli::kLandscapeCsv) == before);
}

TEST_CASE("errors exit nonzero with a message") {
  const auto dir = scratch("errors");
  auto r = run({"frobnicate"});
  CHECK(r.status != 0);
  CHECK(!r.err.empty());
  r = run({"train", "--out", dir.string(), "--train.learnig_rate", "1"});
  CHECK(r.status != 0);
  CHECK(r.err.find("unknown key") != std::string::npos);
  r = run({"verify", "--out", dir.string()});
  CHECK(r.status != 0);
  CHECK(r.err.find("checkpoint not found") != std::string::npos);
  r = run({"train", "--config", (dir / "absent.json").string()});
  CHECK(r.status != 0);
  CHECK(r.err.find("config not found") != std::string::npos);
  r = run({"train", "--preset", "fmnist-mlp-desk-v1", "--data", (dir / "nothing").string(), "--out",
           dir.string()});
  CHECK(r.status != 0);
  CHECK(r.err.find("missing") != std::string::npos);
  r = run({"train", "stray"});
  CHECK(r.status != 0);
  r = run({"membrane-hist", "--preset", "fmnist-mlp-desk-v1", "--out", dir.string()});
  CHECK(r.status != 0);
}

TEST_CASE("synth-data and presets") {
  const auto dir = scratch("synth");
  auto r = run({"synth-data", "--data", dir.string(), "--n-train", "20", "--n-test", "5"});
  REQUIRE(r.status == 0);
  CHECK(fs::exists(dir / "train-images-idx3-ubyte"));
  CHECK(fs::exists(dir / "t10k-labels-idx1-ubyte"));
  r = run({"presets"});
  CHECK(r.out.find("fmnist-mlp-desk-v1") != std::string::npos);
}
