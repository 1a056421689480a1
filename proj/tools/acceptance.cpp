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

// Desk-scale acceptance suite. Each criterion prints one PASS/FAIL line with
// the measured quantity and its wall time; a criterion that overruns its
// time budget fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "CLI11.hpp"
#include "mmrt/adversary/adversary.hpp"
#include "mmrt/analysis/analysis.hpp"
#include "mmrt/analysis/gradcheck_suite.hpp"
#include "mmrt/cli/app.hpp"
#include "mmrt/io/checkpoint.hpp"
#include "mmrt/io/config.hpp"
#include "mmrt/io/datasets.hpp"
#include "mmrt/io/files.hpp"
#include "mmrt/io/idx.hpp"
#include "mmrt/io/report.hpp"
#include "mmrt/verify/interval.hpp"

namespace {

using namespace mmrt;
namespace fs = std::filesystem;

constexpr const char* kMlp = "fmnist-mlp-desk-v1";
constexpr const char* kCnn = "fmnist-cnn-desk-v1";
constexpr const char* kEcg = "ecg-srnn-desk-v1";
constexpr int kSeeds = 3;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median of nothing");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Four significant digits are plenty for a status line.
std::string num(double v) {
  std::ostringstream s;
  s << std::setprecision(4) << v;
  return s.str();
}

std::string list(const std::vector<double>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + num(v[i]);
  return s + "]";
}

Json read_json(const fs::path& p) {
  const auto bytes = read_file(p);
  return Json::parse(bytes.begin(), bytes.end());
}

std::vector<std::string> read_lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

// Training runs and generated data shared between criteria. Every run goes
// through the same entry point as the command-line tool.
class Workspace {
 public:
  explicit Workspace(fs::path root) : root_(std::move(root)) {
    fs::remove_all(root_);
    fs::create_directories(root_);
  }

  const fs::path& root() const { return root_; }

  void cli(std::vector<std::string> args) const {
    std::ostringstream out, err;
    if (cli::run(args, out, err) != 0) {
      std::string cmd;
      for (const auto& a : args) cmd += " " + a;
      throw std::runtime_error("mmrt" + cmd + " failed: " + err.str());
    }
  }

  fs::path fmnist() {
    const fs::path dir = root_ / "fmnist";
    if (!fmnist_ready_) {
      cli({"synth-data", "--data", dir.string(), "--n-train", "10000", "--n-test", "2000", "--seed", "0"});
      fmnist_ready_ = true;
    }
    return dir;
  }

  // Common flags selecting preset, seed, output directory and data.
  std::vector<std::string> base(const std::string& preset, int seed, const fs::path& out) {
    std::vector<std::string> a{"--preset", preset, "--seed", std::to_string(seed), "--out", out.string()};
    if (preset.rfind("fmnist", 0) == 0) a.insert(a.end(), {"--data", fmnist().string()});
    return a;
  }

  // Runs `sub` with the base flags followed by `extra`.
  void command(const std::string& sub, const std::string& preset, int seed, const fs::path& out,
               const std::vector<std::string>& extra = {}) {
    std::vector<std::string> a{sub};
    const auto b = base(preset, seed, out);
    a.insert(a.end(), b.begin(), b.end());
    a.insert(a.end(), extra.begin(), extra.end());
    cli(a);
  }

  // Trains once per (preset, method tag, seed) and returns the run directory.
  fs::path trained(const std::string& preset, const std::string& tag, int seed,
                   const std::vector<std::string>& train_flags) {
    const fs::path dir = root_ / "runs" / (preset + "_" + tag + "_s" + std::to_string(seed));
    if (!done_.count(dir.string())) {
      command("train", preset, seed, dir, train_flags);
      done_.insert(dir.string());
    }
    return dir;
  }

  ExperimentConfig config(const std::string& preset) {
    std::vector<std::pair<std::string, std::string>> o{{"experiment.preset", preset}};
    if (preset.rfind("fmnist", 0) == 0) o.emplace_back("experiment.data", fmnist().string());
    return load_experiment(nullptr, o);
  }

 private:
  fs::path root_;
  bool fmnist_ready_ = false;
  std::set<std::string> done_;
};

// Training recipes for the comparisons.
const std::vector<std::string> kStandard{"--train.method", "standard"};
const std::vector<std::string> kBetaAttack{"--train.method", "beta", "--attack.beta_rob", "0.1",
                                           "--attack.zeta", "0.1"};
const std::vector<std::string> kBetaDefault{"--train.method", "beta"};
const std::vector<std::string> kForwardNoise{"--train.method", "forward_noise"};

Outcome gradient_correctness(Workspace&) {
  const auto suite = run_gradcheck_suite(0);
  const auto& worst = suite.worst();
  bool srnn = false, surrogate = false;
  for (const auto& c : suite.cases) {
    srnn |= c.name.find("srnn") != std::string::npos;
    surrogate |= c.name.find("surrogate") != std::string::npos;
  }
  const double err = worst.result.worst_relative_error;
  return {err <= 1e-4 && srnn && surrogate && suite.cases.size() >= 3,
          "worst relative error " + num(err) + " (" + worst.name + ") over " +
              std::to_string(suite.cases.size()) + " cases"};
}

// Task-PGA accuracy at zeta = 0.1 and the random-perturbation mean at the
// same zeta, from attack.json.
std::pair<double, double> attacked_accuracy(Workspace& ws, const fs::path& run, int seed) {
  ws.command("attack-eval", kMlp, seed, run,
             {"--eval.zetas", "[0.1]", "--eval.n_samples", "20", "--attack.zeta", "0.1"});
  const auto row = read_json(run / cli::kAttackJson)["attack"].at(0);
  return {row["accuracy"].get<double>(), row["random_mean_accuracy"].get<double>()};
}

Outcome attack_vs_random(Workspace& ws) {
  std::vector<double> gaps, attacked, random;
  for (int s = 0; s < kSeeds; ++s) {
    const auto [a, r] = attacked_accuracy(ws, ws.trained(kMlp, "standard", s, kStandard), s);
    attacked.push_back(a);
    random.push_back(r);
    gaps.push_back(r - a);
  }
  const double gap = median(gaps);
  return {gap >= 0.20, "median extra drop " + num(gap) + " (attacked " + list(attacked) + ", random " +
                           list(random) + ")"};
}

Outcome training_protection(Workspace& ws) {
  std::vector<double> standard, beta;
  for (int s = 0; s < kSeeds; ++s) {
    standard.push_back(attacked_accuracy(ws, ws.trained(kMlp, "standard", s, kStandard), s).first);
    beta.push_back(attacked_accuracy(ws, ws.trained(kMlp, "beta01", s, kBetaAttack), s).first);
  }
  const double margin = median(beta) - median(standard);
  return {margin >= 0.25, "attacked accuracy beta " + list(beta) + " vs standard " + list(standard) +
                              ", median margin " + num(margin)};
}

Outcome mismatch_ordering(Workspace& ws) {
  std::map<std::string, std::vector<double>> means;
  for (const auto& [tag, flags] : {std::pair{std::string("standard"), kStandard},
                                   std::pair{std::string("beta"), kBetaDefault}}) {
    std::vector<std::string> extra{"--eval.zetas", "[0.3, 0.5]", "--eval.n_samples", "20"};
    for (int s = 0; s < 2; ++s)
      extra.insert(extra.end(),
                   {"--checkpoint", (ws.trained(kCnn, tag, s, flags) / cli::kCheckpointFile).string()});
    const fs::path out = ws.root() / ("mismatch_" + tag);
    ws.command("mismatch-eval", kCnn, 0, out, extra);
    const auto j = read_json(out / cli::kMismatchJson);
    for (const auto& row : j["mismatch"])
      means[tag].push_back(row["mean"].get<double>());
  }
  bool ok = means["beta"].size() == 2 && means["standard"].size() == 2;
  for (std::size_t i = 0; ok && i < 2; ++i) ok = means["beta"][i] > means["standard"][i];
  return {ok, "cnn mean accuracy at zeta 0.3, 0.5: beta " + list(means["beta"]) + " vs standard " +
                  list(means["standard"])};
}

// Flatness of one run, plus whether every alpha = 0 entry of landscape.csv
// reproduces the independently computed nominal test loss exactly.
std::pair<double, bool> landscape(Workspace& ws, const fs::path& run, int seed) {
  ws.command("landscape", kMlp, seed, run, {"--eval.landscape_zeta", "0.2"});
  const auto cfg = ws.config(kMlp);
  const auto ckpt = load_checkpoint<float>(run / cli::kCheckpointFile);
  const double nominal = test_loss<float>(ckpt.arch, ckpt.params, cast<float>(make_splits(cfg).test));
  bool exact = true;
  std::size_t zero_rows = 0;
  for (const auto& line : read_lines(run / cli::kLandscapeCsv)) {
    if (line.rfind("0,", 0) != 0) continue;
    ++zero_rows;
    exact &= std::stod(line.substr(line.rfind(',') + 1)) == nominal;
  }
  return {read_json(run / cli::kLandscapeJson)["flatness"].get<double>(), exact && zero_rows > 0};
}

Outcome landscape_flatness(Workspace& ws) {
  std::vector<double> standard, beta;
  bool exact = true;
  for (int s = 0; s < kSeeds; ++s) {
    const auto a = landscape(ws, ws.trained(kMlp, "standard", s, kStandard), s);
    const auto b = landscape(ws, ws.trained(kMlp, "beta01", s, kBetaAttack), s);
    standard.push_back(a.first);
    beta.push_back(b.first);
    exact &= a.second && b.second;
  }
  const double ratio = median(beta) / median(standard);
  return {ratio <= 0.7 && exact, "flatness beta " + list(beta) + " vs standard " + list(standard) +
                                     ", ratio " + num(ratio) +
                                     (exact ? ", alpha 0 exact" : ", alpha 0 MISMATCH")};
}

std::vector<std::pair<std::string, Array<double>>> concrete_trace(const ArchConfig& arch,
                                                                  const ParameterSet<double>& p,
                                                                  const Array<double>& x) {
  Tape<double> tape;
  const auto vars = bind_parameters(tape, p, false);
  std::vector<std::pair<std::string, Var>> trace;
  ForwardOptions opt;
  opt.trace = &trace;
  forward_logits<double>(arch, tape, vars, tape.constant(x), &opt);
  std::vector<std::pair<std::string, Array<double>>> out;
  for (const auto& [name, v] : trace) out.emplace_back(name, tape.value(v));
  return out;
}

Outcome ibp_soundness(Workspace& ws) {
  constexpr double kSlack = 1e-12;
  constexpr int kSamples = 1000;
  const std::vector<std::tuple<std::string, fs::path>> models{
      {kMlp, ws.trained(kMlp, "standard", 0, kStandard)},
      {kCnn, ws.trained(kCnn, "standard", 0, kStandard)},
      {kEcg, ws.trained(kEcg, "standard", 0, kStandard)},
  };
  std::size_t violations = 0, layers = 0, checks = 0, uncertain = 0;
  RngStream rng(0, 0x69627073);
  for (const auto& [preset, run] : models) {
    const auto ckpt = load_checkpoint<float>(run / cli::kCheckpointFile);
    const auto params = cast<double>(ckpt.params);
    const auto x = make_splits(ws.config(preset)).test.head(8).x;
    for (double zeta : {0.01, 0.05}) {
      const auto box = lift_weights(params, zeta);
      const auto f = interval_forward<double>(ckpt.arch, box, x, true);
      uncertain += f.uncertain;
      layers += f.trace.size();
      for (int s = 0; s < kSamples; ++s) {
        // Every fourth sample is a random corner of the box.
        auto q = params;
        for (std::size_t k = 0; k < q.size(); ++k) {
          auto& v = q[k].value;
          for (std::size_t i = 0; i < v.size(); ++i) {
            const double lo = box[k].lo[i], hi = box[k].hi[i];
            v[i] = s % 4 == 0 ? (rng.below(2) ? hi : lo) : lo + rng.uniform() * (hi - lo);
          }
        }
        const auto trace = concrete_trace(ckpt.arch, q, x);
        if (trace.size() != f.trace.size()) throw std::logic_error("trace layouts differ");
        for (std::size_t k = 0; k < trace.size(); ++k) {
          if (trace[k].first != f.trace[k].first) throw std::logic_error("trace names differ");
          violations += !f.trace[k].second.contains(trace[k].second, kSlack);
          ++checks;
        }
      }
    }
  }
  return {violations == 0, std::to_string(violations) + " violations in " + std::to_string(checks) +
                               " layer checks (3 architectures, zeta 0.01 and 0.05, " +
                               std::to_string(kSamples) + " samples each, " + std::to_string(layers) +
                               " instrumented layers, " + std::to_string(uncertain) +
                               " uncertain srnn spikes)"};
}

// Clean accuracy and verified accuracy over the default grid
// {0, 1e-4, 1e-3, 1e-2}.
std::pair<double, std::vector<double>> verify(Workspace& ws, const std::string& preset,
                                              const fs::path& run, int seed) {
  ws.command("verify", preset, seed, run);
  const auto j = read_json(run / cli::kVerifyJson);
  std::vector<double> v;
  for (const auto& row : j["verified"]) v.push_back(row["verified_accuracy"].get<double>());
  return {j["clean_accuracy"].get<double>(), v};
}

Outcome ibp_degeneracy(Workspace& ws) {
  bool degenerate = true, monotone = true;
  std::string detail;
  std::map<std::string, std::vector<double>> at_smallest;
  const std::vector<std::tuple<std::string, std::string, std::vector<std::string>>> recipes{
      {kMlp, "standard", kStandard}, {kCnn, "standard", kStandard}, {kEcg, "standard", kStandard},
      {kEcg, "beta", kBetaDefault},  {kEcg, "forward_noise", kForwardNoise}};
  for (const auto& [preset, tag, flags] : recipes) {
    for (int s = 0; s < (preset == kEcg ? kSeeds : 1); ++s) {
      const auto [clean, v] = verify(ws, preset, ws.trained(preset, tag, s, flags), s);
      if (v.size() != 4) throw std::logic_error("unexpected verify grid");
      degenerate &= v[0] == clean;
      for (std::size_t i = 1; i < v.size(); ++i) monotone &= v[i] <= v[i - 1];
      if (preset == kEcg) at_smallest[tag].push_back(v[1]);
    }
  }
  const double standard = median(at_smallest["standard"]);
  const double beta = median(at_smallest["beta"]);
  const double noise = median(at_smallest["forward_noise"]);
  const bool robust = std::max(beta, noise) >= standard;
  return {degenerate && monotone && robust,
          std::string(degenerate ? "zeta 0 equals clean" : "zeta 0 DIFFERS from clean") +
              (monotone ? ", non-increasing" : ", NOT monotone") +
              "; srnn verified accuracy at 1e-4: beta " + list(at_smallest["beta"]) + ", forward noise " +
              list(at_smallest["forward_noise"]) + " vs standard " + list(at_smallest["standard"])};
}

Outcome jacobian_consistency(Workspace&) {
  RngStream init(11, 0);
  const MlpConfig cfg{3, {5}, 3};
  const auto theta = cfg.init<double>(init);
  Array<double> x(Shape{12, 3});
  for (auto& v : x.values()) v = init.normal();
  std::vector<std::size_t> labels(12);
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = i % 3;
  const auto y = one_hot<double>(labels, 3);
  const AttackConfig ac{0.2, 6, 0.05, 0.5};
  const auto nominal = probabilities<double>(cfg, theta, x);

  // Independent run of the same attack: every ascent sign is re-derived from
  // the iterates, and the start point is kept to recover the jitter.
  ParameterSet<double> signs = theta.zeros_like();
  ParameterSet<double> start;
  const StepObserver<double> observe = [&](std::size_t t, const ParameterSet<double>& m) {
    if (t == 0) start = m;
    if (t == ac.n_steps) return;
    Tape<double> tape;
    const auto vars = bind_parameters(tape, m);
    const Var kl = ops::kl_div(tape, tape.constant(nominal),
                               forward_probabilities<double>(cfg, tape, vars, tape.constant(x)));
    const auto g = tape.gradient(kl, vars);
    for (std::size_t k = 0; k < m.size(); ++k)
      for (std::size_t i = 0; i < g[k].size(); ++i) signs[k].value[i] += (g[k][i] > 0) - (g[k][i] < 0);
  };
  RngStream dup(12, 1);
  pga_attack<double>(cfg, theta, x, ac, dup, {}, observe);

  RngStream rng(12, 1);
  const auto cg = combined_gradient<double>(cfg, theta, x, y, ac, rng);
  const auto jac = attack_jacobian(theta, cg.attack.trace, ac);
  bool exact_signs = cg.attack.trace.sign_sum == signs;
  double worst = 0.0;
  std::size_t entries = 0, recovered = 0;
  for (std::size_t k = 0; k < theta.size(); ++k)
    for (std::size_t i = 0; i < theta[k].value.size(); ++i) {
      const double t = theta[k].value[i];
      const double s = signs[k].value[i];
      exact_signs &= s == std::round(s);
      // Recover the jitter from the start point unless the box clipped it.
      double r = cg.attack.trace.jitter[k].value[i];
      if (t != 0.0) {
        const double guess = (start[k].value[i] - t) / (std::abs(t) * ac.eps_init);
        if (std::abs(guess * ac.eps_init) < ac.zeta) {
          r = guess;
          ++recovered;
        }
      }
      const double want = theta[k].susceptible
                              ? 1.0 + ((t > 0) - (t < 0)) * (ac.zeta + ac.eps_init * r) / ac.n_steps * s
                              : 1.0;
      worst = std::max(worst, std::abs(jac[k].value[i] - want));
      ++entries;
    }
  return {exact_signs && worst <= 1e-12 && recovered > 0,
          std::string(exact_signs ? "sign sums exact" : "sign sums DIFFER") + ", max |J - formula| " +
              num(worst) + " over " + std::to_string(entries) + " entries"};
}

Outcome membrane_margin(Workspace& ws) {
  std::map<std::string, std::vector<double>> near;
  for (const auto& [tag, flags] : {std::pair{std::string("standard"), kStandard},
                                   std::pair{std::string("forward_noise"), kForwardNoise}}) {
    for (int s = 0; s < kSeeds; ++s) {
      const auto run = ws.trained(kEcg, tag, s, flags);
      ws.command("membrane-hist", kEcg, s, run);
      near[tag].push_back(read_json(run / cli::kHistogramJson)["near_threshold"].get<double>());
    }
  }
  const double ratio = median(near["forward_noise"]) / median(near["standard"]);
  return {ratio <= 0.8, "near-threshold fraction forward noise " + list(near["forward_noise"]) +
                            " vs standard " + list(near["standard"]) + ", ratio " + num(ratio)};
}

Outcome format_fidelity(Workspace& ws) {
  std::vector<std::string> failures;
  const auto expect = [&](bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  };

  const std::vector<std::uint8_t> idx{0, 0, 8, 2, 0, 0, 0, 2, 0, 0, 0, 3, 1, 2, 3, 4, 5, 6};
  const auto parsed = parse_idx(idx);
  expect(parsed.shape == Shape{2, 3} && parsed.bytes == std::vector<std::uint8_t>{1, 2, 3, 4, 5, 6},
         "idx decode");
  write_idx(ws.root() / "golden.idx", parsed);
  expect(read_file(ws.root() / "golden.idx") == idx, "idx encode");

  // Two identical tiny runs through every subcommand.
  const std::vector<std::string> tiny{"--data.n_train=40", "--data.n_val=20",  "--data.n_test=20",
                                      "--model.hidden=8",  "--train.epochs=2", "--eval.n_samples=2",
                                      "--eval.n_trials=2", "--eval.n_alphas=5", "--attack.n_steps=2"};
  std::vector<fs::path> dirs{ws.root() / "determinism_a", ws.root() / "determinism_b"};
  for (const auto& d : dirs)
    for (const char* sub : {"train", "mismatch-eval", "attack-eval", "landscape", "verify", "membrane-hist"})
      ws.command(sub, kEcg, 3, d, tiny);
  std::size_t compared = 0;
  for (const auto& e : fs::directory_iterator(dirs[0])) {
    const auto name = e.path().filename().string();
    // Wall times differ by nature and config.json records its own output
    // directory; metrics.json carries the config hash instead.
    if (name == cli::kTimingFile || name == cli::kConfigFile) continue;
    ++compared;
    expect(fs::exists(dirs[1] / name) &&
               fnv1a64(read_file(e.path())) == fnv1a64(read_file(dirs[1] / name)),
           "determinism " + name);
  }

  const auto bytes = read_file(dirs[0] / cli::kCheckpointFile);
  expect(encode_checkpoint(decode_checkpoint(bytes)) == bytes, "checkpoint re-encode");
  const auto ckpt = checkpoint_from_bytes<float>(bytes);
  expect(encode_checkpoint(ckpt) == bytes, "checkpoint float round trip");
  const Checkpoint<double> wide{ckpt.arch, ckpt.metadata, cast<double>(ckpt.params)};
  const auto wide_bytes = encode_checkpoint(wide);
  expect(encode_checkpoint(checkpoint_from_bytes<double>(wide_bytes)) == wide_bytes,
         "checkpoint double round trip");

  const fs::path golden(MMRT_GOLDEN_DIR);
  std::size_t headers = 0;
  for (const auto& e : fs::directory_iterator(golden)) {
    const auto name = e.path().filename().string();
    ++headers;
    const auto produced = read_lines(dirs[0] / name);
    expect(!produced.empty() && produced.front() == read_lines(e.path()).at(0), "csv header " + name);
  }

  std::string detail = "idx bytes, checkpoint round trips, " + std::to_string(headers) + " csv headers, " +
                       std::to_string(compared) + " output files hashed twice";
  for (const auto& f : failures) detail += "; FAILED " + f;
  return {failures.empty() && headers >= 7 && compared >= 10, detail};
}

struct Criterion {
  int id;
  std::string name;
  double budget_seconds;
  std::function<Outcome(Workspace&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mmrt acceptance suite"};
  std::string work = (fs::temp_directory_path() / "mmrt_acceptance").string();
  std::vector<int> only;
  app.add_option("--work", work, "Scratch directory (wiped on start)");
  app.add_option("--only", only, "Criterion numbers to run");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria{
      {1, "gradient correctness", 60, gradient_correctness},
      {2, "attack vs random gap", 600, attack_vs_random},
      {3, "training protection", 1800, training_protection},
      {4, "mismatch robustness ordering", 900, mismatch_ordering},
      {5, "landscape flatness", 300, landscape_flatness},
      {6, "interval soundness", 300, ibp_soundness},
      {7, "interval degeneracy and monotonicity", 600, ibp_degeneracy},
      {8, "diagonal jacobian consistency", 60, jacobian_consistency},
      {9, "membrane margin", 900, membrane_margin},
      {10, "format fidelity", 60, format_fidelity},
  };

  Workspace ws{fs::path(work)};
  Json summary = Json::array();
  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run(ws);
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.budget_seconds;
    const bool pass = o.pass && in_time;
    failed += !pass;
    std::ostringstream time;
    time << std::fixed << std::setprecision(1) << secs;
    std::cout << (pass ? "PASS" : "FAIL") << " " << c.id << " " << c.name << ": " << o.detail << " ["
              << time.str() << " s" << (in_time ? "" : ", over budget") << "]" << std::endl;
    summary.push_back({{"criterion", c.id}, {"name", c.name}, {"pass", pass}, {"detail", o.detail},
                       {"seconds", secs}, {"budget_seconds", c.budget_seconds}});
  }
  write_json(fs::path(work) / "acceptance.json", summary);
  return failed ? 1 : 0;
}
