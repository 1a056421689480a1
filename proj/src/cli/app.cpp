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

#include "mmrt/cli/app.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "mmrt/analysis/analysis.hpp"
#include "mmrt/analysis/gradcheck_suite.hpp"
#include "mmrt/io/checkpoint.hpp"
#include "mmrt/io/config.hpp"
#include "mmrt/io/datasets.hpp"
#include "mmrt/io/files.hpp"
#include "mmrt/io/report.hpp"
#include "mmrt/training/train.hpp"
#include "mmrt/verify/interval.hpp"

namespace mmrt::cli {

namespace {

namespace fs = std::filesystem;
using Real = float;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out, data, preset;
  std::vector<std::string> checkpoints;
  std::vector<std::pair<std::string, std::string>> overrides;
};

struct Context {
  ExperimentConfig cfg;
  Common flags;
  std::ostream& out;

  fs::path out_path(const char* name) const { return fs::path(cfg.out_dir) / name; }

  std::vector<fs::path> checkpoint_paths() const {
    std::vector<fs::path> paths;
    for (const auto& c : flags.checkpoints) paths.emplace_back(c);
    if (paths.empty())
      for (const auto& c : cfg.eval.checkpoints) paths.emplace_back(c);
    if (paths.empty()) paths.push_back(out_path(kCheckpointFile));
    for (const auto& p : paths)
      if (!fs::exists(p)) throw std::runtime_error("checkpoint not found: " + p.string());
    return paths;
  }

  Checkpoint<Real> first_checkpoint() const {
    auto ckpt = load_checkpoint<Real>(checkpoint_paths().front());
    if (!(ckpt.arch == cfg.model))
      throw std::runtime_error("checkpoint architecture " + to_json(ckpt.arch).dump() +
                               " does not match the configured model");
    return ckpt;
  }

  Dataset<Real> test_set() const {
    auto test = cast<Real>(make_splits(cfg).test);
    if (cfg.eval.max_examples > 0) test = test.head(cfg.eval.max_examples);
    return test;
  }
};

// Turns "--a.b value" and "--a.b=value" tokens into override pairs.
std::vector<std::pair<std::string, std::string>> parse_overrides(
    const std::vector<std::string>& extras) {
  std::vector<std::pair<std::string, std::string>> out;
  for (std::size_t i = 0; i < extras.size(); ++i) {
    const std::string& tok = extras[i];
    if (tok.rfind("--", 0) != 0 || tok.find('.') == std::string::npos)
      throw std::invalid_argument("unexpected argument '" + tok + "'");
    const auto eq = tok.find('=');
    if (eq != std::string::npos) {
      out.emplace_back(tok.substr(2, eq - 2), tok.substr(eq + 1));
    } else {
      if (i + 1 >= extras.size()) throw std::invalid_argument("override '" + tok + "' needs a value");
      out.emplace_back(tok.substr(2), extras[++i]);
    }
  }
  return out;
}

ExperimentConfig resolve(const Common& c) {
  std::vector<std::pair<std::string, std::string>> ov;
  if (!c.preset.empty()) ov.emplace_back("experiment.preset", Json(c.preset).dump());
  ov.insert(ov.end(), c.overrides.begin(), c.overrides.end());
  if (c.seed) ov.emplace_back("experiment.seed", std::to_string(*c.seed));
  if (!c.out.empty()) ov.emplace_back("experiment.out", Json(c.out).dump());
  if (!c.data.empty()) ov.emplace_back("experiment.data", Json(c.data).dump());
  if (c.config.empty()) return load_experiment(nullptr, ov);
  const fs::path file(c.config);
  if (!fs::exists(file)) throw std::runtime_error("config not found: " + file.string());
  return load_experiment(&file, ov);
}

Json metadata_for(const ExperimentConfig& cfg, const RunReport& report) {
  return {{"config_hash", config_hash(cfg)},
          {"seed", cfg.seed},
          {"method", to_string(cfg.train.method)},
          {"epoch", report.best_epoch},
          {"val_accuracy", report.best_val_accuracy},
          {"test_accuracy", report.test_accuracy}};
}

std::vector<double> column(const std::vector<AttackPoint>& pts, double AttackPoint::*field) {
  std::vector<double> v;
  for (const auto& p : pts) v.push_back(p.*field);
  return v;
}

int cmd_train(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto splits = make_splits(cfg);
  Splits<Real> data{cast<Real>(splits.train), cast<Real>(splits.val), cast<Real>(splits.test)};
  TrainConfig tc = cfg.train;
  tc.seed = cfg.seed;
  const auto start = std::chrono::steady_clock::now();
  const auto result = train<Real>(cfg.model, data, tc);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  save_checkpoint(ctx.out_path(kCheckpointFile),
                  Checkpoint<Real>{cfg.model, metadata_for(cfg, result.report), result.best});
  write_json(ctx.out_path(kConfigFile), to_json(cfg));
  history_csv(result.report).write(ctx.out_path(kHistoryCsv));
  Json metrics = metadata_for(cfg, result.report);
  metrics["train_examples"] = data.train.size();
  metrics["parameters"] = result.best.parameter_count();
  write_json(ctx.out_path(kMetricsFile), metrics);
  Json timing = {{"seconds", seconds}, {"epochs", Json::array()}};
  for (const auto& e : result.report.history) timing["epochs"].push_back(e.seconds);
  write_json(ctx.out_path(kTimingFile), timing);
  Series acc{"validation accuracy", {}, {}};
  for (const auto& e : result.report.history) {
    acc.x.push_back(static_cast<double>(e.epoch));
    acc.y.push_back(e.val_accuracy);
  }
  write_text_atomic(ctx.out_path("history.svg"), svg_line_plot("Training", "epoch", "accuracy", {acc}));
  const auto bytes = read_file(ctx.out_path(kCheckpointFile));
  ctx.out << "train: " << arch_name(cfg.model) << "/" << to_string(cfg.train.method) << " seed "
          << cfg.seed << ", best epoch " << result.report.best_epoch << ", val "
          << format_number(result.report.best_val_accuracy) << ", test "
          << format_number(result.report.test_accuracy) << ", checkpoint "
          << hex64(fnv1a64(bytes)) << "\n";
  return 0;
}

int cmd_mismatch_eval(Context& ctx) {
  const auto& cfg = ctx.cfg;
  std::vector<ParameterSet<Real>> params;
  for (const auto& p : ctx.checkpoint_paths()) {
    auto ckpt = load_checkpoint<Real>(p);
    if (!(ckpt.arch == cfg.model))
      throw std::runtime_error(p.string() + ": architecture does not match the configured model");
    params.push_back(std::move(ckpt.params));
  }
  const auto table = mismatch_eval(cfg.model, params, cfg.eval.zetas, cfg.eval.n_samples,
                                   ctx.test_set(), cfg.seed);
  mismatch_csv(table).write(ctx.out_path(kMismatchCsv));
  mismatch_samples_csv(table).write(ctx.out_path(kMismatchSamplesCsv));
  Series mean{"mean accuracy", {}, {}}, worst{"min accuracy", {}, {}};
  Json rows = Json::array();
  for (const auto& r : table.rows) {
    mean.x.push_back(r.zeta);
    mean.y.push_back(r.mean);
    worst.x.push_back(r.zeta);
    worst.y.push_back(r.min);
    rows.push_back({{"zeta", r.zeta}, {"mean", r.mean}, {"std", r.std}, {"min", r.min}, {"max", r.max}});
  }
  write_json(ctx.out_path(kMismatchJson), {{"mismatch", rows}, {"checkpoints", params.size()},
                                           {"n_samples", cfg.eval.n_samples}});
  write_text_atomic(ctx.out_path("mismatch.svg"),
                    svg_line_plot("Mismatch robustness", "zeta", "test accuracy", {mean, worst}));
  ctx.out << "mismatch-eval: " << table.rows.size() << " zetas x " << params.size()
          << " checkpoints x " << cfg.eval.n_samples << " draws";
  if (!table.rows.empty())
    ctx.out << ", mean at zeta " << format_number(table.rows.back().zeta) << " = "
            << format_number(table.rows.back().mean);
  ctx.out << "\n";
  return 0;
}

int cmd_attack_eval(Context& ctx, const std::string& objective) {
  const auto& cfg = ctx.cfg;
  const auto ckpt = ctx.first_checkpoint();
  AttackObjectiveKind kind;
  if (objective == "ce") kind = AttackObjectiveKind::kCrossEntropy;
  else if (objective == "kl") kind = AttackObjectiveKind::kKl;
  else throw std::invalid_argument("attack-eval: --objective must be 'ce' or 'kl'");
  const auto test = ctx.test_set();
  const auto pts = attack_eval(cfg.model, ckpt.params, cfg.eval.zetas, cfg.attack(), test, kind, cfg.seed);
  // Random proportional perturbations at the same zetas as a reference.
  const auto random = mismatch_eval<Real>(cfg.model, {ckpt.params}, cfg.eval.zetas, cfg.eval.n_samples,
                                          test, cfg.seed);
  attack_csv(pts).write(ctx.out_path(kAttackCsv));
  Json rows = Json::array();
  for (std::size_t i = 0; i < pts.size(); ++i)
    rows.push_back({{"zeta", pts[i].zeta}, {"accuracy", pts[i].accuracy}, {"kl", pts[i].kl},
                    {"random_mean_accuracy", random.rows[i].mean}});
  write_json(ctx.out_path(kAttackJson), {{"objective", objective}, {"attack", rows},
                                         {"n_steps", cfg.attack().n_steps}});
  Series attacked{"attacked", cfg.eval.zetas, column(pts, &AttackPoint::accuracy)};
  Series rnd{"random", cfg.eval.zetas, {}};
  for (const auto& r : random.rows) rnd.y.push_back(r.mean);
  write_text_atomic(ctx.out_path("attack.svg"),
                    svg_line_plot("Weight attack", "zeta", "test accuracy", {attacked, rnd}));
  ctx.out << "attack-eval: " << objective << " objective, " << pts.size() << " zetas";
  if (!pts.empty())
    ctx.out << ", accuracy at zeta " << format_number(pts.back().zeta) << " = "
            << format_number(pts.back().accuracy) << " (random " << format_number(random.rows.back().mean)
            << ")";
  ctx.out << "\n";
  return 0;
}

int cmd_landscape(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto ckpt = ctx.first_checkpoint();
  const auto grid = landscape_sweep(cfg.model, ckpt.params, ctx.test_set(), cfg.eval.landscape_zeta,
                                    cfg.eval.n_trials, cfg.eval.n_alphas, cfg.seed);
  landscape_csv(grid).write(ctx.out_path(kLandscapeCsv));
  write_json(ctx.out_path(kLandscapeJson),
             {{"zeta", grid.zeta}, {"flatness", grid.flatness()}, {"n_trials", grid.losses.size()},
              {"alphas", grid.alphas}});
  std::vector<Series> series;
  for (std::size_t k = 0; k < grid.losses.size(); ++k)
    series.push_back({"trial " + std::to_string(k), grid.alphas, grid.losses[k]});
  write_text_atomic(ctx.out_path("landscape.svg"),
                    svg_line_plot("Weight-loss landscape", "alpha", "test loss", series));
  ctx.out << "landscape: zeta " << format_number(grid.zeta) << ", " << grid.losses.size()
          << " trials, flatness " << format_number(grid.flatness()) << "\n";
  return 0;
}

int cmd_verify(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto ckpt = ctx.first_checkpoint();
  const auto test = ctx.test_set();
  const double clean = evaluate_accuracy(cfg.model, ckpt.params, test);
  CsvTable t({"zeta", "verified_accuracy"});
  Series s{"verified accuracy", {}, {}};
  Json rows = Json::array();
  for (double z : cfg.eval.verify_zetas) {
    const double v = verified_accuracy(cfg.model, ckpt.params, z, test);
    t.add_row({format_number(z), format_number(v)});
    s.x.push_back(z);
    s.y.push_back(v);
    rows.push_back({{"zeta", z}, {"verified_accuracy", v}});
  }
  t.write(ctx.out_path(kVerifyCsv));
  write_json(ctx.out_path(kVerifyJson), {{"clean_accuracy", clean}, {"verified", rows}});
  write_text_atomic(ctx.out_path("verify.svg"),
                    svg_line_plot("Interval verification", "zeta", "verified accuracy", {s}));
  ctx.out << "verify: clean " << format_number(clean);
  for (std::size_t i = 0; i < s.x.size(); ++i)
    ctx.out << ", zeta " << format_number(s.x[i]) << " -> " << format_number(s.y[i]);
  ctx.out << "\n";
  return 0;
}

int cmd_membrane_hist(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto* srnn = std::get_if<SrnnConfig>(&cfg.model);
  if (!srnn) throw std::invalid_argument("membrane-hist: model type must be srnn");
  const auto ckpt = ctx.first_checkpoint();
  const auto test = ctx.test_set();
  const auto h = membrane_histogram(*srnn, ckpt.params, test.x, cfg.eval.histogram_bins);
  histogram_csv(h).write(ctx.out_path(kHistogramCsv));
  write_json(ctx.out_path(kHistogramJson),
             {{"near_threshold", h.near_threshold}, {"total", h.total}, {"lo", h.lo}, {"hi", h.hi},
              {"counts", h.counts}});
  Series s{"fraction", {}, {}};
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    s.x.push_back(h.lo + (i + 0.5) * h.bin_width());
    s.y.push_back(static_cast<double>(h.counts[i]) / static_cast<double>(std::max<std::size_t>(h.total, 1)));
  }
  write_text_atomic(ctx.out_path("membrane_hist.svg"),
                    svg_line_plot("Membrane potential / threshold", "V/B", "fraction", {s}));
  ctx.out << "membrane-hist: " << h.total << " samples, near-threshold fraction "
          << format_number(h.near_threshold) << "\n";
  return 0;
}

int cmd_gradcheck(Context& ctx) {
  constexpr double kTolerance = 1e-4;
  const auto suite = run_gradcheck_suite(ctx.cfg.seed);
  Json cases = Json::array();
  for (const auto& c : suite.cases)
    cases.push_back({{"name", c.name}, {"checked", c.result.checked},
                     {"worst_relative_error", c.result.worst_relative_error},
                     {"worst_input", c.result.worst_input}, {"worst_index", c.result.worst_index}});
  const auto& worst = suite.worst();
  const bool ok = worst.result.worst_relative_error <= kTolerance;
  write_json(ctx.out_path(kGradcheckJson),
             {{"worst_relative_error", worst.result.worst_relative_error}, {"worst_case", worst.name},
              {"tolerance", kTolerance}, {"pass", ok}, {"cases", cases}});
  ctx.out << "gradcheck: " << suite.cases.size() << " cases, worst relative error "
          << format_number(worst.result.worst_relative_error) << " (" << worst.name << "), "
          << (ok ? "PASS" : "FAIL") << "\n";
  return ok ? 0 : 1;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"mmrt: mismatch-robust training and evaluation"};
  app.require_subcommand(1);
  Common common;
  std::string objective = "ce";
  std::size_t synth_train = 10000, synth_test = 2000;
  std::uint64_t synth_seed = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->allow_extras();
    sub->add_option("--config", common.config, "JSON experiment config");
    sub->add_option("--preset", common.preset, "Named preset to start from");
    sub->add_option("--seed", common.seed, "Experiment seed");
    sub->add_option("--out", common.out, "Output directory");
    sub->add_option("--data", common.data, "Data directory (FMNIST IDX files)");
    return sub;
  };
  std::map<std::string, CLI::App*> subs;
  subs["train"] = add_common(app.add_subcommand("train", "Train a model and save a checkpoint"));
  const std::pair<const char*, const char*> evals[] = {
      {"attack-eval", "Accuracy under worst-case weight attacks and random perturbations"},
      {"mismatch-eval", "Accuracy under random proportional weight mismatch"},
      {"landscape", "Test loss along random proportional directions"},
      {"verify", "Interval-verified accuracy over a weight box"},
      {"membrane-hist", "SRNN membrane potentials relative to threshold"},
  };
  for (const auto& [name, help] : evals) {
    subs[name] = add_common(app.add_subcommand(name, help));
    subs[name]->add_option("--checkpoint", common.checkpoints, "Checkpoint file (repeatable)");
  }
  subs["attack-eval"]->add_option("--objective", objective, "Ascent objective: ce or kl");
  subs["gradcheck"] = add_common(app.add_subcommand("gradcheck", "Finite-difference gradient suite"));
  auto* synth = app.add_subcommand("synth-data", "Write synthetic FMNIST-format IDX files");
  synth->add_option("--data", common.data, "Target directory")->required();
  synth->add_option("--n-train", synth_train, "Training images");
  synth->add_option("--n-test", synth_test, "Test images");
  synth->add_option("--seed", synth_seed, "Generator seed");
  app.add_subcommand("presets", "List preset names");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "mmrt: " << e.what() << "\n";
    return 2;
  }

  try {
    const auto* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    if (name == "presets") {
      for (const auto& p : preset_names()) out << p << "\n";
      return 0;
    }
    if (name == "synth-data") {
      write_synthetic_fmnist(common.data, synth_train, synth_test, synth_seed);
      out << "synth-data: wrote " << synth_train << " train and " << synth_test << " test images to "
          << common.data << "\n";
      return 0;
    }
    common.overrides = parse_overrides(sub->remaining());
    Context ctx{resolve(common), common, out};
    if (name == "train") return cmd_train(ctx);
    if (name == "mismatch-eval") return cmd_mismatch_eval(ctx);
    if (name == "attack-eval") return cmd_attack_eval(ctx, objective);
    if (name == "landscape") return cmd_landscape(ctx);
    if (name == "verify") return cmd_verify(ctx);
    if (name == "membrane-hist") return cmd_membrane_hist(ctx);
    if (name == "gradcheck") return cmd_gradcheck(ctx);
    err << "mmrt: unknown subcommand '" << name << "'\n";
    return 2;
  } catch (const std::exception& e) {
    err << "mmrt: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace mmrt::cli
