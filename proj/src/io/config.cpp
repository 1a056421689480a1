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

#include "mmrt/io/config.hpp"

#include <fstream>
#include <set>

#include "mmrt/io/files.hpp"

namespace mmrt {

namespace {

// Reads fields of one JSON object and rejects keys nobody asked for.
class Fields {
 public:
  Fields(const Json& j, std::string section) : j_(j), section_(std::move(section)) {
    if (!j_.is_object()) throw ConfigError(section_ + ": expected an object");
  }

  template <typename V>
  void get(const char* key, V& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<V>();
    } catch (const Json::exception& e) {
      throw ConfigError(section_ + "." + key + ": " + e.what());
    }
  }

  const Json* sub(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) throw ConfigError(section_ + ": unknown key '" + k + "'");
  }

 private:
  const Json& j_;
  std::string section_;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace

Json to_json(const ArchConfig& arch) {
  Json j;
  j["type"] = arch_name(arch);
  if (const auto* m = std::get_if<MlpConfig>(&arch)) {
    j["inputs"] = m->inputs;
    j["hidden"] = m->hidden;
    j["classes"] = m->classes;
  } else if (const auto* c = std::get_if<CnnConfig>(&arch)) {
    j["height"] = c->height;
    j["width"] = c->width;
    j["channels"] = c->channels;
    j["conv_channels"] = c->conv_channels;
    j["kernel"] = c->kernel;
    j["dense"] = c->dense;
    j["classes"] = c->classes;
  } else {
    const auto& s = std::get<SrnnConfig>(arch);
    j["inputs"] = s.inputs;
    j["hidden"] = s.hidden;
    j["classes"] = s.classes;
    j["dt"] = s.dt;
    j["tau_mem"] = s.tau_mem;
    j["tau_ada"] = s.tau_ada;
    j["beta_ada"] = s.beta_ada;
    j["b0"] = s.b0;
    j["t_refr"] = s.t_refr;
    j["dampening"] = s.dampening;
    j["repeat_steps"] = s.repeat_steps;
  }
  return j;
}

ArchConfig arch_from_json(const Json& j) {
  Fields f(j, "model");
  std::string type = "srnn";
  f.get("type", type);
  ArchConfig out;
  if (type == "mlp") {
    MlpConfig m;
    f.get("inputs", m.inputs);
    f.get("hidden", m.hidden);
    f.get("classes", m.classes);
    require(m.inputs > 0 && m.classes >= 2, "model: mlp needs inputs > 0 and classes >= 2");
    out = m;
  } else if (type == "cnn") {
    CnnConfig c;
    f.get("height", c.height);
    f.get("width", c.width);
    f.get("channels", c.channels);
    f.get("conv_channels", c.conv_channels);
    f.get("kernel", c.kernel);
    f.get("dense", c.dense);
    f.get("classes", c.classes);
    require(c.kernel > 0 && c.classes >= 2, "model: cnn needs kernel > 0 and classes >= 2");
    try {
      c.flat_features();
    } catch (const ShapeError& e) {
      throw ConfigError(std::string("model: ") + e.what());
    }
    out = c;
  } else if (type == "srnn") {
    SrnnConfig s;
    f.get("inputs", s.inputs);
    f.get("hidden", s.hidden);
    f.get("classes", s.classes);
    f.get("dt", s.dt);
    f.get("tau_mem", s.tau_mem);
    f.get("tau_ada", s.tau_ada);
    f.get("beta_ada", s.beta_ada);
    f.get("b0", s.b0);
    f.get("t_refr", s.t_refr);
    f.get("dampening", s.dampening);
    f.get("repeat_steps", s.repeat_steps);
    try {
      s.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("model: ") + e.what());
    }
    require(s.classes >= 2, "model: srnn needs classes >= 2");
    out = s;
  } else {
    throw ConfigError("model: unknown type '" + type + "'");
  }
  f.finish();
  return out;
}

Json to_json(const AttackConfig& cfg) {
  return {{"zeta", cfg.zeta}, {"n_steps", cfg.n_steps}, {"eps_init", cfg.eps_init},
          {"beta_rob", cfg.beta_rob}};
}

AttackConfig attack_from_json(const Json& j) {
  Fields f(j, "attack");
  AttackConfig a;
  f.get("zeta", a.zeta);
  f.get("n_steps", a.n_steps);
  f.get("eps_init", a.eps_init);
  f.get("beta_rob", a.beta_rob);
  f.finish();
  try {
    a.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return a;
}

Json to_json(const TrainConfig& cfg) {
  return {{"method", to_string(cfg.method)},
          {"learning_rate", cfg.learning_rate},
          {"epochs", cfg.epochs},
          {"batch_size", cfg.batch_size},
          {"dropout_p", cfg.dropout_p},
          {"forward_noise_std", cfg.forward_noise_std},
          {"awp_gamma", cfg.awp_gamma},
          {"grad_clip", cfg.grad_clip}};
}

TrainConfig train_from_json(const Json& j) {
  Fields f(j, "train");
  TrainConfig t;
  std::string method = to_string(t.method);
  f.get("method", method);
  try {
    t.method = parse_method(method);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("train: ") + e.what());
  }
  f.get("learning_rate", t.learning_rate);
  f.get("epochs", t.epochs);
  f.get("batch_size", t.batch_size);
  f.get("dropout_p", t.dropout_p);
  f.get("forward_noise_std", t.forward_noise_std);
  f.get("awp_gamma", t.awp_gamma);
  f.get("grad_clip", t.grad_clip);
  f.finish();
  try {
    t.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return t;
}

std::string to_string(Task t) {
  switch (t) {
    case Task::kFmnist: return "fmnist";
    case Task::kSynthEcg: return "synth_ecg";
    case Task::kSynthSpike: return "synth_spike";
  }
  throw ConfigError("unknown task");
}

Task parse_task(const std::string& s) {
  for (Task t : {Task::kFmnist, Task::kSynthEcg, Task::kSynthSpike})
    if (to_string(t) == s) return t;
  throw ConfigError("unknown task '" + s + "'");
}

Json to_json(const ExperimentConfig& cfg) {
  Json j;
  j["experiment"] = {{"preset", cfg.preset},    {"task", to_string(cfg.task)},
                     {"seed", cfg.seed},        {"out", cfg.out_dir},
                     {"data", cfg.data_dir}};
  j["model"] = to_json(cfg.model);
  j["train"] = to_json(cfg.train);
  j["attack"] = to_json(cfg.train.attack);
  j["attack"]["beta_rob"] = cfg.train.beta_rob;
  const auto& d = cfg.data;
  j["data"] = {{"seed", d.seed}, {"n_train", d.n_train}, {"n_val", d.n_val},       {"n_test", d.n_test},
               {"length", d.length},   {"channels", d.channels}, {"classes", d.classes},
               {"current_scale", d.current_scale}, {"pool", d.pool}};
  const auto& e = cfg.eval;
  j["eval"] = {{"zetas", e.zetas},
               {"n_samples", e.n_samples},
               {"checkpoints", e.checkpoints},
               {"landscape_zeta", e.landscape_zeta},
               {"n_trials", e.n_trials},
               {"n_alphas", e.n_alphas},
               {"verify_zetas", e.verify_zetas},
               {"histogram_bins", e.histogram_bins},
               {"max_examples", e.max_examples}};
  return j;
}

ExperimentConfig experiment_from_json(const Json& j) {
  Fields top(j, "config");
  ExperimentConfig cfg;
  if (const Json* e = top.sub("experiment")) {
    Fields f(*e, "experiment");
    std::string task = to_string(cfg.task);
    f.get("preset", cfg.preset);
    f.get("task", task);
    f.get("seed", cfg.seed);
    f.get("out", cfg.out_dir);
    f.get("data", cfg.data_dir);
    f.finish();
    cfg.task = parse_task(task);
  }
  if (const Json* m = top.sub("model")) cfg.model = arch_from_json(*m);
  if (const Json* t = top.sub("train")) cfg.train = train_from_json(*t);
  if (const Json* a = top.sub("attack")) cfg.train.attack = attack_from_json(*a);
  cfg.train.beta_rob = cfg.train.attack.beta_rob;
  if (const Json* d = top.sub("data")) {
    Fields f(*d, "data");
    auto& x = cfg.data;
    f.get("seed", x.seed);
    f.get("n_train", x.n_train);
    f.get("n_val", x.n_val);
    f.get("n_test", x.n_test);
    f.get("length", x.length);
    f.get("channels", x.channels);
    f.get("classes", x.classes);
    f.get("current_scale", x.current_scale);
    f.get("pool", x.pool);
    f.finish();
    require(x.n_train > 0 && x.n_val > 0 && x.n_test > 0, "data: split sizes must be > 0");
    require(x.pool == 1 || x.pool == 2, "data: pool must be 1 or 2");
    require(x.current_scale > 0, "data: current_scale must be > 0");
  }
  if (const Json* e = top.sub("eval")) {
    Fields f(*e, "eval");
    auto& x = cfg.eval;
    f.get("zetas", x.zetas);
    f.get("n_samples", x.n_samples);
    f.get("checkpoints", x.checkpoints);
    f.get("landscape_zeta", x.landscape_zeta);
    f.get("n_trials", x.n_trials);
    f.get("n_alphas", x.n_alphas);
    f.get("verify_zetas", x.verify_zetas);
    f.get("histogram_bins", x.histogram_bins);
    f.get("max_examples", x.max_examples);
    f.finish();
    for (double z : x.zetas) require(z >= 0, "eval.zetas: values must be >= 0");
    for (double z : x.verify_zetas) require(z >= 0, "eval.verify_zetas: values must be >= 0");
    require(x.n_samples >= 1, "eval.n_samples must be >= 1");
    require(x.n_alphas >= 3 && x.n_alphas % 2 == 1, "eval.n_alphas must be odd and >= 3");
    require(x.histogram_bins >= 10, "eval.histogram_bins must be >= 10");
  }
  top.finish();
  return cfg;
}

std::vector<std::string> preset_names() {
  return {"fmnist-mlp-desk-v1", "fmnist-cnn-desk-v1", "ecg-srnn-desk-v1", "spike-srnn-desk-v1"};
}

ExperimentConfig preset(const std::string& name) {
  ExperimentConfig c;
  c.preset = name;
  if (name == "fmnist-mlp-desk-v1" || name == "fmnist-cnn-desk-v1") {
    c.task = Task::kFmnist;
    c.data = {0, 9000, 1000, 2000, 0, 0, 10, 1.0, 2};
    if (name == "fmnist-mlp-desk-v1") {
      c.model = MlpConfig{196, {128, 64}, 10};
    } else {
      c.model = CnnConfig{14, 14, 1, {16, 16}, 3, {64}, 10};
    }
    c.train.epochs = 5;
    c.train.batch_size = 64;
  } else if (name == "ecg-srnn-desk-v1") {
    c.task = Task::kSynthEcg;
    c.data = {0, 800, 200, 400, 60, 1, 4, 40.0, 2};
    SrnnConfig s;
    s.inputs = 1;
    s.hidden = 64;
    s.classes = 4;
    c.model = s;
    c.train = default_train_config(c.model);
    c.train.epochs = 30;
    c.train.batch_size = 16;
    c.train.learning_rate = 1e-2;
    c.eval.zetas = {0.0, 0.1, 0.2, 0.3};
  } else if (name == "spike-srnn-desk-v1") {
    c.task = Task::kSynthSpike;
    c.data = {0, 600, 200, 400, 40, 16, 4, 60.0, 2};
    SrnnConfig s;
    s.inputs = 16;
    s.hidden = 64;
    s.classes = 4;
    c.model = s;
    c.train = default_train_config(c.model);
    c.train.epochs = 15;
    c.train.batch_size = 32;
    c.train.learning_rate = 3e-3;
    c.eval.zetas = {0.0, 0.1, 0.2, 0.3};
  } else {
    throw ConfigError("unknown preset '" + name + "'");
  }
  return c;
}

void apply_override(Json& j, const std::string& dotted_path, const std::string& value) {
  if (dotted_path.empty()) throw ConfigError("empty override key");
  Json* node = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = dotted_path.find('.', start);
    const std::string key = dotted_path.substr(start, dot - start);
    if (key.empty()) throw ConfigError("malformed override key '" + dotted_path + "'");
    if (dot == std::string::npos) {
      Json parsed = Json::parse(value, nullptr, false);
      (*node)[key] = parsed.is_discarded() ? Json(value) : parsed;
      return;
    }
    node = &(*node)[key];
    if (!node->is_object() && !node->is_null())
      throw ConfigError("override '" + dotted_path + "' descends into a non-object");
    start = dot + 1;
  }
}

ExperimentConfig load_experiment(const std::filesystem::path* file,
                                 const std::vector<std::pair<std::string, std::string>>& overrides) {
  Json user = Json::object();
  if (file) {
    const auto bytes = read_file(*file);
    user = Json::parse(bytes.begin(), bytes.end(), nullptr, false);
    if (user.is_discarded()) throw ConfigError(file->string() + ": not valid JSON");
    if (!user.is_object()) throw ConfigError(file->string() + ": top level must be an object");
  }
  Json ov = Json::object();
  for (const auto& [k, v] : overrides) apply_override(ov, k, v);

  std::string name = ExperimentConfig{}.preset;
  for (const Json* src : {&user, &ov})
    if (src->contains("experiment") && (*src)["experiment"].contains("preset"))
      name = (*src)["experiment"]["preset"].get<std::string>();
  Json j = to_json(preset(name));
  // A different model type invalidates the preset's model fields.
  for (const Json* src : {&user, &ov})
    if (src->contains("model") && (*src)["model"].contains("type") &&
        (*src)["model"]["type"] != j["model"]["type"])
      j["model"] = Json::object();
  j.merge_patch(user);
  j.merge_patch(ov);
  return experiment_from_json(j);
}

std::string canonical_dump(const ExperimentConfig& cfg) {
  Json j = to_json(cfg);
  j["experiment"].erase("out");
  return j.dump();
}

std::string config_hash(const ExperimentConfig& cfg) { return hex64(fnv1a64(canonical_dump(cfg))); }

}  // namespace mmrt
