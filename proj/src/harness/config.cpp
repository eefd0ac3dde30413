// Copyright 2026 The svsmlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "svsm/harness/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "svsm/errors.hpp"

namespace svsm {

std::string to_string(Precision p) { return p == Precision::float32 ? "float32" : "float64"; }

Precision parse_precision(const std::string& name) {
  if (name == "float32" || name == "f32") return Precision::float32;
  if (name == "float64" || name == "f64") return Precision::float64;
  throw ConfigError("unknown precision '" + name + "' (expected float32 or float64)");
}

DatasetSpec DataConfig::dataset_spec() const {
  DatasetSpec s;
  s.seed = seed;
  s.scenes = scenes;
  s.height = height;
  s.width = width;
  s.trajectory = trajectory_preset(trajectory);
  if (window) s.trajectory.window = *window;
  return s;
}

std::uint64_t OptimizerConfig::warmup_for(std::uint64_t total_steps) const {
  if (warmup_steps) return *warmup_steps;
  return static_cast<std::uint64_t>(std::llround(warmup_fraction * static_cast<double>(total_steps)));
}

void ExperimentConfig::validate() const {
  if (run_id.empty()) throw ConfigError("run_id must not be empty");
  if (run_id.find_first_of("/\\ \t\n") != std::string::npos)
    throw ConfigError("run_id '" + run_id + "' must not contain path separators or whitespace");
  model.validate();
  model.validate_resolution(data.height, data.width);
  if (context_views < 1) throw ConfigError("context_views must be at least 1");
  if (target_views < 1) throw ConfigError("target_views must be at least 1");
  if (batch < 1) throw ConfigError("batch must be at least 1");
  if (effective_batch && *effective_batch != batch * target_views)
    throw ConfigError("effective_batch " + std::to_string(*effective_batch) + " differs from batch·target_views = " +
                      std::to_string(batch * target_views));
  if (steps < 1) throw ConfigError("steps must be at least 1");
  if (eval_every < 1) throw ConfigError("eval_every must be at least 1");
  if (eval_scene_count < 1) throw ConfigError("eval_scene_count must be at least 1");
  if (eval_target_views < 1) throw ConfigError("eval_target_views must be at least 1");
  if (!(perceptual_weight >= 0.0) || !std::isfinite(perceptual_weight))
    throw ConfigError("perceptual_weight must be finite and non-negative");
  if (backward_multiplier < 1) throw ConfigError("backward_multiplier must be at least 1");
  if (data.scenes < 1) throw ConfigError("data.scenes must be at least 1");
  const auto traj = data.dataset_spec().trajectory;
  if (traj.window > traj.frames) throw ConfigError("data.window exceeds the trajectory length");
  if (context_views + std::max(target_views, eval_target_views) > traj.window)
    throw ConfigError("context_views + target_views exceed the index window of " + std::to_string(traj.window));
  if (!(optimizer.peak_lr > 0.0) || !std::isfinite(optimizer.peak_lr))
    throw ConfigError("optimizer.peak_lr must be finite and positive");
  if (!(optimizer.weight_decay >= 0.0) || !(optimizer.eps > 0.0))
    throw ConfigError("optimizer.weight_decay must be non-negative and eps positive");
  if (optimizer.beta1 < 0.0 || optimizer.beta1 >= 1.0 || optimizer.beta2 < 0.0 || optimizer.beta2 >= 1.0)
    throw ConfigError("optimizer betas must lie in [0, 1)");
  if (optimizer.warmup_fraction < 0.0 || optimizer.warmup_fraction > 1.0)
    throw ConfigError("optimizer.warmup_fraction must lie in [0, 1]");
  if (optimizer.warmup_for(steps) > steps) throw ConfigError("optimizer.warmup_steps exceeds steps");
}

namespace {

// Strict object reader: every key must be consumed, errors name the full field path.
class Reader {
 public:
  Reader(const nlohmann::json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + " must be a JSON object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }
  const nlohmann::json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }
  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  template <typename T>
  void count(const std::string& key, T& out) {
    if (!has(key)) return;
    const auto& v = raw(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) throw ConfigError(field(key) + " must be a non-negative integer");
    out = v.get<T>();
  }
  template <typename T>
  void count(const std::string& key, std::optional<T>& out) {
    if (!has(key)) return;
    T v{};
    count(key, v);
    out = v;
  }
  void real(const std::string& key, double& out) {
    if (!has(key)) return;
    const auto& v = raw(key);
    if (!v.is_number()) throw ConfigError(field(key) + " must be a number");
    out = v.get<double>();
  }
  void text(const std::string& key, std::string& out) {
    if (!has(key)) return;
    const auto& v = raw(key);
    if (!v.is_string()) throw ConfigError(field(key) + " must be a string");
    out = v.get<std::string>();
  }

  void finish() const {
    for (const auto& [key, _] : j_.items())
      if (!seen_.count(key)) throw ConfigError("unknown key '" + field(key) + "'");
  }

 private:
  std::string where() const { return path_.empty() ? "config" : path_; }

  const nlohmann::json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

DataConfig data_from_json(const nlohmann::json& j) {
  Reader r(j, "data");
  DataConfig c;
  r.text("path", c.path);
  r.count("seed", c.seed);
  r.count("scenes", c.scenes);
  r.count("height", c.height);
  r.count("width", c.width);
  r.text("trajectory", c.trajectory);
  r.count("window", c.window);
  r.finish();
  trajectory_preset(c.trajectory);
  return c;
}

OptimizerConfig optimizer_from_json(const nlohmann::json& j) {
  Reader r(j, "optimizer");
  OptimizerConfig c;
  r.real("peak_lr", c.peak_lr);
  r.real("beta1", c.beta1);
  r.real("beta2", c.beta2);
  r.real("weight_decay", c.weight_decay);
  r.real("eps", c.eps);
  r.real("warmup_fraction", c.warmup_fraction);
  r.count("warmup_steps", c.warmup_steps);
  r.finish();
  return c;
}

// A model is either an object or the name of a preset.
ModelConfig model_from(Reader& r, const std::string& key) {
  try {
    const auto& v = r.raw(key);
    if (v.is_string()) return model_preset(v.get<std::string>());
    return model_config_from_json(v);
  } catch (const ConfigError& e) {
    throw ConfigError(r.field(key) + ": " + e.what());
  }
}

}  // namespace

nlohmann::json to_json(const DataConfig& c) {
  nlohmann::json j = {{"path", c.path},       {"seed", c.seed},   {"scenes", c.scenes},
                      {"height", c.height},   {"width", c.width}, {"trajectory", c.trajectory}};
  if (c.window) j["window"] = *c.window;
  return j;
}

nlohmann::json to_json(const OptimizerConfig& c) {
  nlohmann::json j = {{"peak_lr", c.peak_lr},           {"beta1", c.beta1}, {"beta2", c.beta2},
                      {"weight_decay", c.weight_decay}, {"eps", c.eps},     {"warmup_fraction", c.warmup_fraction}};
  if (c.warmup_steps) j["warmup_steps"] = *c.warmup_steps;
  return j;
}

nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json j = {{"run_id", c.run_id},
                      {"model", to_json(c.model)},
                      {"data", to_json(c.data)},
                      {"context_views", c.context_views},
                      {"target_views", c.target_views},
                      {"batch", c.batch},
                      {"steps", c.steps},
                      {"seed", c.seed},
                      {"precision", to_string(c.precision)},
                      {"eval_every", c.eval_every},
                      {"eval_scene_count", c.eval_scene_count},
                      {"eval_target_views", c.eval_target_views},
                      {"perceptual_weight", c.perceptual_weight},
                      {"backward_multiplier", c.backward_multiplier},
                      {"optimizer", to_json(c.optimizer)}};
  if (c.effective_batch) j["effective_batch"] = *c.effective_batch;
  return j;
}

namespace {

void experiment_fields(Reader& r, ExperimentConfig& c) {
  r.text("run_id", c.run_id);
  if (r.has("model")) c.model = model_from(r, "model");
  if (r.has("data")) c.data = data_from_json(r.raw("data"));
  r.count("context_views", c.context_views);
  r.count("target_views", c.target_views);
  r.count("batch", c.batch);
  r.count("effective_batch", c.effective_batch);
  r.count("steps", c.steps);
  r.count("seed", c.seed);
  if (r.has("precision")) {
    std::string p;
    r.text("precision", p);
    c.precision = parse_precision(p);
  }
  r.count("eval_every", c.eval_every);
  r.count("eval_scene_count", c.eval_scene_count);
  r.count("eval_target_views", c.eval_target_views);
  r.real("perceptual_weight", c.perceptual_weight);
  r.count("backward_multiplier", c.backward_multiplier);
  if (r.has("optimizer")) c.optimizer = optimizer_from_json(r.raw("optimizer"));
}

}  // namespace

ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  Reader r(j, "");
  ExperimentConfig c;
  experiment_fields(r, c);
  r.finish();
  c.validate();
  return c;
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file " + path.string());
  std::stringstream buf;
  buf << is.rdbuf();
  const std::string text = buf.str();
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError(path.string() + ":" + std::to_string(line) + ":" + std::to_string(col) + ": invalid JSON");
  }
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  const auto j = read_json_file(path);
  try {
    return experiment_config_from_json(j);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::vector<ExperimentConfig> SweepConfig::expand() const {
  std::vector<ExperimentConfig> out;
  const auto models_used = models.empty() ? std::vector<ModelEntry>{{"base", base.model}} : models;
  const auto batches_used =
      batches.empty() ? std::vector<std::pair<std::size_t, std::size_t>>{{base.batch, base.target_views}} : batches;
  const auto steps_used = steps.empty() ? std::vector<std::uint64_t>{base.steps} : steps;
  std::set<std::string> ids;
  for (const auto& m : models_used) {
    for (const auto& [b, vt] : batches_used) {
      for (std::uint64_t s : steps_used) {
        ExperimentConfig c = base;
        c.model = m.config;
        c.batch = b;
        c.target_views = vt;
        c.effective_batch.reset();
        c.steps = s;
        c.run_id = name + "-" + m.label + "-b" + std::to_string(b) + "-vt" + std::to_string(vt) + "-s" +
                   std::to_string(s);
        if (!ids.insert(c.run_id).second) throw ConfigError("duplicate run id '" + c.run_id + "' in sweep");
        c.validate();
        out.push_back(std::move(c));
      }
    }
  }
  return out;
}

nlohmann::json to_json(const SweepConfig& c) {
  nlohmann::json models = nlohmann::json::array();
  for (const auto& m : c.models) models.push_back({{"label", m.label}, {"model", to_json(m.config)}});
  nlohmann::json batches = nlohmann::json::array();
  for (const auto& [b, vt] : c.batches) batches.push_back({b, vt});
  return {{"name", c.name}, {"base", to_json(c.base)}, {"models", models},
          {"batches", batches}, {"steps", c.steps},    {"workers", c.workers}};
}

SweepConfig sweep_config_from_json(const nlohmann::json& j) {
  Reader r(j, "");
  SweepConfig c;
  r.text("name", c.name);
  if (c.name.empty() || c.name.find_first_of("/\\ \t\n") != std::string::npos)
    throw ConfigError("name must be non-empty without path separators or whitespace");
  if (r.has("base")) {
    Reader b(r.raw("base"), "base");
    experiment_fields(b, c.base);
    b.finish();
  }
  if (r.has("models")) {
    const auto& arr = r.raw("models");
    if (!arr.is_array()) throw ConfigError("models must be an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const auto& e = arr[i];
      const std::string where = "models[" + std::to_string(i) + "]";
      if (e.is_string()) {
        c.models.push_back({e.get<std::string>(), model_preset(e.get<std::string>())});
        continue;
      }
      Reader m(e, where);
      SweepConfig::ModelEntry entry;
      m.text("label", entry.label);
      if (entry.label.empty()) throw ConfigError(where + ".label is required");
      if (!m.has("model")) throw ConfigError(where + ".model is required");
      entry.config = model_from(m, "model");
      m.finish();
      c.models.push_back(std::move(entry));
    }
  }
  if (r.has("batches")) {
    const auto& arr = r.raw("batches");
    if (!arr.is_array()) throw ConfigError("batches must be an array of [B, V_T] pairs");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const auto& e = arr[i];
      if (!e.is_array() || e.size() != 2 || !e[0].is_number_unsigned() || !e[1].is_number_unsigned())
        throw ConfigError("batches[" + std::to_string(i) + "] must be [B, V_T]");
      c.batches.emplace_back(e[0].get<std::size_t>(), e[1].get<std::size_t>());
    }
  }
  if (r.has("steps")) {
    const auto& arr = r.raw("steps");
    if (!arr.is_array()) throw ConfigError("steps must be an array");
    for (const auto& s : arr) {
      if (!s.is_number_unsigned()) throw ConfigError("steps entries must be positive integers");
      c.steps.push_back(s.get<std::uint64_t>());
    }
  }
  r.count("workers", c.workers);
  if (c.workers < 1) throw ConfigError("workers must be at least 1");
  r.finish();
  c.expand();
  return c;
}

SweepConfig load_sweep_config(const std::filesystem::path& path) {
  const auto j = read_json_file(path);
  try {
    return sweep_config_from_json(j);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace svsm
