// Copyright 2026 The svsmlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "svsm/models/config.hpp"
#include "svsm/scenegen/dataset.hpp"

namespace svsm {

enum class Precision { float32, float64 };
std::string to_string(Precision p);
Precision parse_precision(const std::string& name);

/// Where training views come from: a dataset file, or scenes generated in memory.
/// Held-out evaluation scenes are always generated from `seed` with the held-out tag.
struct DataConfig {
  std::string path;  // empty: generate
  std::uint64_t seed = 0;
  std::uint32_t scenes = 128;
  std::uint32_t height = 32;
  std::uint32_t width = 32;
  std::string trajectory = "multiview";
  std::optional<std::size_t> window;  // overrides the preset's index window

  DatasetSpec dataset_spec() const;
};

struct OptimizerConfig {
  double peak_lr = 4e-4;
  double beta1 = 0.9;
  double beta2 = 0.95;
  double weight_decay = 0.05;
  double eps = 1e-8;
  double warmup_fraction = 0.03;
  std::optional<std::uint64_t> warmup_steps;  // overrides the fraction

  std::uint64_t warmup_for(std::uint64_t total_steps) const;
};

struct ExperimentConfig {
  std::string run_id = "run";
  ModelConfig model;
  DataConfig data;
  std::size_t context_views = 2;
  std::size_t target_views = 6;
  std::size_t batch = 8;
  std::optional<std::size_t> effective_batch;  // declared B·V_T, checked when present
  std::uint64_t steps = 1000;
  std::uint64_t seed = 0;
  Precision precision = Precision::float32;
  std::uint64_t eval_every = 100;
  std::size_t eval_scene_count = 64;
  std::size_t eval_target_views = 2;
  double perceptual_weight = 0.5;
  std::uint64_t backward_multiplier = 3;
  OptimizerConfig optimizer;

  /// ConfigError naming the offending field.
  void validate() const;
};

nlohmann::json to_json(const DataConfig& c);
nlohmann::json to_json(const OptimizerConfig& c);
nlohmann::json to_json(const ExperimentConfig& c);
/// Strict: unknown keys and mistyped values raise ConfigError with the field path.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
/// Parse errors carry line and column.
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// A grid of runs sharing a base configuration.
struct SweepConfig {
  std::string name = "sweep";
  ExperimentConfig base;
  struct ModelEntry {
    std::string label;
    ModelConfig config;
  };
  std::vector<ModelEntry> models;
  std::vector<std::pair<std::size_t, std::size_t>> batches;  // (B, V_T)
  std::vector<std::uint64_t> steps;
  std::size_t workers = 1;

  /// Cross product models × batches × steps with ids "<name>-<label>-b<B>-vt<V_T>-s<steps>".
  std::vector<ExperimentConfig> expand() const;
};

nlohmann::json to_json(const SweepConfig& c);
SweepConfig sweep_config_from_json(const nlohmann::json& j);
SweepConfig load_sweep_config(const std::filesystem::path& path);

/// Reads a JSON document; ConfigError with line and column on a syntax error.
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace svsm
