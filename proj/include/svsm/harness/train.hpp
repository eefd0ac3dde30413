// Copyright 2026 The svsmlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "svsm/harness/config.hpp"
#include "svsm/models/model.hpp"
#include "svsm/scaling/run_log.hpp"
#include "svsm/scenegen/dataset.hpp"

namespace svsm {

/// Episodes drawn from a dataset: a uniform scene, then views inside its index window.
class EpisodeSource {
 public:
  EpisodeSource(Dataset data, std::size_t window);

  Episode sample(std::size_t context_views, std::size_t target_views, Rng& rng) const;
  Episode episode(std::size_t scene, std::size_t context_views, std::size_t target_views, Rng& rng) const;
  const Dataset& data() const noexcept { return data_; }

 private:
  Dataset data_;
  std::size_t window_;
};

/// Training views: the dataset file when configured, otherwise generated scenes.
Dataset training_dataset(const ExperimentConfig& c);
/// Fixed held-out episodes (one per held-out scene), identical for every run sharing the data seed.
std::vector<Episode> evaluation_episodes(const ExperimentConfig& c);
/// Throws Error when a held-out scene seed coincides with a training scene seed.
void check_held_out_disjoint(const ExperimentConfig& c);

struct EvalMetrics {
  double loss = 0.0;  // training objective on held-out targets
  double mse = 0.0;
  double psnr = 0.0;  // mean over target images
  double ssim = 0.0;
};

template <typename T>
EvalMetrics evaluate(const Model<T>& model, std::span<const Episode> episodes, double perceptual_weight = 0.5);

struct TrainOptions {
  std::function<void(const RunLogRecord&)> on_record;  // called as soon as a record exists
  std::filesystem::path checkpoint;                     // empty: none written
};

struct TrainResult {
  std::vector<RunLogRecord> records;
  std::uint64_t parameters = 0;
  EvalMetrics final_eval;
};

/// Trains one configuration with AdamW (linear warmup, cosine decay). A record is emitted
/// every eval_every steps and at the last step; step 0 is never logged. A non-finite loss
/// emits a record with NaN metrics, then raises NumericalError.
TrainResult train_run(const ExperimentConfig& config, const TrainOptions& options = {});

/// Weights as float32 tensors plus "<path>.json" holding the experiment config.
template <typename T>
void save_model(const std::filesystem::path& path, const Model<T>& model, const ExperimentConfig& config);
struct LoadedModel {
  ExperimentConfig config;
  std::unique_ptr<Model<float>> model;
};
LoadedModel load_model(const std::filesystem::path& path);

}  // namespace svsm
