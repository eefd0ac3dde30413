// Copyright 2026 The svsmlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>

#include "svsm/models/model.hpp"
#include "svsm/scenegen/scene.hpp"

namespace svsm {

struct BenchOptions {
  std::size_t batch = 8;         // scenes per iteration
  std::size_t target_views = 1;  // per scene
  std::size_t warmup = 5;
  std::size_t iterations = 20;
  std::uint64_t seed = 0;
  std::string trajectory = "multiview";
};

struct BenchResult {
  std::string family;
  std::size_t context_views = 0;
  std::size_t batch = 0;
  std::size_t target_views = 0;
  std::size_t iterations = 0;
  double mean_t_iter = 0.0;  // seconds
  double std_t_iter = 0.0;
  double fps = 0.0;          // batch·target_views / mean_t_iter
  bool unstable = false;     // std above 20% of the mean
};

/// Times the per-iteration rendering path. Decoder-only models run one full pass per target;
/// the encoder families encode each scene once before timing and time decoding only.
/// ConfigError for fewer than 5 warmup or 20 timed iterations.
template <typename T>
BenchResult bench_render(const Model<T>& model, std::size_t context_views, const BenchOptions& options = {});

/// Frames per second for a batch rendered in `t_iter` seconds.
double frames_per_second(std::size_t batch, std::size_t target_views, double t_iter);

}  // namespace svsm
