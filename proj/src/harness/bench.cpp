// Copyright 2026 The svsmlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "svsm/harness/bench.hpp"

#include <chrono>
#include <cmath>

#include "svsm/errors.hpp"
#include "svsm/util/random.hpp"

namespace svsm {

double frames_per_second(std::size_t batch, std::size_t target_views, double t_iter) {
  if (!(t_iter > 0.0)) throw DomainError("iteration time must be positive");
  return double(batch * target_views) / t_iter;
}

template <typename T>
BenchResult bench_render(const Model<T>& model, std::size_t context_views, const BenchOptions& options) {
  if (options.warmup < 5) throw ConfigError("bench needs at least 5 warmup iterations");
  if (options.iterations < 20) throw ConfigError("bench needs at least 20 timed iterations");
  if (options.batch < 1 || options.target_views < 1 || context_views < 1)
    throw ConfigError("bench needs batch, V_C and V_T of at least 1");

  TrajectorySpec traj = trajectory_preset(options.trajectory);
  traj.window = std::max(traj.window, context_views + options.target_views);
  traj.frames = std::max(traj.frames, traj.window);
  Rng rng(mix_seed(options.seed, 0xBE7C4ULL));
  std::vector<Episode> episodes;
  std::vector<std::vector<Camera>> targets;
  for (std::size_t b = 0; b < options.batch; ++b) {
    episodes.push_back(sample_episode(generate_scene(mix_seed(options.seed, b)), traj, context_views,
                                      options.target_views, model.height(), model.width(), rng));
    std::vector<Camera> cams;
    for (const auto& v : episodes.back().target) cams.push_back({v.pose, v.intrinsics});
    targets.push_back(std::move(cams));
  }

  const bool decoder_only = !model.config().uses_encoder();
  std::vector<SceneLatent<T>> latents;
  if (!decoder_only)
    for (const auto& ep : episodes) latents.push_back(model.encode(ep.context));

  auto iteration = [&] {
    for (std::size_t b = 0; b < options.batch; ++b) {
      if (decoder_only)
        model.render(episodes[b].context, targets[b]);
      else
        model.decode(latents[b], targets[b]);
    }
  };
  for (std::size_t i = 0; i < options.warmup; ++i) iteration();
  std::vector<double> times;
  for (std::size_t i = 0; i < options.iterations; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    iteration();
    times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  double mean = 0.0;
  for (double t : times) mean += t;
  mean /= double(times.size());
  double var = 0.0;
  for (double t : times) var += (t - mean) * (t - mean);
  var /= double(times.size() - 1);

  BenchResult r;
  r.family = to_string(model.config().family);
  r.context_views = context_views;
  r.batch = options.batch;
  r.target_views = options.target_views;
  r.iterations = options.iterations;
  r.mean_t_iter = mean;
  r.std_t_iter = std::sqrt(var);
  r.fps = frames_per_second(options.batch, options.target_views, mean);
  r.unstable = r.std_t_iter > 0.2 * mean;
  return r;
}

template BenchResult bench_render(const Model<float>&, std::size_t, const BenchOptions&);
template BenchResult bench_render(const Model<double>&, std::size_t, const BenchOptions&);

}  // namespace svsm
