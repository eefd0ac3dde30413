// Copyright 2026 The svsmlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "svsm/scenegen/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "svsm/errors.hpp"
#include "svsm/scenegen/render.hpp"
#include "svsm/util/random.hpp"

namespace svsm {

SceneSpec generate_scene(std::uint64_t seed) {
  Rng rng(mix_seed(seed, 0x5CE7E));
  SceneSpec s;
  s.seed = seed;
  const auto count = static_cast<std::size_t>(rng.uniform_int(kMinPrimitives, kMaxPrimitives));
  for (std::size_t i = 0; i < count; ++i) {
    Primitive p;
    p.kind = rng.uniform01() < 0.5 ? PrimitiveKind::sphere : PrimitiveKind::box;
    for (auto& c : p.center) c = rng.uniform(-0.5, 0.5);
    if (p.kind == PrimitiveKind::sphere) {
      p.size = {rng.uniform(0.12, 0.3), 0.0, 0.0};
    } else {
      for (auto& h : p.size) h = rng.uniform(0.08, 0.25);
    }
    for (auto& a : p.albedo) a = rng.uniform(0.2, 1.0);
    s.primitives.push_back(p);
  }
  for (auto& b : s.background) b = rng.uniform(0.05, 0.35);
  s.light_direction = normalized({rng.uniform(-1.0, 1.0), rng.uniform(-1.0, -0.3), rng.uniform(-1.0, 1.0)});
  return s;
}

TrajectorySpec trajectory_preset(const std::string& name) {
  TrajectorySpec t;
  if (name == "stereo") {
    // Long, gently curving path; one episode may span the whole clip.
    t.frames = 24;
    t.arc = 1.0;
    t.window = 24;
  } else if (name == "multiview") {
    t.frames = 24;
    t.arc = 2.4;
    t.window = 12;
  } else if (name == "object") {
    t.frames = 32;
    t.arc = 2.0 * std::numbers::pi * 31.0 / 32.0;
    t.bob = 0.25;
    t.window = 32;
  } else {
    throw ConfigError("unknown trajectory preset '" + name + "' (expected stereo, multiview or object)");
  }
  return t;
}

Pose round_to_float(const Pose& p) {
  Mat4 m = p.matrix();
  for (auto& v : m) v = static_cast<double>(static_cast<float>(v));
  return Pose(m);
}

Intrinsics round_to_float(const Intrinsics& k) {
  auto f = [](double v) { return static_cast<double>(static_cast<float>(v)); };
  return {f(k.fx), f(k.fy), f(k.cx), f(k.cy)};
}

std::vector<Pose> trajectory_poses(const TrajectorySpec& spec, std::uint64_t seed) {
  if (spec.frames == 0) throw ConfigError("trajectory needs at least one frame");
  Rng rng(mix_seed(seed, 0x7EA7));
  const double start = rng.uniform(0.0, 2.0 * std::numbers::pi);
  std::vector<Pose> poses;
  poses.reserve(spec.frames);
  for (std::size_t f = 0; f < spec.frames; ++f) {
    const double s = spec.frames > 1 ? static_cast<double>(f) / static_cast<double>(spec.frames - 1) : 0.0;
    const double azimuth = start + spec.arc * (s - 0.5);
    const double elevation = spec.elevation + spec.bob * std::sin(2.0 * std::numbers::pi * s);
    const double r = spec.radius * (1.0 + spec.dolly * std::sin(std::numbers::pi * s));
    // World "up" is -y, matching image rows that grow downwards.
    const Vec3 eye{r * std::cos(elevation) * std::sin(azimuth), -r * std::sin(elevation),
                   -r * std::cos(elevation) * std::cos(azimuth)};
    poses.push_back(round_to_float(Pose::look_at(eye, {0.0, 0.0, 0.0})));
  }
  return poses;
}

Intrinsics trajectory_intrinsics(const TrajectorySpec& spec) {
  return round_to_float(Intrinsics{spec.focal, spec.focal, 0.0, 0.0});
}

EpisodeIndices sample_frame_indices(std::size_t frames, std::size_t window, std::size_t context_views,
                                    std::size_t target_views, Rng& rng) {
  if (context_views == 0 || target_views == 0) throw ConfigError("episodes need V_C >= 1 and V_T >= 1");
  window = std::min(window, frames);
  if (window < context_views + target_views)
    throw ConfigError("trajectory window of " + std::to_string(window) + " frames cannot hold V_C + V_T = " +
                      std::to_string(context_views + target_views) + " distinct views");
  const auto start = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(frames - window)));
  std::vector<std::size_t> pool(window);
  for (std::size_t i = 0; i < window; ++i) pool[i] = start + i;
  // Partial Fisher-Yates.
  const std::size_t need = context_views + target_views;
  for (std::size_t i = 0; i < need; ++i) {
    const auto j = static_cast<std::size_t>(rng.uniform_int(static_cast<std::int64_t>(i), static_cast<std::int64_t>(window - 1)));
    std::swap(pool[i], pool[j]);
  }
  EpisodeIndices out;
  out.context.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(context_views));
  out.target.assign(pool.begin() + static_cast<std::ptrdiff_t>(context_views), pool.begin() + static_cast<std::ptrdiff_t>(need));
  return out;
}

Episode sample_episode(const SceneSpec& scene, const TrajectorySpec& trajectory, std::size_t context_views,
                       std::size_t target_views, std::size_t height, std::size_t width, Rng& rng) {
  const auto poses = trajectory_poses(trajectory, scene.seed);
  const auto k = trajectory_intrinsics(trajectory);
  Episode ep;
  ep.scene_id = scene.seed;
  ep.indices = sample_frame_indices(poses.size(), trajectory.window, context_views, target_views, rng);
  auto view = [&](std::size_t f) { return CameraView{render_view(scene, poses[f], k, height, width), poses[f], k}; };
  for (auto f : ep.indices.context) ep.context.push_back(view(f));
  for (auto f : ep.indices.target) ep.target.push_back(view(f));
  return ep;
}

}  // namespace svsm
