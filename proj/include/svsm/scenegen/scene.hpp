// Copyright 2026 The svsmlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "svsm/geometry/geometry.hpp"
#include "svsm/tensor/tensor.hpp"

namespace svsm {

class Rng;

enum class PrimitiveKind : std::uint8_t { sphere, box };

struct Primitive {
  PrimitiveKind kind = PrimitiveKind::sphere;
  Vec3 center{};
  Vec3 size{};  // radius in size[0] for spheres, half-extents for boxes
  Vec3 albedo{};

  bool operator==(const Primitive&) const = default;
};

struct SceneSpec {
  std::uint64_t seed = 0;
  std::vector<Primitive> primitives;
  Vec3 background{};
  Vec3 light_direction{0.0, 0.0, -1.0};  // unit vector pointing towards the light

  bool operator==(const SceneSpec&) const = default;
};

inline constexpr std::size_t kMinPrimitives = 3;
inline constexpr std::size_t kMaxPrimitives = 8;

/// 3 to 8 spheres and boxes with centres in [-0.5, 0.5]³, colours and light drawn from `seed`.
SceneSpec generate_scene(std::uint64_t seed);

/// An image with the camera that produced it. Images are [H, W, 3] in [0, 1].
struct CameraView {
  Tensor<float> image;
  Pose pose;
  Intrinsics intrinsics;
};

/// Camera path shared by all frames of a scene: a look-at orbit around the origin
/// with a slow dolly and bob, sampled at `frames` evenly spaced points.
struct TrajectorySpec {
  std::size_t frames = 24;
  double radius = 1.6;
  double dolly = 0.15;      // relative radius variation along the path
  double arc = 1.2;         // azimuth swept over the whole path, radians
  double elevation = 0.35;  // mean elevation, radians
  double bob = 0.1;         // elevation variation, radians
  double focal = 1.0;
  /// Frames from which one episode draws its views.
  std::size_t window = 24;
};

/// Presets named "stereo", "multiview" and "object". Unknown names raise ConfigError.
TrajectorySpec trajectory_preset(const std::string& name);

/// Poses along the path, with the start azimuth drawn from `seed`. Pose entries are
/// rounded to 32-bit floats so that stored cameras reproduce renders exactly.
std::vector<Pose> trajectory_poses(const TrajectorySpec& spec, std::uint64_t seed);
Intrinsics trajectory_intrinsics(const TrajectorySpec& spec);

/// Rounds every entry to the nearest 32-bit float.
Pose round_to_float(const Pose& p);
Intrinsics round_to_float(const Intrinsics& k);

struct EpisodeIndices {
  std::vector<std::size_t> context;
  std::vector<std::size_t> target;
};

/// Picks a window of `window` consecutive frames uniformly, then V_C + V_T distinct
/// frames inside it uniformly without replacement; the first V_C are context.
/// Throws ConfigError if the window cannot hold V_C + V_T frames.
EpisodeIndices sample_frame_indices(std::size_t frames, std::size_t window, std::size_t context_views,
                                    std::size_t target_views, Rng& rng);

struct Episode {
  std::uint64_t scene_id = 0;
  EpisodeIndices indices;
  std::vector<CameraView> context;
  std::vector<CameraView> target;
};

/// Samples indices along the trajectory and renders the chosen views at H×W.
Episode sample_episode(const SceneSpec& scene, const TrajectorySpec& trajectory, std::size_t context_views,
                       std::size_t target_views, std::size_t height, std::size_t width, Rng& rng);

}  // namespace svsm
