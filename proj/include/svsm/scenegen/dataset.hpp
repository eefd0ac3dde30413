// Copyright 2026 The svsmlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "svsm/scenegen/scene.hpp"

namespace svsm {

// Dataset layout (little-endian):
//   "SVSMDATA"  u32 version  u32 scenes  u32 frames-per-scene  u32 H  u32 W
//   per frame, scene-major: H·W·3 f32 image, 16 f32 pose (row-major), 4 f32 intrinsics (fx fy cx cy)
inline constexpr char kDatasetMagic[8] = {'S', 'V', 'S', 'M', 'D', 'A', 'T', 'A'};
inline constexpr std::uint32_t kDatasetVersion = 1;
inline constexpr std::uint64_t kDatasetHeaderBytes = 8 + 5 * 4;

struct Dataset {
  std::uint32_t scenes = 0;
  std::uint32_t frames = 0;
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::vector<CameraView> views;  // scene-major

  const CameraView& view(std::size_t scene, std::size_t frame) const { return views.at(scene * frames + frame); }
};

/// Bytes occupied by one frame on disk.
std::uint64_t dataset_frame_bytes(std::uint32_t height, std::uint32_t width);

struct DatasetSpec {
  std::uint64_t seed = 0;
  std::uint32_t scenes = 16;
  std::uint32_t height = 32;
  std::uint32_t width = 32;
  TrajectorySpec trajectory;
};

/// Seed of scene `index` in a dataset generated with `base_seed`. Held-out sets use
/// a different stream tag so training and evaluation seeds never coincide.
std::uint64_t scene_seed(std::uint64_t base_seed, std::uint64_t index, bool held_out = false);

/// Renders every frame of every scene. Pure function of `spec`.
Dataset generate_dataset(const DatasetSpec& spec, bool held_out = false);

/// Writes atomically (temp file, then rename).
void write_dataset(const std::filesystem::path& path, const Dataset& data);
/// Validates magic, version and length; any mismatch raises FormatError with the byte offset.
Dataset read_dataset(const std::filesystem::path& path);

}  // namespace svsm
