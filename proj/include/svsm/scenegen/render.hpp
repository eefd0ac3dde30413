// Copyright 2026 The svsmlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "svsm/scenegen/scene.hpp"

namespace svsm {

inline constexpr double kAmbient = 0.2;

/// Ray casts one ray per pixel centre and shades the nearest hit with
/// albedo·(max(0, n·l) + ambient), clamped to [0, 1]. Misses get the background.
Tensor<float> render_view(const SceneSpec& scene, const Pose& pose, const Intrinsics& k, std::size_t height,
                          std::size_t width);

}  // namespace svsm
