// Copyright 2026 The svsmlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "svsm/geometry/geometry.hpp"
#include "svsm/tensor/tensor.hpp"

namespace svsm {

/// Image [H, W, C] -> [(H/p)(W/p), p·p·C]; patches in raster order, each patch row-major
/// with channels innermost (the inverse of ops::unpatchify). Throws ConfigError if p does
/// not divide H and W.
template <typename T, typename U>
Tensor<T> patchify_pixels(const Tensor<U>& image, std::size_t patch);

/// Plücker rays of every pixel grouped per patch: [(H/p)(W/p), 6p²].
template <typename T>
Tensor<T> ray_patches(const Pose& pose, const Intrinsics& k, std::size_t height, std::size_t width, std::size_t patch,
                      RayFrame frame);

/// Context token inputs: each patch's pixels followed by its rays, [(H/p)(W/p), 9p²].
template <typename T>
Tensor<T> context_token_inputs(const Tensor<float>& image, const Pose& pose, const Intrinsics& k, std::size_t patch,
                               RayFrame frame);

}  // namespace svsm
