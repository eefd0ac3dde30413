// Copyright 2026 The svsmlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "svsm/tensor/tensor.hpp"

namespace svsm {

inline constexpr double kPsnrCap = 99.0;

/// Images are [H, W, 3] with values in [0, 1].
template <typename T>
double image_mse(const Tensor<T>& a, const Tensor<T>& b);

/// 10·log10(1/mse), capped at kPsnrCap (and equal to it at mse = 0).
double psnr_from_mse(double mse);

/// SSIM on BT.601 luminance with a Gaussian window (σ = 1.5, side min(11, H, W) rounded
/// down to odd), valid-region averaging and the standard constants for a unit range.
template <typename T>
double ssim(const Tensor<T>& a, const Tensor<T>& b);

}  // namespace svsm
