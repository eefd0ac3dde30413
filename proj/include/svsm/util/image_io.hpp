// Copyright 2026 The svsmlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>

#include "svsm/tensor/tensor.hpp"

namespace svsm {

/// Writes an [H, W, 3] image with values in [0, 1] as 8-bit RGB PNG (values are clamped).
void write_png(const std::filesystem::path& path, const Tensor<float>& image);
/// Reads an 8-bit RGB or RGBA PNG into [H, W, 3]; FormatError for anything else.
Tensor<float> read_png(const std::filesystem::path& path);

}  // namespace svsm
