// Copyright 2026 The svsmlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "svsm/tensor/tensor.hpp"

namespace svsm {

// Checkpoint layout (all integers little-endian):
//   "SVSMCKPT"  u32 version  u32 bytes-per-element (4|8)  u32 entry-count
//   per entry: u32 name-length, name bytes, u32 rank, u64 extents[rank], u64 payload offset
//   payload: raw little-endian floats, entries back to back in manifest order
inline constexpr char kCheckpointMagic[8] = {'S', 'V', 'S', 'M', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

template <typename T>
struct NamedTensor {
  std::string name;
  Tensor<T> tensor;
};

template <typename T>
void save_checkpoint(const std::filesystem::path& path, const std::vector<NamedTensor<T>>& tensors);

/// Reads a checkpoint stored in either precision and converts it to T.
template <typename T>
std::vector<NamedTensor<T>> load_checkpoint(const std::filesystem::path& path);

}  // namespace svsm
