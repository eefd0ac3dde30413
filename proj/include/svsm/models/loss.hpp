// Copyright 2026 The svsmlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "svsm/tensor/tape.hpp"

namespace svsm {

inline constexpr double kPerceptualWeight = 0.5;
inline constexpr std::uint64_t kPerceptualSeed = 20240917;

/// Frozen random convolutional feature extractor standing in for a pretrained perceptual network.
///
/// Three 3×3 convolutions with GELU: 3→8 (stride 1), 8→16 (stride 2), 16→16 (stride 2),
/// zero padding 1, He-normal weights and zero biases drawn from a fixed seed.
template <typename T>
class PerceptualNet {
 public:
  explicit PerceptualNet(std::uint64_t seed = kPerceptualSeed);
  /// Activations after each layer for images [N, H, W, 3].
  std::vector<Var<T>> features(Var<T> images) const;
  /// Shared instance built from kPerceptualSeed.
  static const PerceptualNet& standard();

 private:
  struct Layer {
    Tensor<T> w, b;
    std::size_t stride;
  };
  std::vector<Layer> layers_;
};

/// Σ over layers of mse(φ(pred), φ(gt)).
template <typename T>
Var<T> perceptual_loss(Var<T> pred, Var<T> gt);

/// MSE(pred, gt) + weight·Perceptual(pred, gt).
template <typename T>
Var<T> training_loss(Var<T> pred, Var<T> gt, double perceptual_weight = kPerceptualWeight);

}  // namespace svsm
