// Copyright 2026 The svsmlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "svsm/tensor/tape.hpp"

namespace svsm {

struct AdamWConfig {
  double peak_lr = 4e-4;
  double beta1 = 0.9;
  double beta2 = 0.95;
  double weight_decay = 0.05;
  double eps = 1e-8;
  std::uint64_t warmup_steps = 3000;
};

/// Linear warmup from 0 to `peak` over `warmup_steps`, then cosine decay to 0 at `total_steps`.
double lr_at_step(std::uint64_t step, double peak, std::uint64_t warmup_steps, std::uint64_t total_steps);

/// A trainable tensor as seen by the optimizer.
template <typename T>
struct ParamRef {
  Tensor<T>* tensor;
  std::string name;
  bool decay_exempt;  // normalisation gains and biases
};

/// Adam with decoupled weight decay and bias correction.
///
/// Moments are kept in the parameter precision. One call to step() advances the
/// step counter by one; every registered parameter must have a gradient.
template <typename T>
class AdamW {
 public:
  AdamW(AdamWConfig config, std::vector<ParamRef<T>> params);

  /// Applies one update at learning rate `lr` using gradients keyed by parameter tensor.
  void step(const Gradients<T>& grads, double lr);
  /// Same, with gradients given positionally (one per registered parameter).
  void step(const std::vector<const Tensor<T>*>& grads, double lr);

  std::uint64_t step_count() const noexcept { return step_; }
  const AdamWConfig& config() const noexcept { return config_; }
  const Tensor<T>& first_moment(std::size_t i) const { return m_.at(i); }
  const Tensor<T>& second_moment(std::size_t i) const { return v_.at(i); }

 private:
  AdamWConfig config_;
  std::vector<ParamRef<T>> params_;
  std::vector<Tensor<T>> m_, v_;
  std::uint64_t step_ = 0;
};

extern template class AdamW<float>;
extern template class AdamW<double>;

}  // namespace svsm
