// Copyright 2026 The svsmlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "svsm/models/loss.hpp"

#include <cmath>

#include "svsm/tensor/ops.hpp"
#include "svsm/util/random.hpp"

namespace svsm {

template <typename T>
PerceptualNet<T>::PerceptualNet(std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t channels[4] = {3, 8, 16, 16};
  const std::size_t strides[3] = {1, 2, 2};
  for (std::size_t l = 0; l < 3; ++l) {
    const std::size_t ci = channels[l], co = channels[l + 1];
    Tensor<T> w({3, 3, ci, co});
    const double std = std::sqrt(2.0 / static_cast<double>(9 * ci));
    for (auto& v : w.storage()) v = static_cast<T>(std * rng.normal());
    layers_.push_back({std::move(w), Tensor<T>({co}), strides[l]});
  }
}

template <typename T>
std::vector<Var<T>> PerceptualNet<T>::features(Var<T> images) const {
  std::vector<Var<T>> out;
  Var<T> x = images;
  for (const auto& layer : layers_) {
    x = ops::gelu(ops::conv2d(x, x.tape().input(layer.w), x.tape().input(layer.b), layer.stride, 1));
    out.push_back(x);
  }
  return out;
}

template <typename T>
const PerceptualNet<T>& PerceptualNet<T>::standard() {
  static const PerceptualNet net(kPerceptualSeed);
  return net;
}

template <typename T>
Var<T> perceptual_loss(Var<T> pred, Var<T> gt) {
  const auto& net = PerceptualNet<T>::standard();
  const auto fp = net.features(pred);
  const auto fg = net.features(gt);
  Var<T> total = ops::mse(fp[0], fg[0]);
  for (std::size_t l = 1; l < fp.size(); ++l) total = ops::add(total, ops::mse(fp[l], fg[l]));
  return total;
}

template <typename T>
Var<T> training_loss(Var<T> pred, Var<T> gt, double perceptual_weight) {
  Var<T> loss = ops::mse(pred, gt);
  if (perceptual_weight != 0.0) loss = ops::add(loss, ops::scale(perceptual_loss(pred, gt), perceptual_weight));
  return loss;
}

template class PerceptualNet<float>;
template class PerceptualNet<double>;
template Var<float> perceptual_loss(Var<float>, Var<float>);
template Var<double> perceptual_loss(Var<double>, Var<double>);
template Var<float> training_loss(Var<float>, Var<float>, double);
template Var<double> training_loss(Var<double>, Var<double>, double);

}  // namespace svsm
