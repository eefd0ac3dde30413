// Copyright 2026 The svsmlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "svsm/tensor/optim.hpp"

#include <cmath>
#include <numbers>

#include "svsm/errors.hpp"

namespace svsm {

double lr_at_step(std::uint64_t step, double peak, std::uint64_t warmup_steps, std::uint64_t total_steps) {
  if (warmup_steps > total_steps) {
    throw ConfigError("warmup steps (" + std::to_string(warmup_steps) + ") exceed total steps (" +
                      std::to_string(total_steps) + ")");
  }
  if (step > total_steps) throw ConfigError("step beyond total_steps");
  if (step < warmup_steps) return peak * static_cast<double>(step) / static_cast<double>(warmup_steps);
  if (total_steps == warmup_steps) return peak;
  const double progress =
      static_cast<double>(step - warmup_steps) / static_cast<double>(total_steps - warmup_steps);
  return 0.5 * peak * (1.0 + std::cos(std::numbers::pi * progress));
}

template <typename T>
AdamW<T>::AdamW(AdamWConfig config, std::vector<ParamRef<T>> params)
    : config_(config), params_(std::move(params)) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const auto& p : params_) {
    if (!p.tensor) throw UsageError("AdamW: null parameter " + p.name);
    m_.emplace_back(p.tensor->shape());
    v_.emplace_back(p.tensor->shape());
  }
}

template <typename T>
void AdamW<T>::step(const Gradients<T>& grads, double lr) {
  std::vector<const Tensor<T>*> ordered;
  ordered.reserve(params_.size());
  for (const auto& p : params_) {
    const Tensor<T>* g = grads.find(*p.tensor);
    if (!g) throw UsageError("AdamW: missing gradient for parameter " + p.name);
    ordered.push_back(g);
  }
  step(ordered, lr);
}

template <typename T>
void AdamW<T>::step(const std::vector<const Tensor<T>*>& grads, double lr) {
  if (grads.size() != params_.size()) throw UsageError("AdamW: gradient count does not match parameters");
  ++step_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Tensor<T>& theta = *params_[i].tensor;
    const Tensor<T>* g = grads[i];
    if (!g) throw UsageError("AdamW: missing gradient for parameter " + params_[i].name);
    if (g->shape() != theta.shape()) {
      throw DimensionError("AdamW: gradient shape " + to_string(g->shape()) + " for parameter " +
                           params_[i].name + " of shape " + to_string(theta.shape()));
    }
    const double decay = params_[i].decay_exempt ? 0.0 : config_.weight_decay;
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t j = 0; j < theta.size(); ++j) {
      const double gj = static_cast<double>((*g)[j]);
      const double mj = b1 * static_cast<double>(m[j]) + (1.0 - b1) * gj;
      const double vj = b2 * static_cast<double>(v[j]) + (1.0 - b2) * gj * gj;
      m[j] = static_cast<T>(mj);
      v[j] = static_cast<T>(vj);
      const double update = (mj / c1) / (std::sqrt(vj / c2) + config_.eps);
      const double th = static_cast<double>(theta[j]);
      theta[j] = static_cast<T>(th - lr * decay * th - lr * update);
    }
  }
}

template class AdamW<float>;
template class AdamW<double>;

}  // namespace svsm
