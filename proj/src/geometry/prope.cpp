// Copyright 2026 The svsmlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "svsm/geometry/prope.hpp"

#include <string>

#include "svsm/errors.hpp"
#include "svsm/tensor/nn.hpp"

namespace svsm {
namespace {

template <typename T>
ops::Block4<T> to_block(const Mat4& m) {
  ops::Block4<T> b;
  for (int i = 0; i < 16; ++i) b[i] = static_cast<T>(m[i]);
  return b;
}

template <typename T>
using BlockList = std::shared_ptr<const std::vector<ops::Block4<T>>>;

}  // namespace

template <typename T>
Var<T> rho_apply(Var<T> features, const Mat4& p) {
  const auto& shape = features.shape();
  if (shape.empty()) throw DimensionError("rho_apply: expected at least one axis");
  if (shape.back() % 4 != 0)
    throw ConfigError("rho_apply: feature width " + std::to_string(shape.back()) + " is not divisible by 4");
  const std::size_t tokens = features.value().size() / shape.back();
  return ops::block4_transform<T>(features, std::make_shared<const std::vector<ops::Block4<T>>>(tokens, to_block<T>(p)));
}

template <typename T>
Var<T> prope_attention(Var<T> q, Var<T> k, Var<T> v, std::span<const Mat4> p_q, std::span<const Mat4> p_kv,
                       std::size_t heads) {
  const std::size_t d = q.shape().back();
  if (heads == 0 || d % heads != 0)
    throw ConfigError("prope_attention: " + std::to_string(heads) + " heads do not divide width " + std::to_string(d));
  if ((d / heads) % 4 != 0) throw ConfigError("prope_attention: head width must be divisible by 4");
  if (p_q.size() * d != q.value().size() || p_kv.size() * d != k.value().size())
    throw DimensionError("prope_attention: one projection matrix per token is required");

  auto q_mats = std::make_shared<std::vector<ops::Block4<T>>>();
  auto out_mats = std::make_shared<std::vector<ops::Block4<T>>>();
  auto kv_mats = std::make_shared<std::vector<ops::Block4<T>>>();
  q_mats->reserve(p_q.size());
  out_mats->reserve(p_q.size());
  kv_mats->reserve(p_kv.size());
  for (const auto& p : p_q) {
    q_mats->push_back(to_block<T>(mat4_transpose(p)));
    out_mats->push_back(to_block<T>(p));
  }
  for (std::size_t j = 0; j < p_kv.size(); ++j) {
    try {
      kv_mats->push_back(to_block<T>(mat4_inverse(p_kv[j])));
    } catch (const NumericalError&) {
      throw NumericalError("prope_attention: projection matrix of key token " + std::to_string(j) + " is singular");
    }
  }
  const BlockList<T> kv_shared = kv_mats;
  auto qt = ops::block4_transform<T>(q, q_mats);
  auto kt = ops::block4_transform<T>(k, kv_shared);
  auto vt = ops::block4_transform<T>(v, kv_shared);
  return ops::block4_transform<T>(nn::attention_block(qt, kt, vt, heads), out_mats);
}

template Var<float> rho_apply(Var<float>, const Mat4&);
template Var<double> rho_apply(Var<double>, const Mat4&);
template Var<float> prope_attention(Var<float>, Var<float>, Var<float>, std::span<const Mat4>, std::span<const Mat4>,
                                    std::size_t);
template Var<double> prope_attention(Var<double>, Var<double>, Var<double>, std::span<const Mat4>,
                                     std::span<const Mat4>, std::size_t);

}  // namespace svsm
