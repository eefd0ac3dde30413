// Copyright 2026 The svsmlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "svsm/tensor/nn.hpp"

#include <cmath>

#include "svsm/errors.hpp"

namespace svsm::nn {

template <typename T>
Var<T> attention_block(Var<T> q, Var<T> k, Var<T> v, std::size_t heads) {
  const auto& qs = q.shape();
  const auto& ks = k.shape();
  const auto& vs = v.shape();
  if (qs.size() != ks.size() || ks != vs || (qs.size() != 2 && qs.size() != 3)) {
    throw DimensionError("attention_block: q " + to_string(qs) + ", k " + to_string(ks) + ", v " + to_string(vs));
  }
  const bool unbatched = qs.size() == 2;
  if (unbatched) {
    q = ops::reshape(q, {1, qs[0], qs[1]});
    k = ops::reshape(k, {1, ks[0], ks[1]});
    v = ops::reshape(v, {1, vs[0], vs[1]});
  }
  const auto& q3 = q.shape();
  const auto& k3 = k.shape();
  if (q3[0] != k3[0] || q3[2] != k3[2]) {
    throw DimensionError("attention_block: q " + to_string(q3) + " incompatible with k " + to_string(k3));
  }
  const std::size_t d = q3[2];
  if (heads == 0 || d % heads != 0) {
    throw ConfigError("attention_block: " + std::to_string(heads) + " heads do not divide width " +
                      std::to_string(d));
  }
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(d / heads));
  auto qh = ops::split_heads(q, heads);
  auto kh = ops::split_heads(k, heads);
  auto vh = ops::split_heads(v, heads);
  auto probs = ops::softmax(ops::scale(ops::bmm(qh, kh, /*transpose_b=*/true), inv_sqrt));
  auto out = ops::merge_heads(ops::bmm(probs, vh, /*transpose_b=*/false), heads);
  if (unbatched) out = ops::reshape(out, {qs[0], qs[1]});
  return out;
}

template <typename T>
Var<T> mlp_block(Var<T> x, const MlpWeights<T>& w) {
  return ops::linear(ops::gelu(ops::linear(x, w.w1, w.b1)), w.w2, w.b2);
}

template Var<float> attention_block(Var<float>, Var<float>, Var<float>, std::size_t);
template Var<double> attention_block(Var<double>, Var<double>, Var<double>, std::size_t);
template Var<float> mlp_block(Var<float>, const MlpWeights<float>&);
template Var<double> mlp_block(Var<double>, const MlpWeights<double>&);

}  // namespace svsm::nn
