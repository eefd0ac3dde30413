// Copyright 2026 The svsmlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "svsm/tensor/ops.hpp"

namespace svsm::nn {

/// Multi-head scaled dot-product attention over already-projected inputs.
///
/// q is [B, n_q, d] (or [n_q, d]), k and v are [B, n_kv, d]. Each head computes
/// softmax(Q Kᵀ / sqrt(d_head)) V over its slice of the channels. Self-attention
/// is the case where q, k and v come from the same tokens.
template <typename T>
Var<T> attention_block(Var<T> q, Var<T> k, Var<T> v, std::size_t heads);

/// Parameters of a two-layer perceptron d -> ratio·d -> d.
template <typename T>
struct MlpWeights {
  Var<T> w1, b1, w2, b2;
};

/// linear -> GELU -> linear.
template <typename T>
Var<T> mlp_block(Var<T> x, const MlpWeights<T>& w);

}  // namespace svsm::nn
