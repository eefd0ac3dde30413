// Copyright 2026 The svsmlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <memory>
#include <span>
#include <vector>

#include "svsm/tensor/tape.hpp"

// Differentiable primitives. Every op records a backward rule on the tape of its
// inputs; all inputs of one call must live on the same tape.
namespace svsm::ops {

template <typename T>
using Block4 = std::array<T, 16>;  // row-major 4x4

template <typename T>
Var<T> add(Var<T> a, Var<T> b);
template <typename T>
Var<T> sub(Var<T> a, Var<T> b);
template <typename T>
Var<T> mul(Var<T> a, Var<T> b);
template <typename T>
Var<T> scale(Var<T> x, double s);

/// x[..., k] · w[k, n] -> [..., n].
template <typename T>
Var<T> matmul(Var<T> x, Var<T> w);
/// x[..., k] · w[k, n] + b[n].
template <typename T>
Var<T> linear(Var<T> x, Var<T> w, Var<T> b);
/// Batched product over the leading axis: a[G,m,k]·b[G,k,n], or a·bᵀ with b[G,n,k].
template <typename T>
Var<T> bmm(Var<T> a, Var<T> b, bool transpose_b);

/// GELU, tanh approximation.
template <typename T>
Var<T> gelu(Var<T> x);
template <typename T>
Var<T> sigmoid(Var<T> x);
/// Softmax over the last axis, max-subtracted.
template <typename T>
Var<T> softmax(Var<T> x);
/// Per-row normalisation over the last axis followed by gain/bias.
template <typename T>
Var<T> layer_norm(Var<T> x, Var<T> gain, Var<T> bias, double eps = 1e-5);
/// x + f_x / sqrt(depth).
template <typename T>
Var<T> residual_add(Var<T> x, Var<T> f_x, std::size_t depth);

template <typename T>
Var<T> reshape(Var<T> x, Shape shape);
/// [B, n, h·e] -> [B·h, n, e].
template <typename T>
Var<T> split_heads(Var<T> x, std::size_t heads);
/// [B·h, n, e] -> [B, n, h·e].
template <typename T>
Var<T> merge_heads(Var<T> x, std::size_t heads);
/// Concatenates rank-3 tensors [B, n_i, d] along the token axis.
template <typename T>
Var<T> concat_tokens(std::span<const Var<T>> parts);
/// Tokens [start, start+count) of x[B, n, d].
template <typename T>
Var<T> slice_tokens(Var<T> x, std::size_t start, std::size_t count);
/// x[n, d] -> [B, n, d].
template <typename T>
Var<T> repeat_batch(Var<T> x, std::size_t batch);
/// x[B, n, d] -> [B·copies, n, d], each batch entry repeated `copies` times in place.
template <typename T>
Var<T> repeat_each(Var<T> x, std::size_t copies);

/// Multiplies each consecutive 4-channel group of token t by mats[t].
/// x has shape [..., d] with d % 4 == 0 and numel/d == mats->size().
template <typename T>
Var<T> block4_transform(Var<T> x, std::shared_ptr<const std::vector<Block4<T>>> mats);

/// Token patches x[N, (H/p)(W/p), p·p·C] -> images [N, H, W, C].
template <typename T>
Var<T> unpatchify(Var<T> x, std::size_t height, std::size_t width, std::size_t patch, std::size_t channels);

/// NHWC convolution with zero padding: x[N,H,W,Ci], w[k,k,Ci,Co], b[Co].
template <typename T>
Var<T> conv2d(Var<T> x, Var<T> w, Var<T> b, std::size_t stride, std::size_t pad);

template <typename T>
Var<T> sum(Var<T> x);
template <typename T>
Var<T> mean(Var<T> x);
/// mean((a - b)²) as a scalar.
template <typename T>
Var<T> mse(Var<T> a, Var<T> b);

// Plain (tape-free) helpers shared by ops and tests.
template <typename T>
T gelu_value(T x);

}  // namespace svsm::ops
