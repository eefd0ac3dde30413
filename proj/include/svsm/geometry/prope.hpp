// Copyright 2026 The svsmlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>

#include "svsm/geometry/geometry.hpp"
#include "svsm/tensor/tape.hpp"

namespace svsm {

/// Multiplies every consecutive group of 4 channels of every token by P.
/// Throws ConfigError if the channel count is not a multiple of 4.
template <typename T>
Var<T> rho_apply(Var<T> features, const Mat4& p);

/// Attention whose logits and value path depend only on relative projections P_i P_j⁻¹.
///
/// q is [B, n_q, d], k and v are [B, n_kv, d]; `p_q` holds one matrix per query token
/// (B·n_q, batch-major) and `p_kv` one per key/value token (B·n_kv). Queries are
/// transformed by ρ(P_i)ᵀ, keys and values by ρ(P_j)⁻¹ and the attended output by
/// ρ(P_i), so logits equal q_iᵀ ρ(P_i P_j⁻¹) k_j. A singular matrix raises NumericalError
/// naming the token.
template <typename T>
Var<T> prope_attention(Var<T> q, Var<T> k, Var<T> v, std::span<const Mat4> p_q, std::span<const Mat4> p_kv,
                       std::size_t heads);

}  // namespace svsm
