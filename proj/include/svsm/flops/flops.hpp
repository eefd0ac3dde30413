// Copyright 2026 The svsmlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>

#include "svsm/models/config.hpp"

namespace svsm {

/// Exact integer FLOP count. Published-scale training budgets exceed 64 bits.
__extension__ typedef unsigned __int128 FlopCount;

std::string to_string(FlopCount v);
/// Nearest double, for logging and fitting.
inline double to_double(FlopCount v) { return static_cast<double>(v); }

enum class FlopMode {
  paper_constant,  // A·n²·d + B·n·d² with A = 4, B = 16
  exact,           // counted from the operator shapes the models execute
};

std::string to_string(FlopMode m);
FlopMode parse_flop_mode(const std::string& name);

inline constexpr std::uint64_t kAttnConstant = 4;
inline constexpr std::uint64_t kMlpConstant = 16;
inline constexpr std::uint64_t kDefaultBackwardMultiplier = 3;

struct FlopsBreakdown {
  FlopCount attn = 0;      // score and value products, ∝ n²d
  FlopCount mlp_proj = 0;  // QKVO projections and MLP, ∝ nd²
  FlopMode mode = FlopMode::paper_constant;
  std::uint64_t backward_multiplier = 1;

  FlopCount total() const { return attn + mlp_proj; }
  FlopCount train_total() const { return total() * backward_multiplier; }

  FlopsBreakdown& operator+=(const FlopsBreakdown& o) {
    attn += o.attn;
    mlp_proj += o.mlp_proj;
    return *this;
  }
  FlopsBreakdown scaled(FlopCount k) const {
    FlopsBreakdown r = *this;
    r.attn *= k;
    r.mlp_proj *= k;
    return r;
  }
};

struct TokenCounts {
  std::uint64_t per_view = 0;  // (H/p)(W/p)
  std::uint64_t n = 0;         // decoder-only sequence, (V_C+1)·per_view
  std::uint64_t n_enc = 0;     // V_C·per_view
  std::uint64_t n_dec = 0;     // V_T·per_view
};

TokenCounts token_counts(std::uint64_t context_views, std::uint64_t target_views, std::uint64_t height,
                         std::uint64_t width, std::uint64_t patch);

/// One self-attention block over n tokens of width d.
FlopsBreakdown self_attn_layer_flops(std::uint64_t n, std::uint64_t d, FlopMode mode, std::uint64_t mlp_ratio = 4);
/// One block where n_q query tokens attend to n_kv other tokens, followed by the MLP on the queries.
FlopsBreakdown cross_attn_layer_flops(std::uint64_t n_q, std::uint64_t n_kv, std::uint64_t d, FlopMode mode,
                                      std::uint64_t mlp_ratio = 4);

/// Number of scene-latent tokens the decoder attends to.
std::uint64_t latent_tokens(const ModelConfig& c, std::uint64_t context_views, std::uint64_t per_view);

/// Forward FLOPs for one scene with V_C context and V_T target views. Tokenizer, output
/// head, norms and the encoder-to-decoder bridge are excluded.
FlopsBreakdown forward_flops(const ModelConfig& c, std::uint64_t context_views, std::uint64_t target_views,
                             std::uint64_t height, std::uint64_t width, FlopMode mode = FlopMode::paper_constant);

/// Per-iteration rendering cost once the scene latent exists: the full forward for the
/// decoder-only family; for the others the decoder with cached latent keys and values.
FlopsBreakdown decode_flops(const ModelConfig& c, std::uint64_t context_views, std::uint64_t target_views,
                            std::uint64_t height, std::uint64_t width, FlopMode mode = FlopMode::paper_constant);

/// B·steps·forward·backward_multiplier.
FlopCount train_flops(const ModelConfig& c, std::uint64_t context_views, std::uint64_t target_views,
                      std::uint64_t batch, std::uint64_t steps, std::uint64_t height, std::uint64_t width,
                      std::uint64_t backward_multiplier = kDefaultBackwardMultiplier,
                      FlopMode mode = FlopMode::paper_constant);

}  // namespace svsm
