// Copyright 2026 The svsmlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "svsm/flops/flops.hpp"

#include <algorithm>

#include "svsm/errors.hpp"

namespace svsm {

std::string to_string(FlopCount v) {
  if (v == 0) return "0";
  std::string s;
  while (v > 0) {
    s.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
    v /= 10;
  }
  std::reverse(s.begin(), s.end());
  return s;
}

std::string to_string(FlopMode m) { return m == FlopMode::paper_constant ? "paper_constant" : "exact"; }

FlopMode parse_flop_mode(const std::string& name) {
  if (name == "paper_constant" || name == "paper") return FlopMode::paper_constant;
  if (name == "exact") return FlopMode::exact;
  throw ConfigError("unknown flop mode '" + name + "' (expected paper_constant or exact)");
}

TokenCounts token_counts(std::uint64_t context_views, std::uint64_t target_views, std::uint64_t height,
                         std::uint64_t width, std::uint64_t patch) {
  if (patch == 0 || height % patch != 0 || width % patch != 0)
    throw ConfigError("patch size does not divide the resolution");
  TokenCounts t;
  t.per_view = (height / patch) * (width / patch);
  t.n = (context_views + 1) * t.per_view;
  t.n_enc = context_views * t.per_view;
  t.n_dec = target_views * t.per_view;
  return t;
}

FlopsBreakdown self_attn_layer_flops(std::uint64_t n, std::uint64_t d, FlopMode mode, std::uint64_t mlp_ratio) {
  return cross_attn_layer_flops(n, n, d, mode, mlp_ratio);
}

FlopsBreakdown cross_attn_layer_flops(std::uint64_t n_q, std::uint64_t n_kv, std::uint64_t d, FlopMode mode,
                                      std::uint64_t mlp_ratio) {
  FlopsBreakdown f;
  f.mode = mode;
  const FlopCount nq = n_q, nkv = n_kv, dd = d;
  f.attn = FlopCount(kAttnConstant) * nq * nkv * dd;
  if (mode == FlopMode::paper_constant) {
    f.mlp_proj = FlopCount(kMlpConstant) * nq * dd * dd;
  } else {
    // Q and O on the queries, K and V on the attended tokens, two MLP products.
    f.mlp_proj = 4 * nq * dd * dd + 4 * nkv * dd * dd + 4 * FlopCount(mlp_ratio) * nq * dd * dd;
  }
  return f;
}

std::uint64_t latent_tokens(const ModelConfig& c, std::uint64_t context_views, std::uint64_t per_view) {
  std::uint64_t n = has_fixed_latent(c.family) ? c.fixed_latent_tokens : context_views * per_view;
  if (c.pose_concat && c.family != Family::lvsm_dec) n += context_views * per_view;
  return n;
}

namespace {

FlopsBreakdown encoder_flops(const ModelConfig& c, const TokenCounts& t, FlopMode mode) {
  FlopsBreakdown f;
  f.mode = mode;
  const std::uint64_t d = c.enc_dim, r = c.mlp_ratio;
  for (std::size_t l = 0; l < c.enc_layers; ++l) {
    switch (c.family) {
      case Family::svsm_encdec:
        if (t.n_enc > 0) f += self_attn_layer_flops(t.n_enc, d, mode, r);
        break;
      case Family::svsm_fixed:
        if (t.n_enc > 0) {
          f += self_attn_layer_flops(t.n_enc, d, mode, r);
          f += cross_attn_layer_flops(c.fixed_latent_tokens, t.n_enc, d, mode, r);
        }
        break;
      case Family::lvsm_encdec:
        f += self_attn_layer_flops(c.fixed_latent_tokens + t.n_enc, d, mode, r);
        break;
      case Family::lvsm_dec:
        break;
    }
  }
  return f;
}

// Decoder work for V_T targets. With `cached_latent` the latent key/value projections
// are excluded (they are computed once per scene and reused).
FlopsBreakdown decoder_flops(const ModelConfig& c, const TokenCounts& t, std::uint64_t context_views,
                             std::uint64_t target_views, FlopMode mode, bool cached_latent) {
  FlopsBreakdown f;
  f.mode = mode;
  const std::uint64_t d = c.dec_dim, r = c.mlp_ratio;
  if (target_views == 0) return f;
  if (c.family == Family::lvsm_dec) {
    return self_attn_layer_flops(t.n, d, mode, r).scaled(FlopCount(c.dec_layers) * target_views);
  }
  const std::uint64_t n_z = latent_tokens(c, context_views, t.per_view);
  if (c.family == Family::lvsm_encdec) {
    // Each target runs its own bidirectional pass over [z; target tokens].
    return self_attn_layer_flops(n_z + t.per_view, d, mode, r).scaled(FlopCount(c.dec_layers) * target_views);
  }
  FlopsBreakdown layer = cross_attn_layer_flops(t.n_dec, n_z, d, mode, r);
  if (cached_latent && mode == FlopMode::exact) layer.mlp_proj -= 4 * FlopCount(n_z) * d * d;
  return layer.scaled(c.dec_layers);
}

}  // namespace

FlopsBreakdown forward_flops(const ModelConfig& c, std::uint64_t context_views, std::uint64_t target_views,
                             std::uint64_t height, std::uint64_t width, FlopMode mode) {
  const TokenCounts t = token_counts(context_views, target_views, height, width, c.patch_size);
  FlopsBreakdown f = encoder_flops(c, t, mode);
  f += decoder_flops(c, t, context_views, target_views, mode, false);
  f.mode = mode;
  return f;
}

FlopsBreakdown decode_flops(const ModelConfig& c, std::uint64_t context_views, std::uint64_t target_views,
                            std::uint64_t height, std::uint64_t width, FlopMode mode) {
  const TokenCounts t = token_counts(context_views, target_views, height, width, c.patch_size);
  FlopsBreakdown f = decoder_flops(c, t, context_views, target_views, mode, true);
  f.mode = mode;
  return f;
}

FlopCount train_flops(const ModelConfig& c, std::uint64_t context_views, std::uint64_t target_views,
                      std::uint64_t batch, std::uint64_t steps, std::uint64_t height, std::uint64_t width,
                      std::uint64_t backward_multiplier, FlopMode mode) {
  if (backward_multiplier < 1) throw ConfigError("backward multiplier must be >= 1");
  return forward_flops(c, context_views, target_views, height, width, mode).total() * FlopCount(batch) * steps *
         backward_multiplier;
}

}  // namespace svsm
