// Copyright 2026 The svsmlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace svsm {

enum class Family { lvsm_dec, svsm_encdec, svsm_fixed, lvsm_encdec };
enum class PropeMode { none, encoder, decoder, both };

std::string to_string(Family f);
std::string to_string(PropeMode m);
/// Accepts the canonical names plus the aliases "lvsm" and "svsm".
Family parse_family(const std::string& name);
PropeMode parse_prope_mode(const std::string& name);

/// True for families that encode the context once and decode targets by cross-attention.
bool is_unidirectional(Family f);
/// True for families whose scene latent is a learned array of fixed size.
bool has_fixed_latent(Family f);

struct ModelConfig {
  Family family = Family::svsm_encdec;
  std::size_t enc_dim = 64;
  std::size_t enc_layers = 2;
  std::size_t dec_dim = 64;
  std::size_t dec_layers = 2;
  std::size_t head_dim = 16;
  std::size_t patch_size = 8;
  std::size_t mlp_ratio = 4;
  PropeMode prope = PropeMode::none;
  std::size_t fixed_latent_tokens = 0;
  bool residual_scale = true;
  bool pose_concat = false;

  bool operator==(const ModelConfig&) const = default;

  /// Throws ConfigError naming the offending field.
  void validate() const;
  /// Throws ConfigError unless the patch size divides H and W.
  void validate_resolution(std::size_t height, std::size_t width) const;

  bool uses_encoder() const { return family != Family::lvsm_dec; }
  bool prope_in_encoder() const;
  bool prope_in_decoder() const;
  /// Rays are expressed per camera when every attention layer is PRoPE-equipped, so
  /// pose enters only through relative projections; otherwise they are world-frame.
  bool camera_frame_rays() const;
};

nlohmann::json to_json(const ModelConfig& c);
/// Strict: unknown keys and wrong types raise ConfigError.
ModelConfig model_config_from_json(const nlohmann::json& j);

struct ModelPreset {
  std::string name;
  ModelConfig config;
};

/// Architecture rows used for the published scaling sweeps (patch 16), plus desk-scale
/// counterparts (widths and head widths divided by 8, patch 8) with a "desk-" prefix.
const std::vector<ModelPreset>& model_presets();
/// Throws ConfigError for an unknown name.
ModelConfig model_preset(const std::string& name);

}  // namespace svsm
