// Copyright 2026 The svsmlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "svsm/models/config.hpp"

#include <set>

#include "svsm/errors.hpp"

namespace svsm {

std::string to_string(Family f) {
  switch (f) {
    case Family::lvsm_dec: return "lvsm_dec";
    case Family::svsm_encdec: return "svsm_encdec";
    case Family::svsm_fixed: return "svsm_fixed";
    case Family::lvsm_encdec: return "lvsm_encdec";
  }
  return "?";
}

std::string to_string(PropeMode m) {
  switch (m) {
    case PropeMode::none: return "none";
    case PropeMode::encoder: return "encoder";
    case PropeMode::decoder: return "decoder";
    case PropeMode::both: return "both";
  }
  return "?";
}

Family parse_family(const std::string& name) {
  if (name == "lvsm_dec" || name == "lvsm") return Family::lvsm_dec;
  if (name == "svsm_encdec" || name == "svsm") return Family::svsm_encdec;
  if (name == "svsm_fixed") return Family::svsm_fixed;
  if (name == "lvsm_encdec") return Family::lvsm_encdec;
  throw ConfigError("unknown model family '" + name + "' (expected lvsm_dec, svsm_encdec, svsm_fixed or lvsm_encdec)");
}

PropeMode parse_prope_mode(const std::string& name) {
  if (name == "none") return PropeMode::none;
  if (name == "encoder") return PropeMode::encoder;
  if (name == "decoder") return PropeMode::decoder;
  if (name == "both") return PropeMode::both;
  throw ConfigError("unknown prope mode '" + name + "' (expected none, encoder, decoder or both)");
}

bool is_unidirectional(Family f) { return f == Family::svsm_encdec || f == Family::svsm_fixed; }
bool has_fixed_latent(Family f) { return f == Family::svsm_fixed || f == Family::lvsm_encdec; }

bool ModelConfig::prope_in_encoder() const {
  // The decoder-only model has a single stack; any mode other than none enables it there.
  if (family == Family::lvsm_dec) return false;
  return prope == PropeMode::encoder || prope == PropeMode::both;
}

bool ModelConfig::prope_in_decoder() const {
  if (family == Family::lvsm_dec) return prope != PropeMode::none;
  return prope == PropeMode::decoder || prope == PropeMode::both;
}

bool ModelConfig::camera_frame_rays() const {
  if (family == Family::lvsm_dec) return prope != PropeMode::none;
  return prope == PropeMode::both;
}

void ModelConfig::validate() const {
  auto positive = [](std::size_t v, const char* field) {
    if (v == 0) throw ConfigError(std::string("model.") + field + " must be >= 1");
  };
  positive(dec_dim, "dec_dim");
  positive(dec_layers, "dec_layers");
  positive(head_dim, "head_dim");
  positive(patch_size, "patch_size");
  positive(mlp_ratio, "mlp_ratio");
  if (dec_dim % head_dim != 0) throw ConfigError("model.dec_dim must be divisible by model.head_dim");
  if (uses_encoder()) {
    positive(enc_dim, "enc_dim");
    positive(enc_layers, "enc_layers");
    if (enc_dim % head_dim != 0) throw ConfigError("model.enc_dim must be divisible by model.head_dim");
  }
  if (prope != PropeMode::none && head_dim % 4 != 0)
    throw ConfigError("model.head_dim must be divisible by 4 when prope is enabled");
  if (has_fixed_latent(family) && fixed_latent_tokens == 0)
    throw ConfigError("model.fixed_latent_tokens must be >= 1 for family " + to_string(family));
  if (family == Family::lvsm_encdec && enc_dim != dec_dim)
    throw ConfigError("model.enc_dim must equal model.dec_dim for lvsm_encdec");
}

void ModelConfig::validate_resolution(std::size_t height, std::size_t width) const {
  if (height == 0 || width == 0 || height % patch_size != 0 || width % patch_size != 0)
    throw ConfigError("patch size " + std::to_string(patch_size) + " does not divide resolution " +
                      std::to_string(height) + "x" + std::to_string(width));
}

nlohmann::json to_json(const ModelConfig& c) {
  return {{"family", to_string(c.family)},
          {"enc_dim", c.enc_dim},
          {"enc_layers", c.enc_layers},
          {"dec_dim", c.dec_dim},
          {"dec_layers", c.dec_layers},
          {"head_dim", c.head_dim},
          {"patch_size", c.patch_size},
          {"mlp_ratio", c.mlp_ratio},
          {"prope", to_string(c.prope)},
          {"fixed_latent_tokens", c.fixed_latent_tokens},
          {"residual_scale", c.residual_scale},
          {"pose_concat", c.pose_concat}};
}

namespace {

std::size_t get_count(const nlohmann::json& j, const std::string& key) {
  const auto& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw ConfigError("model." + key + " must be a non-negative integer");
  return v.get<std::size_t>();
}

bool get_bool(const nlohmann::json& j, const std::string& key) {
  const auto& v = j.at(key);
  if (!v.is_boolean()) throw ConfigError("model." + key + " must be a boolean");
  return v.get<bool>();
}

std::string get_string(const nlohmann::json& j, const std::string& key) {
  const auto& v = j.at(key);
  if (!v.is_string()) throw ConfigError("model." + key + " must be a string");
  return v.get<std::string>();
}

}  // namespace

ModelConfig model_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("model must be a JSON object");
  static const std::set<std::string> known{"family",     "enc_dim",   "enc_layers", "dec_dim",
                                           "dec_layers", "head_dim",  "patch_size", "mlp_ratio",
                                           "prope",      "fixed_latent_tokens", "residual_scale", "pose_concat",
                                           "preset"};
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) throw ConfigError("unknown key 'model." + key + "'");
  ModelConfig c;
  if (j.contains("preset")) c = model_preset(get_string(j, "preset"));
  if (j.contains("family")) c.family = parse_family(get_string(j, "family"));
  if (j.contains("enc_dim")) c.enc_dim = get_count(j, "enc_dim");
  if (j.contains("enc_layers")) c.enc_layers = get_count(j, "enc_layers");
  if (j.contains("dec_dim")) c.dec_dim = get_count(j, "dec_dim");
  if (j.contains("dec_layers")) c.dec_layers = get_count(j, "dec_layers");
  if (j.contains("head_dim")) c.head_dim = get_count(j, "head_dim");
  if (j.contains("patch_size")) c.patch_size = get_count(j, "patch_size");
  if (j.contains("mlp_ratio")) c.mlp_ratio = get_count(j, "mlp_ratio");
  if (j.contains("prope")) c.prope = parse_prope_mode(get_string(j, "prope"));
  if (j.contains("fixed_latent_tokens")) c.fixed_latent_tokens = get_count(j, "fixed_latent_tokens");
  if (j.contains("residual_scale")) c.residual_scale = get_bool(j, "residual_scale");
  if (j.contains("pose_concat")) c.pose_concat = get_bool(j, "pose_concat");
  c.validate();
  return c;
}

namespace {

ModelConfig encdec(std::size_t ed, std::size_t el, std::size_t dd, std::size_t dl) {
  ModelConfig c;
  c.family = Family::svsm_encdec;
  c.enc_dim = ed;
  c.enc_layers = el;
  c.dec_dim = dd;
  c.dec_layers = dl;
  c.head_dim = 64;
  c.patch_size = 16;
  return c;
}

ModelConfig dec_only(std::size_t d, std::size_t l) {
  ModelConfig c = encdec(0, 0, d, l);
  c.family = Family::lvsm_dec;
  return c;
}

std::vector<ModelPreset> build_presets() {
  std::vector<ModelPreset> p{
      {"svsm-stereo-15M", encdec(384, 3, 384, 3)},    {"svsm-stereo-27M", encdec(384, 6, 384, 6)},
      {"svsm-stereo-35M", encdec(384, 8, 384, 8)},    {"svsm-stereo-62M", encdec(512, 8, 384, 8)},
      {"svsm-stereo-79M", encdec(512, 8, 512, 12)},   {"svsm-stereo-145M", encdec(640, 10, 640, 14)},
      {"svsm-stereo-226M", encdec(768, 10, 768, 16)}, {"svsm-stereo-316M", encdec(768, 12, 768, 24)},
      {"svsm-stereo-420M", encdec(768, 16, 768, 32)}, {"svsm-stereo-740M", encdec(1024, 16, 1024, 32)},
      {"lvsm-stereo-8M", dec_only(384, 3)},           {"lvsm-stereo-13M", dec_only(384, 6)},
      {"lvsm-stereo-22M", dec_only(512, 6)},          {"lvsm-stereo-28M", dec_only(512, 8)},
      {"lvsm-stereo-53M", dec_only(640, 10)},         {"lvsm-stereo-90M", dec_only(768, 12)},
      {"lvsm-stereo-118M", dec_only(768, 16)},        {"lvsm-stereo-175M", dec_only(768, 24)},
      {"lvsm-stereo-275M", dec_only(896, 28)},        {"svsm-multiview-15M", encdec(384, 3, 384, 3)},
      {"svsm-multiview-32M", encdec(384, 6, 384, 8)}, {"svsm-multiview-85M", encdec(512, 10, 512, 12)},
      {"svsm-multiview-168M", encdec(640, 12, 640, 16)}, {"svsm-multiview-280M", encdec(768, 12, 768, 20)},
      {"svsm-multiview-711M", encdec(1024, 24, 1024, 24)}, {"svsm-multiview-400M", encdec(768, 24, 768, 24)},
      {"lvsm-multiview-8M", dec_only(384, 3)},        {"lvsm-multiview-22M", dec_only(512, 6)},
      {"lvsm-multiview-43M", dec_only(640, 10)},      {"lvsm-multiview-90M", dec_only(768, 12)},
      {"lvsm-multiview-175M", dec_only(768, 24)},     {"lvsm-multiview-383M", dec_only(1024, 30)},
  };
  const std::size_t published = p.size();
  for (std::size_t i = 0; i < published; ++i) {
    ModelConfig c = p[i].config;
    c.enc_dim /= 8;
    c.dec_dim /= 8;
    c.head_dim = 8;
    c.patch_size = 8;
    p.push_back({"desk-" + p[i].name, c});
  }
  return p;
}

}  // namespace

const std::vector<ModelPreset>& model_presets() {
  static const std::vector<ModelPreset> presets = build_presets();
  return presets;
}

ModelConfig model_preset(const std::string& name) {
  for (const auto& p : model_presets())
    if (p.name == name) return p.config;
  throw ConfigError("unknown model preset '" + name + "'");
}

}  // namespace svsm
