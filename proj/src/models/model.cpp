// Copyright 2026 The svsmlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "svsm/models/model.hpp"

#include "svsm/errors.hpp"
#include "svsm/geometry/prope.hpp"
#include "svsm/models/tokenize.hpp"
#include "svsm/tensor/flop_counter.hpp"
#include "svsm/tensor/nn.hpp"
#include "svsm/util/random.hpp"

namespace svsm {
namespace {

constexpr double kInitStd = 0.02;

std::uint64_t block_params(std::uint64_t d, std::uint64_t r) { return (4 + 2 * r) * d * d + (9 + r) * d; }

}  // namespace

std::uint64_t param_count(const ModelConfig& c) {
  c.validate();
  const std::uint64_t p2 = c.patch_size * c.patch_size, r = c.mlp_ratio;
  const std::uint64_t dd = c.dec_dim, de = c.enc_dim;
  const std::uint64_t ctx_dim = c.uses_encoder() ? de : dd;
  std::uint64_t n = 9 * p2 * ctx_dim + ctx_dim;   // context embedding
  n += 6 * p2 * dd + dd;                          // target query embedding
  n += 2 * dd + 3 * p2 * dd + 3 * p2;             // output norm and head
  n += c.dec_layers * block_params(dd, r);
  if (c.uses_encoder()) {
    n += c.enc_layers * block_params(de, r);
    n += 2 * de;  // final encoder norm
    if (de != dd) n += de * dd + dd;
    if (has_fixed_latent(c.family)) n += c.fixed_latent_tokens * de;
    if (c.family == Family::svsm_fixed) n += c.enc_layers * (block_params(de, r) + 2 * de);
    if (c.pose_concat) n += 6 * p2 * dd + dd;
  }
  return n;
}

template <typename T>
struct Model<T>::Inputs {
  std::size_t scenes = 0, context_views = 0, target_views = 0;
  Tensor<T> ctx;       // [B, V_C·hw, 9p²]
  Tensor<T> ctx_rays;  // [B, V_C·hw, 6p²], pose_concat only
  Tensor<T> qry;       // [B, V_T·hw, 6p²]
  std::vector<Mat4> ctx_p, qry_p;
};

template <typename T>
class Model<T>::Builder {
 public:
  Builder(const Model& m, Tape<T>& tape) : m_(m), c_(m.config_), tape_(tape) {}

  Var<T> p(const std::string& name) { return tape_.input(m_.param(name)); }

  Var<T> lin(Var<T> x, const std::string& name) { return ops::linear(x, p(name + ".w"), p(name + ".b")); }
  Var<T> norm(Var<T> x, const std::string& name) { return ops::layer_norm(x, p(name + ".g"), p(name + ".b")); }

  Var<T> attend(Var<T> q, Var<T> k, Var<T> v, const std::vector<Mat4>* pq, const std::vector<Mat4>* pkv) {
    const std::size_t heads = q.shape().back() / c_.head_dim;
    if (pq != nullptr) return prope_attention<T>(q, k, v, *pq, *pkv, heads);
    return nn::attention_block(q, k, v, heads);
  }

  Var<T> mlp_residual(Var<T> x, const std::string& name, std::size_t depth) {
    nn::MlpWeights<T> w{p(name + ".mlp.fc1.w"), p(name + ".mlp.fc1.b"), p(name + ".mlp.fc2.w"), p(name + ".mlp.fc2.b")};
    return ops::residual_add(x, nn::mlp_block(norm(x, name + ".ln2"), w), depth);
  }

  Var<T> self_block(Var<T> x, const std::string& name, std::size_t depth, const std::vector<Mat4>* proj) {
    const Var<T> h = norm(x, name + ".ln1");
    const Var<T> a = attend(lin(h, name + ".q"), lin(h, name + ".k"), lin(h, name + ".v"), proj, proj);
    x = ops::residual_add(x, lin(a, name + ".o"), depth);
    return mlp_residual(x, name, depth);
  }

  Var<T> cross_block(Var<T> x, Var<T> k, Var<T> v, const std::string& name, std::size_t depth,
                     const std::vector<Mat4>* pq, const std::vector<Mat4>* pkv) {
    const Var<T> a = attend(lin(norm(x, name + ".ln1"), name + ".q"), k, v, pq, pkv);
    x = ops::residual_add(x, lin(a, name + ".o"), depth);
    return mlp_residual(x, name, depth);
  }

  std::size_t depth(std::size_t layers) const { return c_.residual_scale ? layers : 1; }

  struct Encoded {
    Var<T> z;
    std::vector<Mat4> z_p;
  };

  Encoded encode(const Inputs& in) {
    const std::size_t de = c_.enc_dim, hw = m_.tokens_per_view(), n_ctx = in.context_views * hw;
    const std::vector<Mat4>* ctx_p = c_.prope_in_encoder() ? &in.ctx_p : nullptr;
    Var<T> x;
    {
      FlopCountPause pause;
      x = lin(tape_.constant(in.ctx), "ctx_embed");
    }
    const std::size_t depth_enc = depth(c_.enc_layers);
    Encoded out;
    Var<T> z;
    std::vector<Mat4> identity_p;
    if (c_.family == Family::svsm_encdec) {
      for (std::size_t l = 0; l < c_.enc_layers; ++l) x = self_block(x, "enc." + std::to_string(l), depth_enc, ctx_p);
      z = x;
      out.z_p = in.ctx_p;
    } else if (c_.family == Family::svsm_fixed) {
      const std::size_t n_lat = c_.fixed_latent_tokens;
      Var<T> lat = ops::repeat_batch(p("latents"), in.scenes);
      std::vector<Mat4> lat_p(in.scenes * n_lat, mat4_identity());
      for (std::size_t l = 0; l < c_.enc_layers; ++l) {
        const std::string name = "enc." + std::to_string(l);
        x = self_block(x, name, depth_enc, ctx_p);
        const Var<T> kv = norm(x, name + ".lat.ln_kv");
        lat = cross_block(lat, lin(kv, name + ".lat.k"), lin(kv, name + ".lat.v"), name + ".lat", depth_enc,
                          ctx_p ? &lat_p : nullptr, ctx_p);
      }
      z = lat;
      out.z_p = std::move(lat_p);
    } else {
      const std::size_t n_lat = c_.fixed_latent_tokens;
      std::vector<Var<T>> parts{ops::repeat_batch(p("latents"), in.scenes), x};
      Var<T> seq = ops::concat_tokens<T>(parts);
      std::vector<Mat4> seq_p;
      seq_p.reserve(in.scenes * (n_lat + n_ctx));
      for (std::size_t b = 0; b < in.scenes; ++b) {
        seq_p.insert(seq_p.end(), n_lat, mat4_identity());
        seq_p.insert(seq_p.end(), in.ctx_p.begin() + b * n_ctx, in.ctx_p.begin() + (b + 1) * n_ctx);
      }
      for (std::size_t l = 0; l < c_.enc_layers; ++l)
        seq = self_block(seq, "enc." + std::to_string(l), depth_enc, ctx_p ? &seq_p : nullptr);
      z = ops::slice_tokens(seq, 0, n_lat);
      out.z_p.assign(in.scenes * n_lat, mat4_identity());
    }
    z = norm(z, "enc.ln_f");
    if (de != c_.dec_dim) {
      FlopCountPause pause;
      z = lin(z, "bridge");
    }
    if (c_.pose_concat) {
      Var<T> rays;
      {
        FlopCountPause pause;
        rays = lin(tape_.constant(in.ctx_rays), "pose_embed");
      }
      std::vector<Var<T>> parts{z, rays};
      z = ops::concat_tokens<T>(parts);
      const std::size_t n_z = out.z_p.size() / in.scenes;
      std::vector<Mat4> merged;
      merged.reserve(in.scenes * (n_z + n_ctx));
      for (std::size_t b = 0; b < in.scenes; ++b) {
        merged.insert(merged.end(), out.z_p.begin() + b * n_z, out.z_p.begin() + (b + 1) * n_z);
        merged.insert(merged.end(), in.ctx_p.begin() + b * n_ctx, in.ctx_p.begin() + (b + 1) * n_ctx);
      }
      out.z_p = std::move(merged);
    }
    out.z = z;
    return out;
  }

  std::pair<Var<T>, Var<T>> latent_kv(Var<T> z, std::size_t layer) {
    const std::string name = "dec." + std::to_string(layer);
    return {lin(z, name + ".k"), lin(z, name + ".v")};
  }

  Var<T> queries(const Inputs& in, bool per_target) {
    FlopCountPause pause;
    Var<T> q = lin(tape_.constant(in.qry), "query_embed");
    if (per_target) q = ops::reshape(q, {in.scenes * in.target_views, m_.tokens_per_view(), c_.dec_dim});
    return q;
  }

  // Cross-attention decoder; kv(l) yields the keys and values of z at layer l.
  template <typename KvFn>
  Var<T> decode_cross(const Inputs& in, const std::vector<Mat4>& z_p, KvFn kv) {
    const bool prope = c_.prope_in_decoder();
    Var<T> x = queries(in, false);
    const std::size_t d = depth(c_.dec_layers);
    for (std::size_t l = 0; l < c_.dec_layers; ++l) {
      const auto [k, v] = kv(l);
      x = cross_block(x, k, v, "dec." + std::to_string(l), d, prope ? &in.qry_p : nullptr, prope ? &z_p : nullptr);
    }
    return head(x, in.scenes * in.target_views);
  }

  // Per-target bidirectional pass over [prefix; target queries]; prefix is [B, n_prefix, d].
  Var<T> decode_joint(const Inputs& in, Var<T> prefix, const std::vector<Mat4>& prefix_p) {
    const std::size_t hw = m_.tokens_per_view(), vt = in.target_views;
    const std::size_t n_prefix = prefix.shape()[1];
    std::vector<Var<T>> parts{ops::repeat_each(prefix, vt), queries(in, true)};
    Var<T> seq = ops::concat_tokens<T>(parts);
    const bool prope = c_.prope_in_decoder();
    std::vector<Mat4> seq_p;
    if (prope) {
      seq_p.reserve(in.scenes * vt * (n_prefix + hw));
      for (std::size_t b = 0; b < in.scenes; ++b)
        for (std::size_t t = 0; t < vt; ++t) {
          seq_p.insert(seq_p.end(), prefix_p.begin() + b * n_prefix, prefix_p.begin() + (b + 1) * n_prefix);
          const auto q0 = in.qry_p.begin() + (b * vt + t) * hw;
          seq_p.insert(seq_p.end(), q0, q0 + hw);
        }
    }
    const std::size_t d = depth(c_.dec_layers);
    for (std::size_t l = 0; l < c_.dec_layers; ++l)
      seq = self_block(seq, "dec." + std::to_string(l), d, prope ? &seq_p : nullptr);
    return head(ops::slice_tokens(seq, n_prefix, hw), in.scenes * vt);
  }

  Var<T> head(Var<T> x, std::size_t images) {
    FlopCountPause pause;
    const std::size_t p = c_.patch_size;
    Var<T> y = ops::sigmoid(lin(norm(x, "head.ln"), "head"));
    y = ops::reshape(y, {images, m_.tokens_per_view(), 3 * p * p});
    return ops::unpatchify(y, m_.height_, m_.width_, p, 3);
  }

  Var<T> forward(const Inputs& in) {
    if (c_.family == Family::lvsm_dec) {
      Var<T> ctx;
      {
        FlopCountPause pause;
        ctx = lin(tape_.constant(in.ctx), "ctx_embed");
      }
      m_.full_passes_ += in.scenes * in.target_views;
      return decode_joint(in, ctx, in.ctx_p);
    }
    Encoded e = encode(in);
    m_.encoder_calls_ += in.scenes;
    m_.decoder_calls_ += in.scenes;
    if (c_.family == Family::lvsm_encdec) return decode_joint(in, e.z, e.z_p);
    return decode_cross(in, e.z_p, [&](std::size_t l) { return latent_kv(e.z, l); });
  }

  Tape<T>& tape() { return tape_; }

 private:
  const Model& m_;
  const ModelConfig& c_;
  Tape<T>& tape_;
};

template <typename T>
Model<T>::Model(const ModelConfig& config, std::size_t height, std::size_t width, std::uint64_t seed)
    : config_(config), height_(height), width_(width) {
  config_.validate();
  config_.validate_resolution(height, width);
  Rng rng(seed);
  const std::size_t p2 = config_.patch_size * config_.patch_size;
  const std::size_t dd = config_.dec_dim, de = config_.enc_dim;
  add_linear("ctx_embed", 9 * p2, config_.uses_encoder() ? de : dd, rng);
  add_linear("query_embed", 6 * p2, dd, rng);
  if (config_.uses_encoder()) {
    if (has_fixed_latent(config_.family)) {
      Tensor<T> lat({config_.fixed_latent_tokens, de});
      for (auto& v : lat.storage()) v = static_cast<T>(rng.truncated_normal(kInitStd));
      lat.set_requires_grad(true);
      index_["latents"] = params_.size();
      params_.push_back({"latents", std::move(lat), false});
    }
    for (std::size_t l = 0; l < config_.enc_layers; ++l) {
      const std::string name = "enc." + std::to_string(l);
      add_block(name, de, rng);
      if (config_.family == Family::svsm_fixed) add_block(name + ".lat", de, rng, true);
    }
    add_norm("enc.ln_f", de);
    if (de != dd) add_linear("bridge", de, dd, rng);
    if (config_.pose_concat) add_linear("pose_embed", 6 * p2, dd, rng);
  }
  for (std::size_t l = 0; l < config_.dec_layers; ++l) add_block("dec." + std::to_string(l), dd, rng);
  add_norm("head.ln", dd);
  add_linear("head", dd, 3 * p2, rng);
}

template <typename T>
void Model<T>::add_linear(const std::string& name, std::size_t in, std::size_t out, Rng& rng) {
  Tensor<T> w({in, out});
  for (auto& v : w.storage()) v = static_cast<T>(rng.truncated_normal(kInitStd));
  w.set_requires_grad(true);
  Tensor<T> b({out});
  b.set_requires_grad(true);
  index_[name + ".w"] = params_.size();
  params_.push_back({name + ".w", std::move(w), false});
  index_[name + ".b"] = params_.size();
  params_.push_back({name + ".b", std::move(b), false});
}

template <typename T>
void Model<T>::add_norm(const std::string& name, std::size_t dim) {
  Tensor<T> g({dim}, T(1));
  g.set_requires_grad(true);
  Tensor<T> b({dim});
  b.set_requires_grad(true);
  index_[name + ".g"] = params_.size();
  params_.push_back({name + ".g", std::move(g), true});
  index_[name + ".b"] = params_.size();
  params_.push_back({name + ".b", std::move(b), true});
}

template <typename T>
void Model<T>::add_block(const std::string& name, std::size_t dim, Rng& rng, bool kv_norm) {
  add_norm(name + ".ln1", dim);
  if (kv_norm) add_norm(name + ".ln_kv", dim);
  for (const char* proj : {".q", ".k", ".v", ".o"}) add_linear(name + proj, dim, dim, rng);
  add_norm(name + ".ln2", dim);
  add_linear(name + ".mlp.fc1", dim, config_.mlp_ratio * dim, rng);
  add_linear(name + ".mlp.fc2", config_.mlp_ratio * dim, dim, rng);
}

template <typename T>
std::uint64_t Model<T>::parameter_count() const {
  std::uint64_t n = 0;
  for (const auto& p : params_) n += p.tensor.size();
  return n;
}

template <typename T>
std::vector<ParamRef<T>> Model<T>::parameters() {
  std::vector<ParamRef<T>> out;
  out.reserve(params_.size());
  for (auto& p : params_) out.push_back({&p.tensor, p.name, p.decay_exempt});
  return out;
}

template <typename T>
std::vector<NamedTensor<T>> Model<T>::state_dict() const {
  std::vector<NamedTensor<T>> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back({p.name, p.tensor});
  return out;
}

template <typename T>
void Model<T>::load_state_dict(const std::vector<NamedTensor<T>>& state) {
  if (state.size() != params_.size())
    throw ConfigError("checkpoint has " + std::to_string(state.size()) + " tensors, model has " +
                      std::to_string(params_.size()));
  for (const auto& s : state) {
    auto& dst = param(s.name);
    if (dst.shape() != s.tensor.shape())
      throw DimensionError("checkpoint tensor '" + s.name + "' has shape " + to_string(s.tensor.shape()) +
                           ", model expects " + to_string(dst.shape()));
  }
  for (const auto& s : state) std::copy(s.tensor.data().begin(), s.tensor.data().end(), param(s.name).ptr());
}

template <typename T>
Tensor<T>& Model<T>::param(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw ConfigError("model has no parameter '" + name + "'");
  return params_[it->second].tensor;
}

template <typename T>
const Tensor<T>& Model<T>::param(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ConfigError("model has no parameter '" + name + "'");
  return params_[it->second].tensor;
}

template <typename T>
typename Model<T>::Inputs Model<T>::make_inputs(std::span<const CameraView> context,
                                                std::span<const Camera> targets) const {
  if (context.empty()) throw ConfigError("at least one context view is required");
  const std::size_t p = config_.patch_size, p2 = p * p, hw = tokens_per_view();
  const RayFrame frame = config_.camera_frame_rays() ? RayFrame::camera : RayFrame::world;
  Inputs in;
  in.scenes = 1;
  in.context_views = context.size();
  in.target_views = targets.size();
  in.ctx = Tensor<T>({1, context.size() * hw, 9 * p2});
  if (config_.pose_concat) in.ctx_rays = Tensor<T>({1, context.size() * hw, 6 * p2});
  for (std::size_t v = 0; v < context.size(); ++v) {
    const auto& view = context[v];
    if (view.image.shape() != Shape{height_, width_, 3})
      throw DimensionError("context image has shape " + to_string(view.image.shape()));
    const auto tok = context_token_inputs<T>(view.image, view.pose, view.intrinsics, p, frame);
    std::copy(tok.data().begin(), tok.data().end(), in.ctx.ptr() + v * tok.size());
    if (config_.pose_concat) {
      const auto rays = ray_patches<T>(view.pose, view.intrinsics, height_, width_, p, frame);
      std::copy(rays.data().begin(), rays.data().end(), in.ctx_rays.ptr() + v * rays.size());
    }
    in.ctx_p.insert(in.ctx_p.end(), hw, projection_matrix(view.pose, view.intrinsics));
  }
  if (!targets.empty()) {
    in.qry = Tensor<T>({1, targets.size() * hw, 6 * p2});
    for (std::size_t t = 0; t < targets.size(); ++t) {
      const auto rays = ray_patches<T>(targets[t].pose, targets[t].intrinsics, height_, width_, p, frame);
      std::copy(rays.data().begin(), rays.data().end(), in.qry.ptr() + t * rays.size());
      in.qry_p.insert(in.qry_p.end(), hw, projection_matrix(targets[t].pose, targets[t].intrinsics));
    }
  }
  return in;
}

template <typename T>
typename Model<T>::Inputs Model<T>::make_inputs(std::span<const Episode> batch) const {
  if (batch.empty()) throw ConfigError("empty batch");
  const std::size_t vc = batch[0].context.size(), vt = batch[0].target.size();
  if (vt == 0) throw ConfigError("episodes need at least one target view");
  Inputs in;
  in.scenes = batch.size();
  in.context_views = vc;
  in.target_views = vt;
  const std::size_t p2 = config_.patch_size * config_.patch_size, hw = tokens_per_view();
  in.ctx = Tensor<T>({batch.size(), vc * hw, 9 * p2});
  in.qry = Tensor<T>({batch.size(), vt * hw, 6 * p2});
  if (config_.pose_concat) in.ctx_rays = Tensor<T>({batch.size(), vc * hw, 6 * p2});
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const auto& ep = batch[b];
    if (ep.context.size() != vc || ep.target.size() != vt)
      throw ConfigError("all episodes in a batch must share V_C and V_T");
    std::vector<Camera> cams;
    for (const auto& t : ep.target) cams.push_back({t.pose, t.intrinsics});
    Inputs one = make_inputs(ep.context, cams);
    std::copy(one.ctx.data().begin(), one.ctx.data().end(), in.ctx.ptr() + b * one.ctx.size());
    std::copy(one.qry.data().begin(), one.qry.data().end(), in.qry.ptr() + b * one.qry.size());
    if (config_.pose_concat)
      std::copy(one.ctx_rays.data().begin(), one.ctx_rays.data().end(), in.ctx_rays.ptr() + b * one.ctx_rays.size());
    in.ctx_p.insert(in.ctx_p.end(), one.ctx_p.begin(), one.ctx_p.end());
    in.qry_p.insert(in.qry_p.end(), one.qry_p.begin(), one.qry_p.end());
  }
  return in;
}

template <typename T>
Var<T> Model<T>::forward(Tape<T>& tape, std::span<const Episode> batch) const {
  const Inputs in = make_inputs(batch);
  Builder b(*this, tape);
  return b.forward(in);
}

template <typename T>
Tensor<T> Model<T>::target_images(std::span<const Episode> batch) const {
  std::size_t count = 0;
  for (const auto& ep : batch) count += ep.target.size();
  Tensor<T> out({count, height_, width_, 3});
  std::size_t i = 0;
  for (const auto& ep : batch)
    for (const auto& t : ep.target) {
      if (t.image.shape() != Shape{height_, width_, 3}) throw DimensionError("target image has wrong shape");
      for (std::size_t k = 0; k < t.image.size(); ++k) out[i * t.image.size() + k] = static_cast<T>(t.image[k]);
      ++i;
    }
  return out;
}

template <typename T>
SceneLatent<T> Model<T>::encode(std::span<const CameraView> context) const {
  if (!config_.uses_encoder()) throw UsageError("the decoder-only family has no scene encoder");
  const Inputs in = make_inputs(context, {});
  Tape<T> tape(false);
  Builder b(*this, tape);
  auto e = b.encode(in);
  ++encoder_calls_;
  SceneLatent<T> out;
  out.context_views = context.size();
  out.projections = std::move(e.z_p);
  if (is_unidirectional(config_.family)) {
    for (std::size_t l = 0; l < config_.dec_layers; ++l) {
      auto [k, v] = b.latent_kv(e.z, l);
      out.keys.push_back(k.value());
      out.values.push_back(v.value());
    }
  }
  const std::size_t n_z = e.z.shape()[1];
  out.z = e.z.value().reshaped({n_z, config_.dec_dim});
  return out;
}

template <typename T>
std::vector<Tensor<T>> Model<T>::decode(const SceneLatent<T>& latent, std::span<const Camera> targets) const {
  if (!config_.uses_encoder()) throw UsageError("the decoder-only family renders with render()");
  if (targets.empty()) return {};
  // Queries only need the target cameras; the context part of Inputs stays empty.
  const std::size_t p2 = config_.patch_size * config_.patch_size, hw = tokens_per_view();
  const RayFrame frame = config_.camera_frame_rays() ? RayFrame::camera : RayFrame::world;
  Inputs in;
  in.scenes = 1;
  in.context_views = latent.context_views;
  in.target_views = targets.size();
  in.qry = Tensor<T>({1, targets.size() * hw, 6 * p2});
  for (std::size_t t = 0; t < targets.size(); ++t) {
    const auto rays = ray_patches<T>(targets[t].pose, targets[t].intrinsics, height_, width_, config_.patch_size, frame);
    std::copy(rays.data().begin(), rays.data().end(), in.qry.ptr() + t * rays.size());
    in.qry_p.insert(in.qry_p.end(), hw, projection_matrix(targets[t].pose, targets[t].intrinsics));
  }
  Tape<T> tape(false);
  Builder b(*this, tape);
  ++decoder_calls_;
  Var<T> images;
  if (config_.family == Family::lvsm_encdec) {
    const Var<T> z = ops::reshape(tape.input(latent.z), {1, latent.tokens(), config_.dec_dim});
    images = b.decode_joint(in, z, latent.projections);
  } else {
    images = b.decode_cross(in, latent.projections, [&](std::size_t l) {
      return std::pair<Var<T>, Var<T>>{tape.input(latent.keys.at(l)), tape.input(latent.values.at(l))};
    });
  }
  const Tensor<T>& all = images.value();
  const std::size_t per = height_ * width_ * 3;
  std::vector<Tensor<T>> out;
  for (std::size_t t = 0; t < targets.size(); ++t)
    out.emplace_back(Shape{height_, width_, 3}, std::vector<T>(all.ptr() + t * per, all.ptr() + (t + 1) * per));
  return out;
}

template <typename T>
std::vector<Tensor<T>> Model<T>::render(std::span<const CameraView> context, std::span<const Camera> targets) const {
  if (config_.uses_encoder()) return decode(encode(context), targets);
  if (targets.empty()) return {};
  const Inputs in = make_inputs(context, targets);
  Tape<T> tape(false);
  Builder b(*this, tape);
  const Tensor<T>& all = b.forward(in).value();
  const std::size_t per = height_ * width_ * 3;
  std::vector<Tensor<T>> out;
  for (std::size_t t = 0; t < targets.size(); ++t)
    out.emplace_back(Shape{height_, width_, 3}, std::vector<T>(all.ptr() + t * per, all.ptr() + (t + 1) * per));
  return out;
}

template <typename T>
ModelCounters Model<T>::counters() const {
  return {encoder_calls_.load(), decoder_calls_.load(), full_passes_.load()};
}

template <typename T>
void Model<T>::reset_counters() {
  encoder_calls_ = 0;
  decoder_calls_ = 0;
  full_passes_ = 0;
}

template class Model<float>;
template class Model<double>;

}  // namespace svsm
