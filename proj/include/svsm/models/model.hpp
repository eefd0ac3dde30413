// Copyright 2026 The svsmlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <cstdint>
#include <deque>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "svsm/models/config.hpp"
#include "svsm/scenegen/scene.hpp"
#include "svsm/tensor/checkpoint.hpp"
#include "svsm/tensor/optim.hpp"

namespace svsm {

struct Camera {
  Pose pose;
  Intrinsics intrinsics;
};

/// Encoded context. For the unidirectional families the per-layer decoder keys and
/// values of z are computed once at encode time and reused by every decode call.
template <typename T>
struct SceneLatent {
  Tensor<T> z;                    // [n_z, dec_dim]
  std::vector<Mat4> projections;  // one per latent token; identity for learned latents
  std::vector<Tensor<T>> keys;    // per decoder layer, [1, n_z, dec_dim]
  std::vector<Tensor<T>> values;
  std::size_t context_views = 0;

  std::size_t tokens() const { return z.dim(0); }
};

struct ModelCounters {
  std::uint64_t encoder_calls = 0;  // scenes encoded
  std::uint64_t decoder_calls = 0;  // decode invocations (any number of targets each)
  std::uint64_t full_passes = 0;    // decoder-only passes over context + one target
};

/// Exact trainable-parameter count derived from the configuration alone.
std::uint64_t param_count(const ModelConfig& c);

/// One of the four view-synthesis families with its parameters.
///
/// Token inputs: a context patch is its p×p RGB pixels followed by the 6p² Plücker
/// values of the same pixels; a target query patch carries only the rays. Blocks are
/// pre-norm with residual branches scaled by 1/√L, L being the depth of their stack.
/// The output head maps tokens to p×p RGB through a sigmoid.
template <typename T>
class Model {
 public:
  Model(const ModelConfig& config, std::size_t height, std::size_t width, std::uint64_t seed);

  const ModelConfig& config() const noexcept { return config_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t tokens_per_view() const noexcept { return (height_ / config_.patch_size) * (width_ / config_.patch_size); }

  /// Sum of the sizes of every allocated parameter tensor.
  std::uint64_t parameter_count() const;
  /// Parameters for the optimizer; LayerNorm gains and biases are marked decay-exempt.
  std::vector<ParamRef<T>> parameters();
  std::vector<NamedTensor<T>> state_dict() const;
  /// Names and shapes must match exactly.
  void load_state_dict(const std::vector<NamedTensor<T>>& state);
  Tensor<T>& param(const std::string& name);
  const Tensor<T>& param(const std::string& name) const;

  /// Differentiable forward over B episodes sharing V_C and V_T. Returns predicted target
  /// images [B·V_T, H, W, 3], episode-major.
  Var<T> forward(Tape<T>& tape, std::span<const Episode> batch) const;
  /// Ground-truth target images in the order produced by forward().
  Tensor<T> target_images(std::span<const Episode> batch) const;

  /// Encodes one scene's context. UsageError for the decoder-only family.
  SceneLatent<T> encode(std::span<const CameraView> context) const;
  /// Renders every target from a latent in one batched pass. Targets never attend to each other.
  std::vector<Tensor<T>> decode(const SceneLatent<T>& latent, std::span<const Camera> targets) const;
  /// Encode then decode, or one full decoder-only pass per target.
  std::vector<Tensor<T>> render(std::span<const CameraView> context, std::span<const Camera> targets) const;

  ModelCounters counters() const;
  void reset_counters();

 private:
  struct Param {
    std::string name;
    Tensor<T> tensor;
    bool decay_exempt;
  };
  struct Inputs;
  class Builder;

  void add_linear(const std::string& name, std::size_t in, std::size_t out, Rng& rng);
  void add_norm(const std::string& name, std::size_t dim);
  void add_block(const std::string& name, std::size_t dim, Rng& rng, bool kv_norm = false);

  Inputs make_inputs(std::span<const Episode> batch) const;
  Inputs make_inputs(std::span<const CameraView> context, std::span<const Camera> targets) const;

  ModelConfig config_;
  std::size_t height_, width_;
  std::deque<Param> params_;
  std::unordered_map<std::string, std::size_t> index_;
  mutable std::atomic<std::uint64_t> encoder_calls_{0}, decoder_calls_{0}, full_passes_{0};
};

extern template class Model<float>;
extern template class Model<double>;

}  // namespace svsm
