// Copyright 2026 The svsmlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "svsm/models/tokenize.hpp"

#include "svsm/errors.hpp"

namespace svsm {

template <typename T, typename U>
Tensor<T> patchify_pixels(const Tensor<U>& image, std::size_t patch) {
  if (image.rank() != 3) throw DimensionError("patchify expects an [H, W, C] image, got " + to_string(image.shape()));
  const std::size_t h = image.dim(0), w = image.dim(1), c = image.dim(2);
  if (patch == 0 || h % patch != 0 || w % patch != 0)
    throw ConfigError("patch size " + std::to_string(patch) + " does not divide " + std::to_string(h) + "x" +
                      std::to_string(w));
  const std::size_t gy = h / patch, gx = w / patch, row = patch * c;
  Tensor<T> out({gy * gx, patch * row});
  for (std::size_t ty = 0; ty < gy; ++ty)
    for (std::size_t tx = 0; tx < gx; ++tx) {
      T* dst = out.ptr() + (ty * gx + tx) * patch * row;
      for (std::size_t iy = 0; iy < patch; ++iy) {
        const U* src = image.ptr() + ((ty * patch + iy) * w + tx * patch) * c;
        for (std::size_t i = 0; i < row; ++i) dst[iy * row + i] = static_cast<T>(src[i]);
      }
    }
  return out;
}

template <typename T>
Tensor<T> ray_patches(const Pose& pose, const Intrinsics& k, std::size_t height, std::size_t width, std::size_t patch,
                      RayFrame frame) {
  const auto map = plucker_ray_map(pose, k, height, width, frame);
  Tensor<double> rays({height, width, 6}, map.data);
  return patchify_pixels<T>(rays, patch);
}

template <typename T>
Tensor<T> context_token_inputs(const Tensor<float>& image, const Pose& pose, const Intrinsics& k, std::size_t patch,
                               RayFrame frame) {
  const auto pix = patchify_pixels<T>(image, patch);
  const auto rays = ray_patches<T>(pose, k, image.dim(0), image.dim(1), patch, frame);
  const std::size_t n = pix.dim(0), a = pix.dim(1), b = rays.dim(1);
  Tensor<T> out({n, a + b});
  for (std::size_t t = 0; t < n; ++t) {
    std::copy(pix.ptr() + t * a, pix.ptr() + (t + 1) * a, out.ptr() + t * (a + b));
    std::copy(rays.ptr() + t * b, rays.ptr() + (t + 1) * b, out.ptr() + t * (a + b) + a);
  }
  return out;
}

template Tensor<float> patchify_pixels(const Tensor<float>&, std::size_t);
template Tensor<double> patchify_pixels(const Tensor<float>&, std::size_t);
template Tensor<float> patchify_pixels(const Tensor<double>&, std::size_t);
template Tensor<double> patchify_pixels(const Tensor<double>&, std::size_t);
template Tensor<float> ray_patches(const Pose&, const Intrinsics&, std::size_t, std::size_t, std::size_t, RayFrame);
template Tensor<double> ray_patches(const Pose&, const Intrinsics&, std::size_t, std::size_t, std::size_t, RayFrame);
template Tensor<float> context_token_inputs(const Tensor<float>&, const Pose&, const Intrinsics&, std::size_t, RayFrame);
template Tensor<double> context_token_inputs(const Tensor<float>&, const Pose&, const Intrinsics&, std::size_t,
                                             RayFrame);

}  // namespace svsm
