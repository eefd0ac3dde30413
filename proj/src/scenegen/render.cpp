// Copyright 2026 The svsmlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "svsm/scenegen/render.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "svsm/errors.hpp"

namespace svsm {
namespace {

constexpr double kMinHit = 1e-9;

// Nearest positive hit distance along o + t·d, or +inf. Fills the unit normal.
double intersect(const Primitive& p, const Vec3& o, const Vec3& d, Vec3& normal) {
  const Vec3 oc{o[0] - p.center[0], o[1] - p.center[1], o[2] - p.center[2]};
  if (p.kind == PrimitiveKind::sphere) {
    const double r = p.size[0];
    const double b = dot(oc, d);
    const double c = dot(oc, oc) - r * r;
    const double disc = b * b - c;
    if (disc < 0.0) return std::numeric_limits<double>::infinity();
    const double root = std::sqrt(disc);
    double t = -b - root;
    if (t <= kMinHit) t = -b + root;
    if (t <= kMinHit) return std::numeric_limits<double>::infinity();
    for (int i = 0; i < 3; ++i) normal[i] = (oc[i] + t * d[i]) / r;
    return t;
  }
  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  int axis_near = 0, axis_far = 0;
  for (int i = 0; i < 3; ++i) {
    const double h = p.size[i];
    if (d[i] == 0.0) {
      if (oc[i] < -h || oc[i] > h) return std::numeric_limits<double>::infinity();
      continue;
    }
    double t0 = (-h - oc[i]) / d[i];
    double t1 = (h - oc[i]) / d[i];
    if (t0 > t1) std::swap(t0, t1);
    if (t0 > t_near) {
      t_near = t0;
      axis_near = i;
    }
    if (t1 < t_far) {
      t_far = t1;
      axis_far = i;
    }
  }
  if (t_near > t_far || t_far <= kMinHit) return std::numeric_limits<double>::infinity();
  const bool inside = t_near <= kMinHit;
  const double t = inside ? t_far : t_near;
  const int axis = inside ? axis_far : axis_near;
  normal = {0.0, 0.0, 0.0};
  normal[axis] = (oc[axis] + t * d[axis]) > 0.0 ? 1.0 : -1.0;
  return t;
}

}  // namespace

Tensor<float> render_view(const SceneSpec& scene, const Pose& pose, const Intrinsics& k, std::size_t height,
                          std::size_t width) {
  if (height == 0 || width == 0) throw ConfigError("render_view needs H, W >= 1");
  k.validate();
  Tensor<float> image({height, width, 3});
  const Mat3 r = pose.rotation();
  const Vec3 o = pose.center();
  for (std::size_t y = 0; y < height; ++y) {
    const double v = pixel_coordinate(y, height);
    for (std::size_t x = 0; x < width; ++x) {
      const Vec3 dc = camera_ray_direction(k, pixel_coordinate(x, width), v);
      Vec3 d{};
      for (int j = 0; j < 3; ++j)
        for (int i = 0; i < 3; ++i) d[j] += r[i * 3 + j] * dc[i];
      double best = std::numeric_limits<double>::infinity();
      const Primitive* hit = nullptr;
      Vec3 n{}, candidate{};
      for (const auto& p : scene.primitives) {
        const double t = intersect(p, o, d, candidate);
        if (t < best) {
          best = t;
          hit = &p;
          n = candidate;
        }
      }
      float* px = image.ptr() + (y * width + x) * 3;
      if (hit == nullptr) {
        for (int c = 0; c < 3; ++c) px[c] = static_cast<float>(std::clamp(scene.background[c], 0.0, 1.0));
        continue;
      }
      const double lambert = std::max(0.0, dot(n, scene.light_direction)) + kAmbient;
      for (int c = 0; c < 3; ++c) px[c] = static_cast<float>(std::clamp(hit->albedo[c] * lambert, 0.0, 1.0));
    }
  }
  return image;
}

}  // namespace svsm
