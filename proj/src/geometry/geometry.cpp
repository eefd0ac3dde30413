// Copyright 2026 The svsmlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "svsm/geometry/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "svsm/errors.hpp"
#include "svsm/util/random.hpp"

namespace svsm {

Mat4 mat4_identity() {
  Mat4 m{};
  m[0] = m[5] = m[10] = m[15] = 1.0;
  return m;
}

Mat4 mat4_mul(const Mat4& a, const Mat4& b) {
  Mat4 c{};
  for (int i = 0; i < 4; ++i)
    for (int k = 0; k < 4; ++k) {
      const double aik = a[i * 4 + k];
      for (int j = 0; j < 4; ++j) c[i * 4 + j] += aik * b[k * 4 + j];
    }
  return c;
}

Mat4 mat4_transpose(const Mat4& a) {
  Mat4 t;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) t[j * 4 + i] = a[i * 4 + j];
  return t;
}

Mat4 mat4_inverse(const Mat4& a) {
  double m[4][8];
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      m[i][j] = a[i * 4 + j];
      m[i][j + 4] = i == j ? 1.0 : 0.0;
    }
  double scale = 0.0;
  for (double v : a) scale = std::max(scale, std::abs(v));
  for (int col = 0; col < 4; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 4; ++r)
      if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
    if (!(std::abs(m[pivot][col]) > 1e-300) || std::abs(m[pivot][col]) <= 1e-14 * scale)
      throw NumericalError("singular 4x4 matrix");
    if (pivot != col)
      for (int j = 0; j < 8; ++j) std::swap(m[col][j], m[pivot][j]);
    const double inv = 1.0 / m[col][col];
    for (int j = 0; j < 8; ++j) m[col][j] *= inv;
    for (int r = 0; r < 4; ++r) {
      if (r == col || m[r][col] == 0.0) continue;
      const double f = m[r][col];
      for (int j = 0; j < 8; ++j) m[r][j] -= f * m[col][j];
    }
  }
  Mat4 out;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) out[i * 4 + j] = m[i][j + 4];
  return out;
}

namespace {

double norm1(const Mat4& a) {
  double best = 0.0;
  for (int j = 0; j < 4; ++j) {
    double s = 0.0;
    for (int i = 0; i < 4; ++i) s += std::abs(a[i * 4 + j]);
    best = std::max(best, s);
  }
  return best;
}

}  // namespace

double mat4_condition(const Mat4& a) { return norm1(a) * norm1(mat4_inverse(a)); }

double mat4_max_abs_diff(const Mat4& a, const Mat4& b) {
  double d = 0.0;
  for (int i = 0; i < 16; ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

Vec3 normalized(const Vec3& v) {
  const double n = std::sqrt(dot(v, v));
  if (!(n > 0.0)) throw NumericalError("cannot normalise a zero vector");
  return {v[0] / n, v[1] / n, v[2] / n};
}

Pose Pose::from_rt(const Mat3& r, const Vec3& t) {
  Mat4 m = mat4_identity();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) m[i * 4 + j] = r[i * 3 + j];
    m[i * 4 + 3] = t[i];
  }
  return Pose(m);
}

Pose Pose::look_at(const Vec3& eye, const Vec3& target, const Vec3& up) {
  const Vec3 z = normalized({target[0] - eye[0], target[1] - eye[1], target[2] - eye[2]});
  const Vec3 x = normalized(cross(z, up));
  const Vec3 y = cross(z, x);
  const Mat3 r{x[0], x[1], x[2], y[0], y[1], y[2], z[0], z[1], z[2]};
  const Vec3 t{-dot(x, eye), -dot(y, eye), -dot(z, eye)};
  return from_rt(r, t);
}

Mat3 Pose::rotation() const {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r[i * 3 + j] = m_[i * 4 + j];
  return r;
}

Vec3 Pose::translation() const { return {m_[3], m_[7], m_[11]}; }

Vec3 Pose::center() const {
  Vec3 c{};
  for (int j = 0; j < 3; ++j)
    for (int i = 0; i < 3; ++i) c[j] -= m_[i * 4 + j] * m_[i * 4 + 3];
  return c;
}

Pose Pose::inverse() const {
  const Mat3 r = rotation();
  Mat3 rt;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) rt[i * 3 + j] = r[j * 3 + i];
  return from_rt(rt, center());
}

bool Pose::is_valid(double tol) const {
  for (double v : m_)
    if (!std::isfinite(v)) return false;
  if (std::abs(m_[12]) > tol || std::abs(m_[13]) > tol || std::abs(m_[14]) > tol || std::abs(m_[15] - 1.0) > tol)
    return false;
  const Mat3 r = rotation();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += r[k * 3 + i] * r[k * 3 + j];
      if (std::abs(s - (i == j ? 1.0 : 0.0)) > tol) return false;
    }
  const double det = r[0] * (r[4] * r[8] - r[5] * r[7]) - r[1] * (r[3] * r[8] - r[5] * r[6]) +
                     r[2] * (r[3] * r[7] - r[4] * r[6]);
  return std::abs(det - 1.0) <= tol;
}

void Pose::validate(double tol) const {
  if (!is_valid(tol)) throw ConfigError("pose is not a rigid world-to-camera transform");
}

void Intrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0))
    throw ConfigError("focal lengths must be positive (fx=" + std::to_string(fx) + ", fy=" + std::to_string(fy) + ")");
  if (!(cx >= -1.0 && cx <= 1.0 && cy >= -1.0 && cy <= 1.0))
    throw ConfigError("principal point must lie in [-1, 1]");
}

Pose relative_pose(const Pose& g_i, const Pose& g_j) { return g_i.inverse() * g_j; }

Mat3 random_rotation(Rng& rng) {
  double q[4];
  double n = 0.0;
  do {
    n = 0.0;
    for (double& c : q) {
      c = rng.normal();
      n += c * c;
    }
  } while (n < 1e-12);
  n = std::sqrt(n);
  const double w = q[0] / n, x = q[1] / n, y = q[2] / n, z = q[3] / n;
  return {1 - 2 * (y * y + z * z), 2 * (x * y - w * z),     2 * (x * z + w * y),
          2 * (x * y + w * z),     1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
          2 * (x * z - w * y),     2 * (y * z + w * x),     1 - 2 * (x * x + y * y)};
}

Pose random_rigid(Rng& rng, double extent) {
  const Mat3 r = random_rotation(rng);
  const Vec3 t{rng.uniform(-extent, extent), rng.uniform(-extent, extent), rng.uniform(-extent, extent)};
  return Pose::from_rt(r, t);
}

Vec3 camera_ray_direction(const Intrinsics& k, double u, double v) {
  return normalized({(u - k.cx) / k.fx, (v - k.cy) / k.fy, 1.0});
}

PluckerRayMap plucker_ray_map(const Pose& pose, const Intrinsics& k, std::size_t height, std::size_t width,
                              RayFrame frame) {
  if (height == 0 || width == 0) throw ConfigError("ray map needs H, W >= 1");
  if (!(k.fx > 0.0) || !(k.fy > 0.0)) throw ConfigError("degenerate intrinsics: focal lengths must be positive");
  PluckerRayMap map{height, width, std::vector<double>(height * width * 6)};
  const Mat3 r = pose.rotation();
  const Vec3 o = pose.center();
  for (std::size_t y = 0; y < height; ++y) {
    const double v = pixel_coordinate(y, height);
    for (std::size_t x = 0; x < width; ++x) {
      const Vec3 dc = camera_ray_direction(k, pixel_coordinate(x, width), v);
      double* out = map.data.data() + (y * width + x) * 6;
      if (frame == RayFrame::camera) {
        out[0] = dc[0];
        out[1] = dc[1];
        out[2] = dc[2];
        out[3] = out[4] = out[5] = 0.0;
        continue;
      }
      Vec3 d{};
      for (int j = 0; j < 3; ++j)
        for (int i = 0; i < 3; ++i) d[j] += r[i * 3 + j] * dc[i];
      const Vec3 m = cross(o, d);
      out[0] = d[0];
      out[1] = d[1];
      out[2] = d[2];
      out[3] = m[0];
      out[4] = m[1];
      out[5] = m[2];
    }
  }
  return map;
}

Mat4 intrinsics_matrix(const Intrinsics& k) {
  Mat4 m = mat4_identity();
  m[0] = k.fx;
  m[2] = k.cx;
  m[5] = k.fy;
  m[6] = k.cy;
  return m;
}

Mat4 projection_matrix(const Pose& pose, const Intrinsics& k, double condition_bound) {
  const Mat4 p = mat4_mul(intrinsics_matrix(k), pose.matrix());
  const double cond = mat4_condition(p);
  if (!(cond <= condition_bound))
    throw NumericalError("projection matrix condition number " + std::to_string(cond) + " exceeds bound " +
                         std::to_string(condition_bound));
  return p;
}

}  // namespace svsm
