// Copyright 2026 The svsmlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace svsm {

class Rng;

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<double, 9>;   // row-major
using Mat4 = std::array<double, 16>;  // row-major

Mat4 mat4_identity();
Mat4 mat4_mul(const Mat4& a, const Mat4& b);
Mat4 mat4_transpose(const Mat4& a);
/// General inverse by Gauss-Jordan elimination with partial pivoting. Throws NumericalError if singular.
Mat4 mat4_inverse(const Mat4& a);
/// Condition number in the 1-norm.
double mat4_condition(const Mat4& a);
double mat4_max_abs_diff(const Mat4& a, const Mat4& b);

Vec3 cross(const Vec3& a, const Vec3& b);
double dot(const Vec3& a, const Vec3& b);
Vec3 normalized(const Vec3& v);

/// Rigid world-to-camera transform [R t; 0 1]. The camera looks along +z of its
/// own frame, x to the right and y down (OpenCV convention).
class Pose {
 public:
  Pose() : m_(mat4_identity()) {}
  explicit Pose(const Mat4& m) : m_(m) {}
  static Pose from_rt(const Mat3& r, const Vec3& t);
  /// Camera at `eye` looking at `target`; `up` fixes the roll (image y points against it).
  static Pose look_at(const Vec3& eye, const Vec3& target, const Vec3& up = {0.0, -1.0, 0.0});

  const Mat4& matrix() const noexcept { return m_; }
  Mat3 rotation() const;
  Vec3 translation() const;
  /// Camera centre in world coordinates, -Rᵀt.
  Vec3 center() const;
  Pose inverse() const;
  Pose operator*(const Pose& other) const { return Pose(mat4_mul(m_, other.m_)); }

  /// True if R is orthonormal with det +1 and the last row is [0 0 0 1], within `tol`.
  bool is_valid(double tol = 1e-6) const;
  /// Throws ConfigError unless is_valid().
  void validate(double tol = 1e-6) const;

 private:
  Mat4 m_;
};

/// Pinhole intrinsics in normalised image coordinates: pixel centres span [-1, 1].
struct Intrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;

  /// Throws ConfigError on non-positive focal lengths or a principal point outside [-1, 1].
  void validate() const;
};

/// g_i⁻¹ g_j.
Pose relative_pose(const Pose& g_i, const Pose& g_j);

/// Uniformly distributed rotation.
Mat3 random_rotation(Rng& rng);
/// Random rigid motion with rotation uniform and translation uniform in [-extent, extent]³.
Pose random_rigid(Rng& rng, double extent = 1.0);

/// Per-pixel (direction, moment) rays laid out [H][W][6].
struct PluckerRayMap {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> data;

  const double* at(std::size_t y, std::size_t x) const { return data.data() + (y * width + x) * 6; }
};

enum class RayFrame { world, camera };

/// Normalised image coordinate of pixel centre `index` along an axis of `extent` pixels.
inline double pixel_coordinate(std::size_t index, std::size_t extent) {
  return 2.0 * (static_cast<double>(index) + 0.5) / static_cast<double>(extent) - 1.0;
}

/// Unit ray direction in the camera frame for normalised pixel coordinates (u, v).
Vec3 camera_ray_direction(const Intrinsics& k, double u, double v);

/// Rays through every pixel centre. In the world frame the origin is the camera
/// centre and m = o × d; in the camera frame the origin is 0 and so is m.
PluckerRayMap plucker_ray_map(const Pose& pose, const Intrinsics& k, std::size_t height, std::size_t width,
                              RayFrame frame = RayFrame::world);

inline constexpr double kDefaultConditionBound = 1e6;

/// K̂ = [[fx,0,cx,0],[0,fy,cy,0],[0,0,1,0],[0,0,0,1]].
Mat4 intrinsics_matrix(const Intrinsics& k);

/// P = K̂·W. Throws NumericalError if cond(P) exceeds `condition_bound`.
Mat4 projection_matrix(const Pose& pose, const Intrinsics& k, double condition_bound = kDefaultConditionBound);

}  // namespace svsm
