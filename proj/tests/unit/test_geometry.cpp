// Copyright 2026 The svsmlab Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "svsm/errors.hpp"
#include "svsm/geometry/prope.hpp"
#include "svsm/tensor/grad_check.hpp"
#include "svsm/tensor/nn.hpp"
#include "svsm/util/random.hpp"
#include "support/oracles.hpp"

namespace svsm {
namespace {

using D = double;

Mat4 apply_k(const Mat4& m) { return mat4_mul(intrinsics_matrix({1.3, 0.9, 0.1, -0.2}), m); }

TEST(Pose, RelativePoseIdentities) {
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const Pose a = random_rigid(rng), b = random_rigid(rng), c = random_rigid(rng);
    EXPECT_LT(mat4_max_abs_diff(relative_pose(a, a).matrix(), mat4_identity()), 1e-12);
    EXPECT_LT(mat4_max_abs_diff(relative_pose(Pose(), a).matrix(), a.matrix()), 1e-15);
    EXPECT_LT(mat4_max_abs_diff((a * relative_pose(a, b)).matrix(), b.matrix()), 1e-9);
    EXPECT_LT(mat4_max_abs_diff((relative_pose(a, b) * relative_pose(b, c)).matrix(), relative_pose(a, c).matrix()),
              1e-9);
    EXPECT_TRUE(relative_pose(a, b).is_valid());
    EXPECT_TRUE(a.inverse().is_valid());
  }
}

TEST(Pose, ValidationRejectsNonRigid) {
  Mat4 m = mat4_identity();
  m[0] = 2.0;
  EXPECT_FALSE(Pose(m).is_valid());
  EXPECT_THROW(Pose(m).validate(), ConfigError);
  Mat4 reflect = mat4_identity();
  reflect[10] = -1.0;
  EXPECT_FALSE(Pose(reflect).is_valid());
}

TEST(Pose, LookAtDefaultIsIdentity) {
  const Pose p = Pose::look_at({0, 0, 0}, {0, 0, 5});
  EXPECT_LT(mat4_max_abs_diff(p.matrix(), mat4_identity()), 1e-15);
  const Pose q = Pose::look_at({1, 2, -3}, {0, 0, 0});
  EXPECT_TRUE(q.is_valid(1e-12));
  const Vec3 c = q.center();
  EXPECT_NEAR(c[0], 1, 1e-12);
  EXPECT_NEAR(c[1], 2, 1e-12);
  EXPECT_NEAR(c[2], -3, 1e-12);
}

TEST(Plucker, OnAxisRayThroughOrigin) {
  // 3x3 image: the centre pixel has u = v = 0.
  auto map = plucker_ray_map(Pose(), Intrinsics{}, 3, 3);
  const double* r = map.at(1, 1);
  EXPECT_EQ(r[0], 0.0);
  EXPECT_EQ(r[1], 0.0);
  EXPECT_EQ(r[2], 1.0);
  for (int i = 3; i < 6; ++i) EXPECT_EQ(std::abs(r[i]), 0.0);
}

TEST(Plucker, TranslatedCameraMoment) {
  // Camera centre at (1,0,0): W = [I | -c].
  const Pose p = Pose::from_rt({1, 0, 0, 0, 1, 0, 0, 0, 1}, {-1, 0, 0});
  auto map = plucker_ray_map(p, Intrinsics{}, 3, 3);
  const double* r = map.at(1, 1);
  const Vec3 expected = cross({1, 0, 0}, {0, 0, 1});
  EXPECT_EQ(expected[1], -1.0);
  EXPECT_NEAR(r[2], 1.0, 1e-15);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(r[3 + i], expected[i], 1e-15);
}

TEST(Plucker, IdentitiesHoldEverywhere) {
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const Pose p = random_rigid(rng);
    auto map = plucker_ray_map(p, Intrinsics{1.1, 0.8, 0.05, -0.1}, 7, 5);
    for (std::size_t y = 0; y < 7; ++y)
      for (std::size_t x = 0; x < 5; ++x) {
        const double* r = map.at(y, x);
        EXPECT_NEAR(r[0] * r[0] + r[1] * r[1] + r[2] * r[2], 1.0, 1e-6);
        EXPECT_NEAR(r[0] * r[3] + r[1] * r[4] + r[2] * r[5], 0.0, 1e-6);
      }
  }
}

TEST(Plucker, RejectsDegenerateIntrinsics) {
  EXPECT_THROW(plucker_ray_map(Pose(), Intrinsics{0.0, 1.0, 0, 0}, 4, 4), ConfigError);
  EXPECT_THROW(plucker_ray_map(Pose(), Intrinsics{1.0, -1.0, 0, 0}, 4, 4), ConfigError);
}

TEST(Projection, IdentityAndBlockStructure) {
  EXPECT_EQ(projection_matrix(Pose(), Intrinsics{}), mat4_identity());
  const Intrinsics k{1.2, 0.7, 0.1, -0.3};
  const Vec3 t{0.4, -0.5, 0.9};
  const Mat4 p = projection_matrix(Pose::from_rt({1, 0, 0, 0, 1, 0, 0, 0, 1}, t), k);
  const Mat4 kh = intrinsics_matrix(k);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_DOUBLE_EQ(p[i * 4 + j], kh[i * 4 + j]);
  for (int i = 0; i < 3; ++i) {
    double expected = 0;
    for (int j = 0; j < 3; ++j) expected += kh[i * 4 + j] * t[j];
    EXPECT_DOUBLE_EQ(p[i * 4 + 3], expected);
  }
}

TEST(Projection, InverseRoundTrip) {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const Mat4 p = projection_matrix(random_rigid(rng), Intrinsics{rng.uniform(0.5, 2), rng.uniform(0.5, 2), 0.1, 0.2});
    EXPECT_LT(mat4_max_abs_diff(mat4_mul(p, mat4_inverse(p)), mat4_identity()), 1e-9);
  }
}

TEST(Projection, ConditionGuard) {
  EXPECT_THROW(projection_matrix(Pose(), Intrinsics{1e-7, 1.0, 0, 0}), NumericalError);
  EXPECT_THROW(mat4_inverse(Mat4{}), NumericalError);
}

TEST(Rho, IdentityInverseAndBlockOracle) {
  Tape<D> tape(false);
  auto x = random_tensor({2, 3, 8}, 1);
  auto xv = tape.constant(x);
  EXPECT_TRUE(bit_equal(rho_apply(xv, mat4_identity()).value(), x));
  Rng rng(2);
  const Mat4 p = projection_matrix(random_rigid(rng), Intrinsics{1.4, 0.9, 0.1, 0});
  auto back = rho_apply(rho_apply(xv, p), mat4_inverse(p)).value();
  EXPECT_LT(max_abs_diff(back, x), 1e-6);

  auto y = rho_apply(xv, p).value();
  for (std::size_t t = 0; t < 6; ++t)
    for (std::size_t blk = 0; blk < 2; ++blk)
      for (std::size_t r = 0; r < 4; ++r) {
        double e = 0;
        for (std::size_t c = 0; c < 4; ++c) e += p[r * 4 + c] * x[t * 8 + blk * 4 + c];
        EXPECT_NEAR(y[t * 8 + blk * 4 + r], e, 1e-12);
      }
  EXPECT_THROW(rho_apply(tape.constant(random_tensor({2, 6}, 1)), p), ConfigError);
}

TEST(Prope, FactoredMatchesBruteForce) {
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 2 + trial % 7;
    std::vector<Mat4> ps;
    for (std::size_t t = 0; t < n; ++t)
      ps.push_back(projection_matrix(random_rigid(rng), Intrinsics{rng.uniform(0.7, 1.5), rng.uniform(0.7, 1.5), 0.1, -0.1}));
    auto q = random_tensor({1, n, 8}, 10 + trial), k = random_tensor({1, n, 8}, 20 + trial),
         v = random_tensor({1, n, 8}, 30 + trial);
    Tape<D> tape(false);
    auto fast = prope_attention<D>(tape.constant(q), tape.constant(k), tape.constant(v), ps, ps, 2).value();
    EXPECT_LT(max_abs_diff(fast, oracle::brute_force_prope(q, k, v, ps, ps, 2)), 1e-9);
  }
}

TEST(Prope, TwoViewsOneHeadHandApplied) {
  Rng rng(6);
  std::vector<Mat4> ps{projection_matrix(random_rigid(rng), Intrinsics{}), projection_matrix(random_rigid(rng), Intrinsics{})};
  auto q = random_tensor({1, 2, 4}, 1), k = random_tensor({1, 2, 4}, 2), v = random_tensor({1, 2, 4}, 3);
  Tape<D> tape(false);
  auto fast = prope_attention<D>(tape.constant(q), tape.constant(k), tape.constant(v), ps, ps, 1).value();
  EXPECT_LT(max_abs_diff(fast, oracle::brute_force_prope(q, k, v, ps, ps, 1)), 1e-9);
}

TEST(Prope, SharedProjectionIsPlainAttention) {
  Rng rng(7);
  const Mat4 p = projection_matrix(random_rigid(rng), Intrinsics{1.1, 0.9, 0, 0});
  std::vector<Mat4> ps(5, p);
  auto q = random_tensor({1, 5, 8}, 1), k = random_tensor({1, 5, 8}, 2), v = random_tensor({1, 5, 8}, 3);
  Tape<D> tape(false);
  auto a = prope_attention<D>(tape.constant(q), tape.constant(k), tape.constant(v), ps, ps, 2).value();
  auto b = nn::attention_block(tape.constant(q), tape.constant(k), tape.constant(v), 2).value();
  EXPECT_LT(max_abs_diff(a, b), 1e-6);

  std::vector<Mat4> ids(5, mat4_identity());
  auto c = prope_attention<D>(tape.constant(q), tape.constant(k), tape.constant(v), ids, ids, 2).value();
  EXPECT_TRUE(bit_equal(c, b));
}

TEST(Prope, InvariantUnderWorldReframe) {
  Rng rng(8);
  const std::size_t n = 6;
  std::vector<Pose> poses;
  for (std::size_t t = 0; t < n; ++t) poses.push_back(random_rigid(rng));
  const Intrinsics k{1.2, 1.1, 0.05, -0.05};
  auto q = random_tensor({1, n, 16}, 1), kk = random_tensor({1, n, 16}, 2), v = random_tensor({1, n, 16}, 3);
  auto run = [&](const Pose& g) {
    std::vector<Mat4> ps;
    for (const auto& p : poses) ps.push_back(projection_matrix(p * g, k));
    Tape<D> tape(false);
    return prope_attention<D>(tape.constant(q), tape.constant(kk), tape.constant(v), ps, ps, 2).value();
  };
  const auto base = run(Pose());
  double scale = 0;
  for (double x : base.data()) scale = std::max(scale, std::abs(x));
  for (int trial = 0; trial < 20; ++trial) EXPECT_LT(max_abs_diff(run(random_rigid(rng)), base) / scale, 1e-5);
}

TEST(Prope, Errors) {
  Tape<D> tape(false);
  auto x = tape.constant(random_tensor({1, 2, 8}, 1));
  std::vector<Mat4> ps(2, mat4_identity());
  EXPECT_THROW(prope_attention<D>(x, x, x, ps, ps, 4), ConfigError);  // head width 2
  std::vector<Mat4> bad = ps;
  bad[1] = Mat4{};
  EXPECT_THROW(prope_attention<D>(x, x, x, ps, bad, 2), NumericalError);
  std::vector<Mat4> few(1, mat4_identity());
  EXPECT_THROW(prope_attention<D>(x, x, x, few, ps, 2), DimensionError);
}

TEST(Prope, GradientsMatchFiniteDifferences) {
  Rng rng(9);
  std::vector<Mat4> ps;
  for (int t = 0; t < 6; ++t) ps.push_back(apply_k(random_rigid(rng).matrix()));
  auto fn = [&](Tape<D>& tape, std::span<const Var<D>> v) {
    auto w = tape.constant(random_tensor({2, 3, 8}, 99));
    return ops::sum(ops::mul(prope_attention<D>(v[0], v[1], v[2], ps, ps, 2), w));
  };
  std::vector<Tensor<D>> in{random_tensor({2, 3, 8}, 1), random_tensor({2, 3, 8}, 2), random_tensor({2, 3, 8}, 3)};
  for (auto& t : in) t.set_requires_grad(true);
  EXPECT_LT(grad_check(fn, in).max_rel_error, 1e-5);
}

}  // namespace
}  // namespace svsm
