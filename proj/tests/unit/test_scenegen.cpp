// Copyright 2026 The svsmlab Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include <unistd.h>

#include "svsm/errors.hpp"
#include "svsm/scenegen/dataset.hpp"
#include "svsm/scenegen/render.hpp"
#include "svsm/util/random.hpp"

namespace svsm {
namespace {

std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("svsm_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  return dir;
}

TEST(Scene, DeterministicAndBounded) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto a = generate_scene(seed);
    EXPECT_EQ(a, generate_scene(seed));
    EXPECT_GE(a.primitives.size(), kMinPrimitives);
    EXPECT_LE(a.primitives.size(), kMaxPrimitives);
    for (const auto& p : a.primitives) {
      for (double c : p.center) EXPECT_LE(std::abs(c), 0.5);
      EXPECT_GT(p.size[0], 0.0);
      for (double al : p.albedo) EXPECT_TRUE(al >= 0.0 && al <= 1.0);
    }
    EXPECT_NEAR(dot(a.light_direction, a.light_direction), 1.0, 1e-12);
  }
}

TEST(Scene, NeighbouringSeedsDiffer) {
  for (std::uint64_t seed = 0; seed < 100; ++seed)
    EXPECT_NE(generate_scene(seed).primitives, generate_scene(seed + 1).primitives);
}

TEST(Render, EmptySceneIsBackground) {
  SceneSpec s;
  s.background = {0.1, 0.2, 0.3};
  auto img = render_view(s, Pose(), Intrinsics{}, 6, 4);
  for (std::size_t i = 0; i < img.size(); ++i) EXPECT_EQ(img[i], static_cast<float>(s.background[i % 3]));
}

TEST(Render, SphereCentrePixel) {
  SceneSpec s;
  s.primitives.push_back({PrimitiveKind::sphere, {0, 0, 3}, {1, 0, 0}, {0.5, 0.7, 0.9}});
  s.light_direction = {0, 0, -1};
  auto img = render_view(s, Pose(), Intrinsics{}, 5, 5);
  const float* c = img.ptr() + (2 * 5 + 2) * 3;
  // Hit at (0,0,2) with normal (0,0,-1) facing the light: albedo·(1 + 0.2).
  EXPECT_FLOAT_EQ(c[0], 0.6f);
  EXPECT_FLOAT_EQ(c[1], 0.84f);
  EXPECT_FLOAT_EQ(c[2], 1.0f);
}

TEST(Render, BoxFaceShading) {
  SceneSpec s;
  s.primitives.push_back({PrimitiveKind::box, {0, 0, 2}, {0.5, 0.5, 0.5}, {0.5, 0.5, 0.5}});
  s.light_direction = normalized({0, 0, -1});
  auto img = render_view(s, Pose(), Intrinsics{}, 3, 3);
  EXPECT_FLOAT_EQ(img[(1 * 3 + 1) * 3], 0.6f);
}

TEST(Render, WorldReframeLeavesImageUnchanged) {
  Rng rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    SceneSpec s = generate_scene(100 + trial);
    for (auto& p : s.primitives) p.kind = PrimitiveKind::sphere;  // spheres stay spheres under rotation
    const Pose cam = Pose::look_at({0.3, -0.8, -1.5}, {0, 0, 0});
    const Pose a = random_rigid(rng, 0.7);  // world reframe x -> R x + t
    SceneSpec moved = s;
    const Mat3 r = a.rotation();
    const Vec3 t = a.translation();
    auto rot = [&](const Vec3& v) {
      return Vec3{r[0] * v[0] + r[1] * v[1] + r[2] * v[2], r[3] * v[0] + r[4] * v[1] + r[5] * v[2],
                  r[6] * v[0] + r[7] * v[1] + r[8] * v[2]};
    };
    for (auto& p : moved.primitives) {
      const Vec3 c = rot(p.center);
      p.center = {c[0] + t[0], c[1] + t[1], c[2] + t[2]};
    }
    moved.light_direction = rot(s.light_direction);
    const Intrinsics k{1.1, 1.1, 0, 0};
    auto base = render_view(s, cam, k, 16, 16);
    auto other = render_view(moved, cam * a.inverse(), k, 16, 16);
    EXPECT_LT(max_abs_diff(base, other), 1e-6);
  }
}

TEST(Episode, DisjointAndDeterministic) {
  Rng a(5), b(5);
  const auto ia = sample_frame_indices(24, 24, 2, 6, a);
  const auto ib = sample_frame_indices(24, 24, 2, 6, b);
  EXPECT_EQ(ia.context, ib.context);
  EXPECT_EQ(ia.target, ib.target);
  std::set<std::size_t> all(ia.context.begin(), ia.context.end());
  all.insert(ia.target.begin(), ia.target.end());
  EXPECT_EQ(all.size(), 8u);
}

TEST(Episode, WindowCoverage) {
  Rng rng(6);
  std::vector<int> hits(24, 0);
  for (int i = 0; i < 1000; ++i) {
    auto idx = sample_frame_indices(24, 24, 2, 6, rng);
    for (auto f : idx.context) ++hits[f];
    for (auto f : idx.target) ++hits[f];
  }
  for (int h : hits) EXPECT_GT(h, 0);
}

TEST(Episode, WindowTooSmall) {
  Rng rng(1);
  EXPECT_THROW(sample_frame_indices(24, 6, 2, 6, rng), ConfigError);
  EXPECT_THROW(trajectory_preset("nope"), ConfigError);
}

TEST(Episode, RenderedEpisodeIsConsistent) {
  Rng rng(2);
  const auto scene = generate_scene(9);
  const auto traj = trajectory_preset("multiview");
  auto ep = sample_episode(scene, traj, 2, 3, 8, 8, rng);
  ASSERT_EQ(ep.context.size(), 2u);
  ASSERT_EQ(ep.target.size(), 3u);
  const auto poses = trajectory_poses(traj, scene.seed);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(ep.target[i].pose.matrix(), poses[ep.indices.target[i]].matrix());
    EXPECT_TRUE(ep.target[i].pose.is_valid(1e-6));
  }
  std::set<std::size_t> window(ep.indices.context.begin(), ep.indices.context.end());
  window.insert(ep.indices.target.begin(), ep.indices.target.end());
  EXPECT_LT(*window.rbegin() - *window.begin(), traj.window);
}

TEST(Dataset, FileSizeMatchesLayout) {
  auto dir = temp_dir("ds_size");
  DatasetSpec spec;
  spec.scenes = 1;
  spec.height = spec.width = 8;
  spec.trajectory.frames = spec.trajectory.window = 4;
  write_dataset(dir / "d.bin", generate_dataset(spec));
  EXPECT_EQ(std::filesystem::file_size(dir / "d.bin"), kDatasetHeaderBytes + 4 * (8 * 8 * 3 * 4 + 64 + 16));
  EXPECT_EQ(kDatasetHeaderBytes, 28u);
  std::filesystem::remove_all(dir);
}

TEST(Dataset, RoundTripAndRerender) {
  auto dir = temp_dir("ds_rt");
  DatasetSpec spec;
  spec.seed = 3;
  spec.scenes = 3;
  spec.height = spec.width = 12;
  spec.trajectory = trajectory_preset("stereo");
  const auto data = generate_dataset(spec);
  write_dataset(dir / "d.bin", data);
  const auto back = read_dataset(dir / "d.bin");
  ASSERT_EQ(back.views.size(), data.views.size());
  for (std::size_t i = 0; i < data.views.size(); ++i) {
    EXPECT_TRUE(bit_equal(back.views[i].image, data.views[i].image));
    EXPECT_EQ(back.views[i].pose.matrix(), data.views[i].pose.matrix());
  }
  for (std::uint32_t s = 0; s < back.scenes; ++s) {
    const auto scene = generate_scene(scene_seed(spec.seed, s));
    for (std::uint32_t f = 0; f < back.frames; ++f) {
      const auto& v = back.view(s, f);
      EXPECT_TRUE(bit_equal(render_view(scene, v.pose, v.intrinsics, back.height, back.width), v.image));
    }
  }
  std::filesystem::remove_all(dir);
}

TEST(Dataset, HeldOutSeedsAreDisjoint) {
  std::set<std::uint64_t> train;
  for (std::uint64_t i = 0; i < 1000; ++i) train.insert(scene_seed(7, i));
  for (std::uint64_t i = 0; i < 1000; ++i) EXPECT_EQ(train.count(scene_seed(7, i, true)), 0u);
}

TEST(Dataset, CorruptionIsFormatError) {
  auto dir = temp_dir("ds_bad");
  DatasetSpec spec;
  spec.scenes = 1;
  spec.height = spec.width = 4;
  spec.trajectory.frames = spec.trajectory.window = 2;
  write_dataset(dir / "d.bin", generate_dataset(spec));
  std::filesystem::copy_file(dir / "d.bin", dir / "t.bin");
  {
    std::fstream f(dir / "d.bin", std::ios::in | std::ios::out | std::ios::binary);
    f.write("NOTADATA", 8);
  }
  try {
    read_dataset(dir / "d.bin");
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), 0u);
  }
  std::filesystem::resize_file(dir / "t.bin", std::filesystem::file_size(dir / "t.bin") - 3);
  EXPECT_THROW(read_dataset(dir / "t.bin"), FormatError);
  std::filesystem::resize_file(dir / "t.bin", 10);
  EXPECT_THROW(read_dataset(dir / "t.bin"), FormatError);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace svsm
