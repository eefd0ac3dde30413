// Copyright 2026 The svsmlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "svsm/scenegen/dataset.hpp"

#include <cstring>
#include <fstream>

#include "svsm/errors.hpp"
#include "svsm/scenegen/render.hpp"
#include "svsm/util/binary_io.hpp"
#include "svsm/util/random.hpp"

namespace svsm {

std::uint64_t dataset_frame_bytes(std::uint32_t height, std::uint32_t width) {
  return static_cast<std::uint64_t>(height) * width * 3 * 4 + 16 * 4 + 4 * 4;
}

std::uint64_t scene_seed(std::uint64_t base_seed, std::uint64_t index, bool held_out) {
  return mix_seed(mix_seed(base_seed, held_out ? 0xE7A1 : 0x7EA1), index);
}

Dataset generate_dataset(const DatasetSpec& spec, bool held_out) {
  if (spec.scenes == 0 || spec.height == 0 || spec.width == 0) throw ConfigError("dataset needs scenes, H, W >= 1");
  Dataset data;
  data.scenes = spec.scenes;
  data.frames = static_cast<std::uint32_t>(spec.trajectory.frames);
  data.height = spec.height;
  data.width = spec.width;
  data.views.reserve(static_cast<std::size_t>(data.scenes) * data.frames);
  const Intrinsics k = trajectory_intrinsics(spec.trajectory);
  for (std::uint32_t s = 0; s < spec.scenes; ++s) {
    const SceneSpec scene = generate_scene(scene_seed(spec.seed, s, held_out));
    for (const auto& pose : trajectory_poses(spec.trajectory, scene.seed)) {
      data.views.push_back({render_view(scene, pose, k, spec.height, spec.width), pose, k});
    }
  }
  return data;
}

void write_dataset(const std::filesystem::path& path, const Dataset& data) {
  if (data.views.size() != static_cast<std::size_t>(data.scenes) * data.frames)
    throw DimensionError("dataset holds " + std::to_string(data.views.size()) + " views, expected scenes x frames");
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cannot open " + tmp.string() + " for writing");
    io::Writer w(os);
    w.bytes(kDatasetMagic, sizeof(kDatasetMagic));
    w.put<std::uint32_t>(kDatasetVersion);
    w.put<std::uint32_t>(data.scenes);
    w.put<std::uint32_t>(data.frames);
    w.put<std::uint32_t>(data.height);
    w.put<std::uint32_t>(data.width);
    for (const auto& v : data.views) {
      if (v.image.shape() != Shape{data.height, data.width, 3}) throw DimensionError("dataset image has wrong shape");
      for (float x : v.image.data()) w.put<float>(x);
      for (double x : v.pose.matrix()) w.put<float>(static_cast<float>(x));
      for (double x : {v.intrinsics.fx, v.intrinsics.fy, v.intrinsics.cx, v.intrinsics.cy})
        w.put<float>(static_cast<float>(x));
    }
    os.flush();
    if (!os) throw Error("failed writing dataset " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open dataset " + path.string());
  const auto file_size = std::filesystem::file_size(path);
  io::Reader r(is);
  char magic[8];
  r.bytes(magic, sizeof(magic), "magic");
  if (std::memcmp(magic, kDatasetMagic, sizeof(magic)) != 0) throw FormatError("not an SVSMDATA file", 0);
  const auto version = r.get<std::uint32_t>("version");
  if (version != kDatasetVersion) throw FormatError("unsupported dataset version " + std::to_string(version), 8);
  Dataset data;
  data.scenes = r.get<std::uint32_t>("scene count");
  data.frames = r.get<std::uint32_t>("frame count");
  data.height = r.get<std::uint32_t>("height");
  data.width = r.get<std::uint32_t>("width");
  if (data.height == 0 || data.width == 0) throw FormatError("zero image extent", 20);
  const std::uint64_t expected =
      kDatasetHeaderBytes + static_cast<std::uint64_t>(data.scenes) * data.frames * dataset_frame_bytes(data.height, data.width);
  if (file_size < expected) throw FormatError("truncated dataset: expected " + std::to_string(expected) + " bytes", file_size);
  if (file_size > expected) throw FormatError("trailing bytes after dataset payload", expected);

  const std::size_t count = static_cast<std::size_t>(data.scenes) * data.frames;
  data.views.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    CameraView v;
    v.image = Tensor<float>({data.height, data.width, 3});
    for (auto& x : v.image.storage()) x = r.get<float>("image");
    Mat4 m;
    for (auto& x : m) x = static_cast<double>(r.get<float>("pose"));
    v.pose = Pose(m);
    v.intrinsics.fx = r.get<float>("intrinsics");
    v.intrinsics.fy = r.get<float>("intrinsics");
    v.intrinsics.cx = r.get<float>("intrinsics");
    v.intrinsics.cy = r.get<float>("intrinsics");
    data.views.push_back(std::move(v));
  }
  return data;
}

}  // namespace svsm
