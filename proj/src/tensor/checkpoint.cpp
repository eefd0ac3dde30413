// Copyright 2026 The svsmlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "svsm/tensor/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "svsm/errors.hpp"
#include "svsm/util/binary_io.hpp"

namespace svsm {

template <typename T>
void save_checkpoint(const std::filesystem::path& path, const std::vector<NamedTensor<T>>& tensors) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cannot open " + tmp.string() + " for writing");
    io::Writer w(os);
    w.bytes(kCheckpointMagic, sizeof(kCheckpointMagic));
    w.put<std::uint32_t>(kCheckpointVersion);
    w.put<std::uint32_t>(sizeof(T));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(tensors.size()));
    std::uint64_t offset = 0;
    for (const auto& nt : tensors) {
      w.put<std::uint32_t>(static_cast<std::uint32_t>(nt.name.size()));
      w.bytes(nt.name.data(), nt.name.size());
      w.put<std::uint32_t>(static_cast<std::uint32_t>(nt.tensor.rank()));
      for (auto e : nt.tensor.shape()) w.put<std::uint64_t>(e);
      w.put<std::uint64_t>(offset);
      offset += nt.tensor.size() * sizeof(T);
    }
    for (const auto& nt : tensors) {
      for (std::size_t i = 0; i < nt.tensor.size(); ++i) w.put<T>(nt.tensor[i]);
    }
    os.flush();
    if (!os) throw Error("failed writing checkpoint " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

template <typename T>
std::vector<NamedTensor<T>> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open checkpoint " + path.string());
  io::Reader r(is);
  char magic[8];
  r.bytes(magic, sizeof(magic), "magic");
  if (std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) throw FormatError("not an SVSMCKPT file", 0);
  const auto version = r.get<std::uint32_t>("version");
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version), r.offset() - 4);
  }
  const auto width = r.get<std::uint32_t>("element width");
  if (width != 4 && width != 8) throw FormatError("bad element width " + std::to_string(width), r.offset() - 4);
  const auto count = r.get<std::uint32_t>("entry count");
  struct Entry {
    std::string name;
    Shape shape;
    std::uint64_t offset;
  };
  std::vector<Entry> manifest;
  std::uint64_t expected = 0;
  for (std::uint32_t i = 0; i < count; ++i) {
    Entry e;
    const auto len = r.get<std::uint32_t>("name length");
    if (len > (1u << 16)) throw FormatError("implausible name length", r.offset() - 4);
    e.name.resize(len);
    r.bytes(e.name.data(), len, "name");
    const auto rank = r.get<std::uint32_t>("rank");
    if (rank > 8) throw FormatError("implausible rank", r.offset() - 4);
    for (std::uint32_t d = 0; d < rank; ++d) e.shape.push_back(r.get<std::uint64_t>("extent"));
    e.offset = r.get<std::uint64_t>("offset");
    if (e.offset != expected) throw FormatError("non-contiguous payload offset for " + e.name, r.offset() - 8);
    expected += numel(e.shape) * width;
    manifest.push_back(std::move(e));
  }
  std::vector<NamedTensor<T>> out;
  out.reserve(manifest.size());
  for (auto& e : manifest) {
    Tensor<T> t(e.shape);
    for (std::size_t i = 0; i < t.size(); ++i) {
      t[i] = width == 4 ? static_cast<T>(r.get<float>("payload")) : static_cast<T>(r.get<double>("payload"));
    }
    out.push_back({std::move(e.name), std::move(t)});
  }
  return out;
}

template void save_checkpoint(const std::filesystem::path&, const std::vector<NamedTensor<float>>&);
template void save_checkpoint(const std::filesystem::path&, const std::vector<NamedTensor<double>>&);
template std::vector<NamedTensor<float>> load_checkpoint(const std::filesystem::path&);
template std::vector<NamedTensor<double>> load_checkpoint(const std::filesystem::path&);

}  // namespace svsm
