// Copyright 2026 The svsmlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <type_traits>

#include "svsm/errors.hpp"

// Little-endian primitive encoding for the checkpoint and dataset formats.
namespace svsm::io {

template <typename U>
U byteswap(U value) {
  static_assert(std::is_unsigned_v<U>);
  U out = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    out = static_cast<U>((out << 8) | ((value >> (8 * i)) & 0xFF));
  }
  return out;
}

template <typename V>
auto to_bits(V value) {
  if constexpr (sizeof(V) == 4) {
    return std::bit_cast<std::uint32_t>(value);
  } else if constexpr (sizeof(V) == 8) {
    return std::bit_cast<std::uint64_t>(value);
  } else {
    static_assert(sizeof(V) == 4 || sizeof(V) == 8, "unsupported width");
  }
}

class Writer {
 public:
  explicit Writer(std::ostream& os) : os_(os) {}

  void bytes(const void* data, std::size_t n) {
    os_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
    offset_ += n;
  }

  template <typename V>
  void put(V value) {
    auto bits = to_bits(value);
    if constexpr (std::endian::native == std::endian::big) bits = byteswap(bits);
    bytes(&bits, sizeof(bits));
  }

  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::ostream& os_;
  std::uint64_t offset_ = 0;
};

class Reader {
 public:
  explicit Reader(std::istream& is) : is_(is) {}

  void bytes(void* data, std::size_t n, const char* what) {
    is_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(is_.gcount()) != n) {
      throw FormatError(std::string("truncated file while reading ") + what, offset_ + static_cast<std::uint64_t>(is_.gcount()));
    }
    offset_ += n;
  }

  template <typename V>
  V get(const char* what) {
    decltype(to_bits(V{})) bits;
    bytes(&bits, sizeof(bits), what);
    if constexpr (std::endian::native == std::endian::big) bits = byteswap(bits);
    return std::bit_cast<V>(bits);
  }

  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::istream& is_;
  std::uint64_t offset_ = 0;
};

}  // namespace svsm::io
