// Copyright 2026 The svsmlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "svsm/util/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <vector>

#include "svsm/errors.hpp"

namespace svsm {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using File = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

void write_png(const std::filesystem::path& path, const Tensor<float>& image) {
  if (image.rank() != 3 || image.dim(2) != 3) throw DimensionError("write_png expects [H, W, 3]");
  const auto h = static_cast<png_uint_32>(image.dim(0)), w = static_cast<png_uint_32>(image.dim(1));
  std::vector<png_byte> pixels(image.size());  // built before libpng may longjmp
  for (std::size_t i = 0; i < image.size(); ++i)
    pixels[i] = static_cast<png_byte>(std::lround(std::clamp(image[i], 0.0f, 1.0f) * 255.0f));

  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    File f(std::fopen(tmp.c_str(), "wb"));
    if (!f) throw Error("cannot open " + tmp.string() + " for writing");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!info) {
      png_destroy_write_struct(&png, nullptr);
      throw Error("libpng initialisation failed");
    }
    if (setjmp(png_jmpbuf(png))) {
      png_destroy_write_struct(&png, &info);
      throw Error("failed writing PNG " + tmp.string());
    }
    png_init_io(png, f.get());
    png_set_IHDR(png, info, w, h, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (png_uint_32 y = 0; y < h; ++y) png_write_row(png, pixels.data() + std::size_t(y) * w * 3);
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
  }
  std::filesystem::rename(tmp, path);
}

Tensor<float> read_png(const std::filesystem::path& path) {
  File f(std::fopen(path.c_str(), "rb"));
  if (!f) throw Error("cannot open " + path.string());
  png_byte sig[8];
  if (std::fread(sig, 1, 8, f.get()) != 8 || png_sig_cmp(sig, 0, 8)) throw FormatError("not a PNG file", 0);
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw Error("libpng initialisation failed");
  }
  // Objects with destructors live outside the region libpng may longjmp across.
  Tensor<float> out;
  std::vector<png_byte> row;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("corrupt PNG " + path.string(), 8);
  }
  png_init_io(png, f.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  const png_uint_32 w = png_get_image_width(png, info), h = png_get_image_height(png, info);
  const int depth = png_get_bit_depth(png, info), type = png_get_color_type(png, info);
  if (depth != 8 || (type != PNG_COLOR_TYPE_RGB && type != PNG_COLOR_TYPE_RGBA)) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("only 8-bit RGB or RGBA PNG images are supported", 8);
  }
  const std::size_t channels = type == PNG_COLOR_TYPE_RGBA ? 4 : 3;
  row.resize(std::size_t(w) * channels);
  out = Tensor<float>({h, w, 3});
  for (png_uint_32 y = 0; y < h; ++y) {
    png_read_row(png, row.data(), nullptr);
    for (png_uint_32 x = 0; x < w; ++x)
      for (std::size_t c = 0; c < 3; ++c) out[(std::size_t(y) * w + x) * 3 + c] = float(row[x * channels + c]) / 255.0f;
  }
  png_destroy_read_struct(&png, &info, nullptr);
  return out;
}

}  // namespace svsm
