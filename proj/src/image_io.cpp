/* Copyright 2026 The kpn-translate Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License. */

#include "kpn/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <memory>
#include <string>

namespace kpn {
namespace {

struct RawPng {
  std::size_t height = 0;
  std::size_t width = 0;
  int channels = 0;   // 1 (gray) or 3 (rgb) after expansion
  int bit_depth = 8;  // 8 or 16
  std::vector<std::uint8_t> bytes;
};

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};

void png_warning_fn(png_structp, png_const_charp) {}

void png_error_fn(png_structp png, png_const_charp msg) {
  auto* buf = static_cast<std::string*>(png_get_error_ptr(png));
  if (buf) *buf = msg;
  png_longjmp(png, 1);
}

// Decodes a PNG to gray or RGB samples, stripping alpha and expanding
// palettes and sub-byte depths.
RawPng read_png(const std::filesystem::path& path) {
  std::unique_ptr<std::FILE, FileCloser> file(std::fopen(path.c_str(), "rb"));
  if (!file) throw IoError("cannot open " + path.string());
  png_byte sig[8];
  if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw FormatError(path.string() + ": not a PNG file");
  }
  std::string err;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &err,
                                           png_error_fn, png_warning_fn);
  if (!png) throw Error("libpng: out of memory");
  png_infop info = png_create_info_struct(png);
  RawPng out;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError(path.string() + ": " + err);
  }
  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if ((color & PNG_COLOR_MASK_ALPHA) || png_get_valid(png, info, PNG_INFO_tRNS)) {
    png_set_strip_alpha(png);
  }
  png_read_update_info(png, info);
  out.width = png_get_image_width(png, info);
  out.height = png_get_image_height(png, info);
  out.bit_depth = png_get_bit_depth(png, info);
  out.channels = png_get_channels(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  out.bytes.resize(rowbytes * out.height);
  rows.resize(out.height);
  for (std::size_t y = 0; y < out.height; ++y) rows[y] = out.bytes.data() + y * rowbytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  if (out.channels != 1 && out.channels != 3) {
    throw FormatError(path.string() + ": unsupported channel count " +
                      std::to_string(out.channels));
  }
  return out;
}

void write_png(const std::filesystem::path& path, const std::uint8_t* data,
               std::size_t height, std::size_t width, bool rgb) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = rgb ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&image, path.c_str(), 0, data, 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw IoError("cannot write " + path.string() + ": " + msg);
  }
}

}  // namespace

std::uint8_t quantize_unit(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

Tensor Image8::to_tensor() const {
  Tensor t({3, height, width});
  for (std::size_t i = 0; i < data.size(); ++i)
    t[i] = static_cast<Real>(data[i]) / Real(255);
  return t;
}

Image8 Image8::from_tensor(const Tensor& rgb) {
  require_rank(rgb, 3, "image");
  if (rgb.dim(0) != 3) throw DimensionError("image must have 3 channels");
  Image8 img{rgb.dim(1), rgb.dim(2), std::vector<std::uint8_t>(rgb.numel())};
  for (std::size_t i = 0; i < rgb.numel(); ++i) img.data[i] = quantize_unit(rgb[i]);
  return img;
}

Tensor load_image(const std::filesystem::path& path) {
  const RawPng raw = read_png(path);
  const std::size_t n = raw.height * raw.width;
  Tensor t({3, raw.height, raw.width});
  for (std::size_t p = 0; p < n; ++p) {
    for (int c = 0; c < 3; ++c) {
      const std::size_t s = p * raw.channels + (raw.channels == 3 ? c : 0);
      double v;
      if (raw.bit_depth == 16) {
        v = ((raw.bytes[2 * s] << 8) | raw.bytes[2 * s + 1]) / 65535.0;
      } else {
        v = raw.bytes[s] / 255.0;
      }
      t[c * n + p] = static_cast<Real>(v);
    }
  }
  return t;
}

Image8 load_image8(const std::filesystem::path& path) {
  const RawPng raw = read_png(path);
  if (raw.bit_depth != 8) return Image8::from_tensor(load_image(path));
  const std::size_t n = raw.height * raw.width;
  Image8 img{raw.height, raw.width, std::vector<std::uint8_t>(3 * n)};
  for (std::size_t p = 0; p < n; ++p)
    for (int c = 0; c < 3; ++c)
      img.data[c * n + p] = raw.bytes[p * raw.channels + (raw.channels == 3 ? c : 0)];
  return img;
}

void save_image8(const std::filesystem::path& path, const Image8& image) {
  const std::size_t n = image.height * image.width;
  std::vector<std::uint8_t> inter(3 * n);
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t c = 0; c < 3; ++c) inter[p * 3 + c] = image.data[c * n + p];
  write_png(path, inter.data(), image.height, image.width, true);
}

void save_image(const std::filesystem::path& path, const Tensor& rgb) {
  save_image8(path, Image8::from_tensor(rgb));
}

LabelMap load_labels(const std::filesystem::path& path) {
  RawPng raw = read_png(path);
  if (raw.channels != 1 || raw.bit_depth != 8) {
    throw FormatError(path.string() +
                      ": label maps must be 8-bit single-channel PNGs");
  }
  return LabelMap{raw.height, raw.width, std::move(raw.bytes)};
}

void save_labels(const std::filesystem::path& path, const LabelMap& labels) {
  write_png(path, labels.data.data(), labels.height, labels.width, false);
}

void save_gray(const std::filesystem::path& path, const Tensor& plane) {
  std::size_t h, w;
  if (plane.rank() == 2) {
    h = plane.dim(0);
    w = plane.dim(1);
  } else if (plane.rank() == 3 && plane.dim(0) == 1) {
    h = plane.dim(1);
    w = plane.dim(2);
  } else {
    throw DimensionError("grayscale image must be [H, W] or [1, H, W]");
  }
  std::vector<std::uint8_t> bytes(h * w);
  for (std::size_t i = 0; i < bytes.size(); ++i) bytes[i] = quantize_unit(plane[i]);
  write_png(path, bytes.data(), h, w, false);
}

void save_rgb_interleaved(const std::filesystem::path& path,
                          const std::vector<std::uint8_t>& rgb,
                          std::size_t height, std::size_t width) {
  if (rgb.size() != height * width * 3) {
    throw DimensionError("interleaved RGB buffer has the wrong size");
  }
  write_png(path, rgb.data(), height, width, true);
}

}  // namespace kpn
