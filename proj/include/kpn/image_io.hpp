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

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "kpn/tensor.hpp"

namespace kpn {

enum class ColorSpace { kRgb, kHsv };

// Floating-point image, [3, H, W] with values in [0, 1].
struct Image {
  Tensor pixels;
  ColorSpace space = ColorSpace::kRgb;
  std::size_t height() const { return pixels.dim(1); }
  std::size_t width() const { return pixels.dim(2); }
};

// 8-bit RGB image stored channel-major, [3, H, W].
struct Image8 {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> data;

  Tensor to_tensor() const;
  // Values are clamped to [0, 1] and rounded to the nearest level.
  static Image8 from_tensor(const Tensor& rgb);
};

// Row-major class-index map.
struct LabelMap {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> data;
};

std::uint8_t quantize_unit(double v);

// Any PNG color type is accepted (palette and gray are expanded, alpha is
// dropped). 16-bit samples map to v / 65535, 8-bit to v / 255.
Tensor load_image(const std::filesystem::path& path);
Image8 load_image8(const std::filesystem::path& path);
void save_image(const std::filesystem::path& path, const Tensor& rgb);
void save_image8(const std::filesystem::path& path, const Image8& image);

// Labels are 8-bit single-channel PNGs; anything else is a FormatError.
LabelMap load_labels(const std::filesystem::path& path);
void save_labels(const std::filesystem::path& path, const LabelMap& labels);

// Writes an 8-bit grayscale PNG from a [H, W] or [1, H, W] tensor in [0, 1].
void save_gray(const std::filesystem::path& path, const Tensor& plane);
// Writes interleaved 8-bit RGB (H * W * 3 bytes).
void save_rgb_interleaved(const std::filesystem::path& path,
                          const std::vector<std::uint8_t>& rgb,
                          std::size_t height, std::size_t width);

}  // namespace kpn
