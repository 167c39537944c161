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
#include <filesystem>
#include <vector>

#include "kpn/image_io.hpp"
#include "kpn/param_map.hpp"
#include "kpn/rng.hpp"

namespace kpn {

struct SourceSample {
  Image8 image;
  LabelMap labels;
};

// Source images with label maps: img_*.png paired with lbl_*.png.
struct SourceDataset {
  std::vector<SourceSample> samples;
  // DataError when a label file is missing or sizes disagree.
  static SourceDataset load(const std::filesystem::path& dir);
};

struct TargetDataset {
  std::vector<Image8> images;
  // Images smaller than `min_h` x `min_w` are skipped with a warning.
  static TargetDataset load(const std::filesystem::path& dir,
                            std::size_t min_h = 0, std::size_t min_w = 0);
};

// Sorted img_*.png files of a directory. IoError if it does not exist.
std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir,
                                               const char* prefix = "img_");

struct Batch {
  std::vector<std::size_t> source_index;
  // Grid cell of the translated patch for each source image.
  std::vector<std::size_t> cell_y, cell_x;
  std::vector<Tensor> target_patches;  // [3, patch_h, patch_w]
  std::vector<Tensor> target_lowres;   // [3, lo_h, lo_w]
};

// Uniform choice of source and target images, uniform grid-aligned patch
// locations. Deterministic for a given rng state.
Batch sample_batch(const SourceDataset& source, const TargetDataset& target,
                   const Geometry& geometry, std::size_t batch_size, Rng& rng);

}  // namespace kpn
