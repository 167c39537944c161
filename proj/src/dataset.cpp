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

#include "kpn/dataset.hpp"

#include <algorithm>
#include <iostream>
#include <string>

#include "kpn/ops.hpp"

namespace kpn {

std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir,
                                               const char* prefix) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) {
    throw IoError("not a directory: " + dir.string());
  }
  std::vector<std::filesystem::path> out;
  const std::string pre = prefix;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_regular_file() && name.rfind(pre, 0) == 0 &&
        entry.path().extension() == ".png") {
      out.push_back(entry.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

SourceDataset SourceDataset::load(const std::filesystem::path& dir) {
  SourceDataset ds;
  for (const auto& img_path : list_images(dir)) {
    std::string name = img_path.filename().string();
    name.replace(0, 4, "lbl_");
    const auto lbl_path = img_path.parent_path() / name;
    if (!std::filesystem::exists(lbl_path)) {
      throw DataError("missing label map " + lbl_path.string());
    }
    SourceSample s{load_image8(img_path), load_labels(lbl_path)};
    if (s.labels.height != s.image.height || s.labels.width != s.image.width) {
      throw DataError(lbl_path.string() + " does not match the size of " +
                      img_path.string());
    }
    ds.samples.push_back(std::move(s));
  }
  if (ds.samples.empty()) throw DataError("no source images in " + dir.string());
  return ds;
}

TargetDataset TargetDataset::load(const std::filesystem::path& dir,
                                  std::size_t min_h, std::size_t min_w) {
  TargetDataset ds;
  for (const auto& path : list_images(dir)) {
    Image8 img = load_image8(path);
    if (img.height < min_h || img.width < min_w) {
      std::cerr << "warning: skipping " << path.string() << " (" << img.height
                << "x" << img.width << " is smaller than " << min_h << "x"
                << min_w << ")\n";
      continue;
    }
    ds.images.push_back(std::move(img));
  }
  if (ds.images.empty()) throw DataError("no usable target images in " + dir.string());
  return ds;
}

Batch sample_batch(const SourceDataset& source, const TargetDataset& target,
                   const Geometry& geometry, std::size_t batch_size, Rng& rng) {
  if (source.samples.empty() || target.images.empty()) {
    throw DataError("cannot sample from an empty dataset");
  }
  const std::size_t ph = geometry.patch_h(), pw = geometry.patch_w();
  Batch b;
  for (std::size_t i = 0; i < batch_size; ++i) {
    b.source_index.push_back(rng.below(source.samples.size()));
    b.cell_y.push_back(rng.below(geometry.grid));
    b.cell_x.push_back(rng.below(geometry.grid));
    const Image8& tgt = target.images[rng.below(target.images.size())];
    const std::size_t ty = rng.below(tgt.height / ph);
    const std::size_t tx = rng.below(tgt.width / pw);
    const Tensor t = tgt.to_tensor();
    b.target_patches.push_back(crop_chw(t, ty * ph, tx * pw, ph, pw));
    b.target_lowres.push_back(resize_bilinear(t, geometry.lo_h, geometry.lo_w));
  }
  return b;
}

}  // namespace kpn
