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
#include <string>
#include <vector>

#include "kpn/image_io.hpp"
#include "kpn/noise.hpp"
#include "kpn/param_map.hpp"
#include "kpn/translate.hpp"

namespace kpn {

// Constrained translation parameters applied to every pixel of one class.
struct ClassDegradation {
  Real weight[3] = {1, 1, 1};   // HSV
  Real bias[3] = {0, 0, 0};     // HSV
  Real sigma[3] = {0.05, 0.05, 0.05};
  Real noise[3] = {0, 0, 0};

  static ClassDegradation identity(SigmaBounds bounds = {});
};

struct ToySceneSpec {
  Geometry geometry = Geometry::desk();
  SigmaBounds sigma_bounds;
  std::size_t n_classes = 4;
  std::size_t min_shapes = 3;
  std::size_t max_shapes = 6;
  std::uint64_t seed = 1;
  std::uint64_t noise_seed = 2;
  // One entry per class.
  std::vector<ClassDegradation> degradation;

  // Class 1 blurred (sigma 1.5), class 2 darkened (V weight 0.8), class 3
  // noisy (scale 0.3); background untouched.
  static ToySceneSpec standard();
  // Every class untouched.
  static ToySceneSpec identity();

  // ConfigError for missing classes or sigmas outside the bounds.
  void validate() const;
};

enum class ToyDomain : std::uint64_t { kSource = 0, kTarget = 1, kHeldOut = 2 };

struct ToyScene {
  Tensor image;  // [3, hi_h, hi_w]
  LabelMap labels;
};

// Flat-colored rectangles and ellipses over a textured gray background.
// A pure function of (spec.seed, domain, index).
ToyScene make_toy_scene(const ToySceneSpec& spec, ToyDomain domain,
                        std::size_t index);

// Low-resolution constrained map from nearest-downsampled labels.
ParamMap degradation_params(const LabelMap& labels, const ToySceneSpec& spec);

// Applies the per-class degradation with the translation engine.
Tensor reference_degrade(const Tensor& image, const LabelMap& labels,
                         const ToySceneSpec& spec, const NoiseField& noise,
                         const TransformConfig& cfg = {});

struct ToyDatasetPaths {
  std::filesystem::path source;   // img_%05d.png, lbl_%05d.png
  std::filesystem::path target;   // img_%05d.png
  std::filesystem::path heldout;  // img, lbl and ref_%05d.png (degraded)
  std::filesystem::path meta;     // key = value description
};

ToyDatasetPaths toy_dataset_paths(const std::filesystem::path& root);

// Writes `count` source scenes, `count` unrelated degraded target scenes and
// `heldout` evaluation scenes with their reference degradations.
ToyDatasetPaths make_toy_dataset(const ToySceneSpec& spec,
                                 const std::filesystem::path& root,
                                 std::size_t count, std::size_t heldout = 0);

std::string numbered_name(const char* stem, std::size_t index);

}  // namespace kpn
