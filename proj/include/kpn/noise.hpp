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

#include "kpn/tensor.hpp"

namespace kpn {

// Fixed additive-noise raster, [3, H, W], every value in [0, 1]. Generated
// once per run from a seed and shared by every image of that run.
struct NoiseField {
  std::uint64_t seed = 0;
  Tensor values;

  std::size_t height() const { return values.dim(1); }
  std::size_t width() const { return values.dim(2); }
};

// Standard normal sample from a counter-based generator: sample `index` of
// stream `seed` is a pure function of the pair.
double noise_normal_sample(std::uint64_t seed, std::uint64_t index);

Real clamp_noise_sample(double z);

// Element (c, y, x) uses index (y * W + x) * 3 + c.
NoiseField generate_noise_field(std::uint64_t seed, std::size_t height,
                                std::size_t width);

// Stateless 64-bit mixer used for counter-based streams.
std::uint64_t mix64(std::uint64_t key, std::uint64_t counter);

}  // namespace kpn
