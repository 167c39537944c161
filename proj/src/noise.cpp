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

#include "kpn/noise.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "kpn/parallel.hpp"

namespace kpn {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t mix64(std::uint64_t key, std::uint64_t counter) {
  return splitmix64(splitmix64(key) ^ (counter * 0xD1B54A32D192ED03ULL));
}

double noise_normal_sample(std::uint64_t seed, std::uint64_t index) {
  // Box-Muller on two 53-bit uniforms; u1 in (0, 1] keeps the log finite.
  const std::uint64_t a = mix64(seed, 2 * index);
  const std::uint64_t b = mix64(seed, 2 * index + 1);
  const double u1 = (static_cast<double>(a >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = static_cast<double>(b >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Real clamp_noise_sample(double z) {
  return static_cast<Real>(std::clamp(z, 0.0, 1.0));
}

NoiseField generate_noise_field(std::uint64_t seed, std::size_t height,
                                std::size_t width) {
  NoiseField field{seed, Tensor({3, height, width})};
  const std::size_t n = height * width;
  parallel_for(height, [&](std::size_t y) {
    for (std::size_t x = 0; x < width; ++x) {
      const std::size_t p = y * width + x;
      for (std::size_t c = 0; c < 3; ++c) {
        field.values[c * n + p] =
            clamp_noise_sample(noise_normal_sample(seed, p * 3 + c));
      }
    }
  });
  return field;
}

}  // namespace kpn
