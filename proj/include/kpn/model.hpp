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

#include <cstdint>
#include <optional>

#include "kpn/image_io.hpp"
#include "kpn/networks.hpp"
#include "kpn/noise.hpp"
#include "kpn/param_map.hpp"
#include "kpn/translate.hpp"

namespace kpn {

// Everything needed to translate an image: networks plus the settings they
// were trained under.
struct Model {
  Geometry geometry = Geometry::desk();
  SigmaBounds sigma_bounds;
  std::uint64_t noise_seed = 0;
  bool enable_affine = true;
  bool enable_blur = true;
  bool enable_noise = true;
  std::uint64_t iteration = 0;

  Encoder encoder = Encoder::oracle(4);
  Kpn kpn = Kpn::identity(4);
  Discriminator disc = Discriminator::init(0);
  // Separate low-resolution discriminator (two-discriminator mode only).
  std::optional<Discriminator> disc_low;

  // Identity KPN, freshly initialized discriminator(s).
  static Model create(const Encoder& encoder, const Geometry& geometry,
                      SigmaBounds bounds, std::uint64_t noise_seed,
                      std::uint64_t init_seed, bool two_discriminators);

  TransformConfig transform_config() const;
  NoiseField noise_field() const;

  // Raw parameters [12, lo_h, lo_w] for a high-resolution image.
  Tensor predict_raw(const Tensor& image, const LabelMap* labels) const;
  ParamMap predict_params(const Tensor& image, const LabelMap* labels) const;
  Tensor translate(const Tensor& image, const LabelMap* labels,
                   const NoiseField& noise, const TransformConfig& cfg) const;
};

}  // namespace kpn
