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

#include "kpn/model.hpp"

#include "kpn/ops.hpp"

namespace kpn {

Model Model::create(const Encoder& encoder, const Geometry& geometry,
                    SigmaBounds bounds, std::uint64_t noise_seed,
                    std::uint64_t init_seed, bool two_discriminators) {
  geometry.validate();
  Model m;
  m.geometry = geometry;
  m.sigma_bounds = bounds;
  m.noise_seed = noise_seed;
  m.encoder = encoder;
  m.kpn = Kpn::identity(encoder.n_classes(), bounds);
  m.disc = Discriminator::init(init_seed);
  if (two_discriminators) m.disc_low = Discriminator::init(init_seed + 1);
  return m;
}

TransformConfig Model::transform_config() const {
  TransformConfig cfg;
  cfg.enable_affine = enable_affine;
  cfg.enable_blur = enable_blur;
  cfg.enable_noise = enable_noise;
  cfg.sigma_bounds = sigma_bounds;
  return cfg;
}

NoiseField Model::noise_field() const {
  return generate_noise_field(noise_seed, geometry.hi_h, geometry.hi_w);
}

Tensor Model::predict_raw(const Tensor& image, const LabelMap* labels) const {
  Tensor low = resize_bilinear(image, geometry.lo_h, geometry.lo_w);
  return kpn.forward(encoder.forward(low, labels));
}

ParamMap Model::predict_params(const Tensor& image,
                               const LabelMap* labels) const {
  return constrain(RawParamMap(predict_raw(image, labels)), sigma_bounds);
}

Tensor Model::translate(const Tensor& image, const LabelMap* labels,
                        const NoiseField& noise,
                        const TransformConfig& cfg) const {
  check_translate_geometry(image,
                           Tensor({kParamChannels, geometry.lo_h, geometry.lo_w}),
                           noise.values, geometry);
  return translate_image(image, predict_params(image, labels), noise, geometry,
                         cfg);
}

}  // namespace kpn
