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
#include <memory>
#include <vector>

#include "kpn/gaussian.hpp"
#include "kpn/noise.hpp"
#include "kpn/param_map.hpp"
#include "kpn/tape.hpp"
#include "kpn/tensor.hpp"

namespace kpn {

// Blur border handling at patch edges. Reflect mirrors about the pixel edge
// (..., 1, 0 | 0, 1, ...), folding repeatedly for patches narrower than the
// kernel radius.
enum class Padding { kZero, kReflect };

// Arithmetic used by the forward engine. Gradients are always float64.
enum class Precision { kFloat64, kFloat32 };

struct TransformConfig {
  bool enable_affine = true;
  bool enable_blur = true;
  bool enable_noise = true;
  std::size_t kernel_size = kDefaultKernelSize;
  SigmaBounds sigma_bounds;
  Padding padding = Padding::kZero;
  Precision precision = Precision::kFloat64;
  // Skip kernel taps below 2^-70 of the center weight.
  bool truncate_negligible = true;
  // Round sigma to 1e-3 buckets and reuse kernels per bucket.
  bool quantize_sigma = false;

  // ConfigError for an even kernel size or one larger than 25.
  void validate() const;
};

// Applies the per-pixel translation to one RGB patch.
//   rgb    [3, h, w] in [0, 1]
//   params [12, h, w] constrained (sigma within cfg.sigma_bounds)
//   noise  [3, h, w] noise field slice
// Pipeline: rgb -> hsv, a = w * hsv + b (hue wrapped, S/V clamped), hsv ->
// rgb, per-channel spatially-varying Gaussian blur, + n * noise, clamp.
// ContractError when a sigma lies outside the bounds.
Tensor translate_patch(const Tensor& rgb, const Tensor& params,
                       const Tensor& noise, const TransformConfig& cfg = {});

struct PatchGrads {
  Tensor params;  // [12, h, w]
  Tensor input;   // [3, h, w], empty unless requested
};

// Gradient of sum(grad_out * translate_patch(...)) with respect to the
// constrained parameters and, optionally, the input patch. The forward pass
// is recomputed in float64.
PatchGrads translate_patch_backward(const Tensor& rgb, const Tensor& params,
                                    const Tensor& noise,
                                    const Tensor& grad_out,
                                    const TransformConfig& cfg = {},
                                    bool want_input = false);

// ConfigError naming the expected sizes when the image, low-resolution map or
// noise field disagree with the geometry.
void check_translate_geometry(const Tensor& rgb, const Tensor& lowres,
                              const Tensor& noise, const Geometry& geometry);

// Whole-image translation over the patch grid: each grid cell of the low-res
// map is upsampled to the high-res patch size and applied to that patch.
Tensor translate_image(const Tensor& rgb, const ParamMap& lowres,
                       const NoiseField& noise, const Geometry& geometry,
                       const TransformConfig& cfg = {});

// Row-major hi_h x hi_w selection of output pixels; nonzero = evaluate.
using PixelMask = std::vector<std::uint8_t>;

// Only masked pixels are evaluated; the rest of the output is 0. Masked
// values are bit-identical to the unmasked translation.
Tensor translate_image(const Tensor& rgb, const ParamMap& lowres,
                       const NoiseField& noise, const Geometry& geometry,
                       const TransformConfig& cfg, const PixelMask& mask);

// Recorded form. `lowres` holds constrained parameters [12, lo_h, lo_w].
// With a mask, unmasked outputs are 0 and must not receive gradient.
Var translate_image(Var rgb, Var lowres, const NoiseField& noise,
                    const Geometry& geometry, const TransformConfig& cfg = {},
                    std::shared_ptr<const PixelMask> mask = nullptr);

}  // namespace kpn
