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
#include <span>

#include "kpn/tape.hpp"
#include "kpn/tensor.hpp"

namespace kpn {

// ---------------------------------------------------------------------------
// Raw kernels (no recording). Shapes are [C, H, W]; conv weights are
// [C_out, C_in, kH, kW].

std::size_t conv_out_size(std::size_t in, std::size_t kernel,
                          std::size_t stride, std::size_t pad);

Tensor conv2d_forward(const Tensor& input, const Tensor& weight,
                      const Tensor& bias, std::size_t stride, std::size_t pad);

struct Conv2dGrads {
  Tensor input;
  Tensor weight;
  Tensor bias;
};

// Gradients of conv2d_forward. Flags skip work for inputs that need none.
Conv2dGrads conv2d_backward(const Tensor& grad_out, const Tensor& input,
                            const Tensor& weight, std::size_t stride,
                            std::size_t pad, bool want_input = true,
                            bool want_params = true);

// Half-pixel-center bilinear resampling:
//   src = (dst + 0.5) * in / out - 0.5, clamped to [0, in - 1].
Tensor resize_bilinear(const Tensor& input, std::size_t out_h,
                       std::size_t out_w);
Tensor resize_bilinear_backward(const Tensor& grad_out, std::size_t in_h,
                                std::size_t in_w);

// Nearest-neighbour downsampling of a label map (row-major H x W), using the
// same half-pixel-center convention.
std::vector<std::uint8_t> resize_labels_nearest(
    std::span<const std::uint8_t> labels, std::size_t in_h, std::size_t in_w,
    std::size_t out_h, std::size_t out_w);

// Per-pixel softmax over the channel axis of a [C, H, W] tensor.
Tensor softmax_channels(const Tensor& logits);

// ---------------------------------------------------------------------------
// Recorded operations.

Var conv2d(Var input, Var weight, Var bias, std::size_t stride,
           std::size_t pad);
Var leaky_relu(Var x, Real slope);
Var bilinear_resize(Var x, std::size_t out_h, std::size_t out_w);
Var crop(Var x, std::size_t y0, std::size_t x0, std::size_t h, std::size_t w);

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, Real s);
Var exp(Var x);
Var log(Var x);  // DomainError on non-positive input
Var clamp(Var x, Real lo, Real hi);
Var sigmoid(Var x);
Var softplus(Var x);

Var mean(Var x);
Var mse_mean(Var a, Var b);

// Mean per-pixel cross-entropy of [C, H, W] logits against class labels.
Var cross_entropy(Var logits, std::span<const std::uint8_t> labels);

}  // namespace kpn
