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

namespace kpn::simd {

// Largest blur support radius: a 25 x 25 window.
inline constexpr std::size_t kMaxRadius = 12;

// One image plane plus its per-pixel separable Gaussian profiles.
//
// `src` points at pixel (0, 0) of a plane padded by kMaxRadius on every side;
// rows are `src_stride` elements apart. `profile` holds kMaxRadius + 1 dense
// planes of height x width: profile[d * height * width + y * width + x] is the
// one-sided weight h(d) of pixel (y, x), with h(d) == 0 beyond `radius[y, x]`.
// The 2D kernel of a pixel is k(dy, dx) = h(|dy|) * h(|dx|).
//
// When `active` is set, only pixels with a nonzero entry are evaluated: the
// forward and moment kernels write 0 elsewhere and the scatter skips them.
template <typename T>
struct BlurPlane {
  const T* src = nullptr;
  std::size_t src_stride = 0;
  const T* profile = nullptr;
  const std::uint8_t* radius = nullptr;
  std::size_t height = 0;
  std::size_t width = 0;
  const std::uint8_t* active = nullptr;

  bool is_active(std::size_t p) const { return !active || active[p]; }
  bool any_active(std::size_t p, std::size_t count) const {
    if (!active) return true;
    for (std::size_t i = 0; i < count; ++i)
      if (active[p + i]) return true;
    return false;
  }
};

// out[y, x] = sum_{dy,dx} k(dy, dx) * src[y + dy, x + dx]   (dense h x w)
template <typename T>
void svblur_forward(const BlurPlane<T>& plane, T* out);

// out[y, x] = sum_{dy,dx} k(dy, dx) * (dx^2 + dy^2) * src[y + dy, x + dx]
void svblur_moment(const BlurPlane<double>& plane, double* out);

// grad_src[y + dy, x + dx] += grad[y, x] * k(dy, dx) for every pixel, in a
// buffer with the same padding and stride as plane.src.
void svblur_scatter(const BlurPlane<double>& plane, const double* grad,
                    double* grad_src);

namespace scalar {
template <typename T>
void svblur_forward(const BlurPlane<T>& plane, T* out);
void svblur_moment(const BlurPlane<double>& plane, double* out);
void svblur_scatter(const BlurPlane<double>& plane, const double* grad,
                    double* grad_src);
}  // namespace scalar

namespace avx2 {
template <typename T>
void svblur_forward(const BlurPlane<T>& plane, T* out);
void svblur_moment(const BlurPlane<double>& plane, double* out);
void svblur_scatter(const BlurPlane<double>& plane, const double* grad,
                    double* grad_src);
}  // namespace avx2

}  // namespace kpn::simd
