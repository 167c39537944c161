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

#include <cstddef>

#include "kpn/simd/svblur.hpp"

namespace kpn::simd::scalar {
namespace {

template <typename T>
inline void load_profile(const BlurPlane<T>& pl, std::size_t p, int r, T* h) {
  const std::size_t n = pl.height * pl.width;
  for (int d = 0; d <= r; ++d) h[d] = pl.profile[d * n + p];
}

}  // namespace

template <typename T>
void svblur_forward(const BlurPlane<T>& pl, T* out) {
  const std::ptrdiff_t stride = static_cast<std::ptrdiff_t>(pl.src_stride);
  T h[kMaxRadius + 1];
  for (std::size_t y = 0; y < pl.height; ++y) {
    for (std::size_t x = 0; x < pl.width; ++x) {
      const std::size_t p = y * pl.width + x;
      if (!pl.is_active(p)) {
        out[p] = 0;
        continue;
      }
      const int r = pl.radius[p];
      load_profile(pl, p, r, h);
      const T* center = pl.src + static_cast<std::ptrdiff_t>(y) * stride + x;
      T acc = 0;
      for (int dy = -r; dy <= r; ++dy) {
        const T* row = center + dy * stride;
        T s = h[0] * row[0];
        for (int d = 1; d <= r; ++d) s += h[d] * (row[d] + row[-d]);
        acc += h[dy < 0 ? -dy : dy] * s;
      }
      out[p] = acc;
    }
  }
}

template void svblur_forward<float>(const BlurPlane<float>&, float*);
template void svblur_forward<double>(const BlurPlane<double>&, double*);

void svblur_moment(const BlurPlane<double>& pl, double* out) {
  const std::ptrdiff_t stride = static_cast<std::ptrdiff_t>(pl.src_stride);
  double h[kMaxRadius + 1];
  for (std::size_t y = 0; y < pl.height; ++y) {
    for (std::size_t x = 0; x < pl.width; ++x) {
      const std::size_t p = y * pl.width + x;
      if (!pl.is_active(p)) {
        out[p] = 0;
        continue;
      }
      const int r = pl.radius[p];
      load_profile(pl, p, r, h);
      const double* center =
          pl.src + static_cast<std::ptrdiff_t>(y) * stride + x;
      double acc = 0;
      for (int dy = -r; dy <= r; ++dy) {
        const double* row = center + dy * stride;
        double s0 = h[0] * row[0];
        double s2 = 0;
        for (int d = 1; d <= r; ++d) {
          const double pair = row[d] + row[-d];
          s0 += h[d] * pair;
          s2 += h[d] * static_cast<double>(d * d) * pair;
        }
        acc += h[dy < 0 ? -dy : dy] * (s2 + static_cast<double>(dy * dy) * s0);
      }
      out[p] = acc;
    }
  }
}

void svblur_scatter(const BlurPlane<double>& pl, const double* grad,
                    double* grad_src) {
  const std::ptrdiff_t stride = static_cast<std::ptrdiff_t>(pl.src_stride);
  double h[kMaxRadius + 1];
  for (std::size_t y = 0; y < pl.height; ++y) {
    for (std::size_t x = 0; x < pl.width; ++x) {
      const std::size_t p = y * pl.width + x;
      if (!pl.is_active(p)) continue;
      const int r = pl.radius[p];
      load_profile(pl, p, r, h);
      double* center = grad_src + static_cast<std::ptrdiff_t>(y) * stride + x;
      for (int dy = -r; dy <= r; ++dy) {
        const double cy = grad[p] * h[dy < 0 ? -dy : dy];
        double* row = center + dy * stride;
        row[0] += cy * h[0];
        for (int d = 1; d <= r; ++d) {
          const double v = cy * h[d];
          row[d] += v;
          row[-d] += v;
        }
      }
    }
  }
}

}  // namespace kpn::simd::scalar
