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

// AVX2/FMA spatially-varying blur. Vectorizes across neighbouring output
// pixels: lane i handles pixel x + i with its own profile, and every tap is a
// contiguous load from the padded source. Lanes whose radius is below the
// group maximum carry zero weights for the extra taps.

#include <immintrin.h>

#include <algorithm>
#include <cstddef>

#include "kpn/simd/svblur.hpp"

namespace kpn::simd::avx2 {
namespace {

template <typename T>
struct Vec;

template <>
struct Vec<double> {
  using type = __m256d;
  static constexpr std::size_t kLanes = 4;
  static type zero() { return _mm256_setzero_pd(); }
  static type set1(double v) { return _mm256_set1_pd(v); }
  static type load(const double* p) { return _mm256_loadu_pd(p); }
  static void store(double* p, type v) { _mm256_storeu_pd(p, v); }
  static type add(type a, type b) { return _mm256_add_pd(a, b); }
  static type mul(type a, type b) { return _mm256_mul_pd(a, b); }
  static type fmadd(type a, type b, type c) { return _mm256_fmadd_pd(a, b, c); }
};

template <>
struct Vec<float> {
  using type = __m256;
  static constexpr std::size_t kLanes = 8;
  static type zero() { return _mm256_setzero_ps(); }
  static type set1(float v) { return _mm256_set1_ps(v); }
  static type load(const float* p) { return _mm256_loadu_ps(p); }
  static void store(float* p, type v) { _mm256_storeu_ps(p, v); }
  static type add(type a, type b) { return _mm256_add_ps(a, b); }
  static type mul(type a, type b) { return _mm256_mul_ps(a, b); }
  static type fmadd(type a, type b, type c) { return _mm256_fmadd_ps(a, b, c); }
};

inline int group_radius(const std::uint8_t* radius, std::size_t lanes) {
  int r = 0;
  for (std::size_t i = 0; i < lanes; ++i) r = std::max<int>(r, radius[i]);
  return r;
}

template <typename T>
void forward_pixel(const BlurPlane<T>& pl, std::size_t y, std::size_t x,
                   T* out) {
  const std::ptrdiff_t stride = static_cast<std::ptrdiff_t>(pl.src_stride);
  const std::size_t n = pl.height * pl.width;
  const std::size_t p = y * pl.width + x;
  if (!pl.is_active(p)) {
    out[p] = 0;
    return;
  }
  const int r = pl.radius[p];
  const T* center = pl.src + static_cast<std::ptrdiff_t>(y) * stride + x;
  T acc = 0;
  for (int dy = -r; dy <= r; ++dy) {
    const T* row = center + dy * stride;
    T s = pl.profile[p] * row[0];
    for (int d = 1; d <= r; ++d) s += pl.profile[d * n + p] * (row[d] + row[-d]);
    acc += pl.profile[(dy < 0 ? -dy : dy) * n + p] * s;
  }
  out[p] = acc;
}

// Inactive lanes of a partially active group are computed, then cleared.
template <typename T>
inline void zero_inactive(const BlurPlane<T>& pl, std::size_t p,
                          std::size_t lanes, T* out) {
  if (!pl.active) return;
  for (std::size_t i = 0; i < lanes; ++i)
    if (!pl.active[p + i]) out[p + i] = 0;
}

}  // namespace


template <typename T>
void svblur_forward(const BlurPlane<T>& pl, T* out) {
  using V = Vec<T>;
  constexpr std::size_t L = V::kLanes;
  const std::ptrdiff_t stride = static_cast<std::ptrdiff_t>(pl.src_stride);
  const std::size_t n = pl.height * pl.width;
  typename V::type h[kMaxRadius + 1];
  for (std::size_t y = 0; y < pl.height; ++y) {
    std::size_t x = 0;
    for (; x + L <= pl.width; x += L) {
      const std::size_t p = y * pl.width + x;
      if (!pl.any_active(p, L)) {
        V::store(out + p, V::zero());
        continue;
      }
      const int r = group_radius(pl.radius + p, L);
      for (int d = 0; d <= r; ++d) h[d] = V::load(pl.profile + d * n + p);
      const T* center = pl.src + static_cast<std::ptrdiff_t>(y) * stride + x;
      auto acc = V::zero();
      for (int dy = -r; dy <= r; ++dy) {
        const T* row = center + dy * stride;
        auto s = V::mul(h[0], V::load(row));
        for (int d = 1; d <= r; ++d) {
          s = V::fmadd(h[d], V::add(V::load(row + d), V::load(row - d)), s);
        }
        acc = V::fmadd(h[dy < 0 ? -dy : dy], s, acc);
      }
      V::store(out + p, acc);
      zero_inactive(pl, p, L, out);
    }
    for (; x < pl.width; ++x) forward_pixel(pl, y, x, out);
  }
}

template void svblur_forward<float>(const BlurPlane<float>&, float*);
template void svblur_forward<double>(const BlurPlane<double>&, double*);

void svblur_moment(const BlurPlane<double>& pl, double* out) {
  using V = Vec<double>;
  constexpr std::size_t L = V::kLanes;
  const std::ptrdiff_t stride = static_cast<std::ptrdiff_t>(pl.src_stride);
  const std::size_t n = pl.height * pl.width;
  V::type h[kMaxRadius + 1];
  V::type h2[kMaxRadius + 1];
  for (std::size_t y = 0; y < pl.height; ++y) {
    std::size_t x = 0;
    for (; x + L <= pl.width; x += L) {
      const std::size_t p = y * pl.width + x;
      if (!pl.any_active(p, L)) {
        V::store(out + p, V::zero());
        continue;
      }
      const int r = group_radius(pl.radius + p, L);
      for (int d = 0; d <= r; ++d) {
        h[d] = V::load(pl.profile + d * n + p);
        h2[d] = V::mul(h[d], V::set1(static_cast<double>(d * d)));
      }
      const double* center =
          pl.src + static_cast<std::ptrdiff_t>(y) * stride + x;
      auto acc = V::zero();
      for (int dy = -r; dy <= r; ++dy) {
        const double* row = center + dy * stride;
        auto s0 = V::mul(h[0], V::load(row));
        auto s2 = V::zero();
        for (int d = 1; d <= r; ++d) {
          const auto pair = V::add(V::load(row + d), V::load(row - d));
          s0 = V::fmadd(h[d], pair, s0);
          s2 = V::fmadd(h2[d], pair, s2);
        }
        const auto t = V::fmadd(V::set1(static_cast<double>(dy * dy)), s0, s2);
        acc = V::fmadd(h[dy < 0 ? -dy : dy], t, acc);
      }
      V::store(out + p, acc);
      zero_inactive(pl, p, L, out);
    }
    for (; x < pl.width; ++x) {
      const std::size_t p = y * pl.width + x;
      if (!pl.is_active(p)) {
        out[p] = 0;
        continue;
      }
      const int r = pl.radius[p];
      const double* center =
          pl.src + static_cast<std::ptrdiff_t>(y) * stride + x;
      double acc = 0;
      for (int dy = -r; dy <= r; ++dy) {
        const double* row = center + dy * stride;
        double s0 = pl.profile[p] * row[0];
        double s2 = 0;
        for (int d = 1; d <= r; ++d) {
          const double pair = row[d] + row[-d];
          const double hd = pl.profile[d * n + p];
          s0 += hd * pair;
          s2 += hd * static_cast<double>(d * d) * pair;
        }
        acc += pl.profile[(dy < 0 ? -dy : dy) * n + p] *
               (s2 + static_cast<double>(dy * dy) * s0);
      }
      out[p] = acc;
    }
  }
}

void svblur_scatter(const BlurPlane<double>& pl, const double* grad,
                    double* grad_src) {
  using V = Vec<double>;
  constexpr std::size_t L = V::kLanes;
  const std::ptrdiff_t stride = static_cast<std::ptrdiff_t>(pl.src_stride);
  const std::size_t n = pl.height * pl.width;
  V::type h[kMaxRadius + 1];
  for (std::size_t y = 0; y < pl.height; ++y) {
    std::size_t x = 0;
    for (; x + L <= pl.width; x += L) {
      const std::size_t p = y * pl.width + x;
      if (!pl.any_active(p, L)) continue;
      const int r = group_radius(pl.radius + p, L);
      for (int d = 0; d <= r; ++d) h[d] = V::load(pl.profile + d * n + p);
      alignas(32) double gl[L];
      for (std::size_t i = 0; i < L; ++i) gl[i] = pl.is_active(p + i) ? grad[p + i] : 0.0;
      const auto g = V::load(gl);
      double* center = grad_src + static_cast<std::ptrdiff_t>(y) * stride + x;
      for (int dy = -r; dy <= r; ++dy) {
        const auto cy = V::mul(g, h[dy < 0 ? -dy : dy]);
        double* row = center + dy * stride;
        V::store(row, V::fmadd(cy, h[0], V::load(row)));
        for (int d = 1; d <= r; ++d) {
          const auto v = V::mul(cy, h[d]);
          V::store(row + d, V::add(V::load(row + d), v));
          V::store(row - d, V::add(V::load(row - d), v));
        }
      }
    }
    for (; x < pl.width; ++x) {
      const std::size_t p = y * pl.width + x;
      if (!pl.is_active(p)) continue;
      const int r = pl.radius[p];
      double* center = grad_src + static_cast<std::ptrdiff_t>(y) * stride + x;
      for (int dy = -r; dy <= r; ++dy) {
        const double cy = grad[p] * pl.profile[(dy < 0 ? -dy : dy) * n + p];
        double* row = center + dy * stride;
        row[0] += cy * pl.profile[p];
        for (int d = 1; d <= r; ++d) {
          const double v = cy * pl.profile[d * n + p];
          row[d] += v;
          row[-d] += v;
        }
      }
    }
  }
}

}  // namespace kpn::simd::avx2
