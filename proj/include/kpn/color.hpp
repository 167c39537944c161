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

#include <array>
#include <cmath>

#include "kpn/tensor.hpp"

namespace kpn {

// Hexcone RGB <-> HSV with hue stored as angle / 360 in [0, 1).
//
// All three channels of both spaces live in [0, 1]. The piecewise branches
// are selected by argmax/argmin with ties broken toward the earlier channel;
// gradients use whichever branch the forward pass took.

template <typename T>
using Pixel = std::array<T, 3>;

// d out_i / d in_j.
using Jacobian3 = std::array<std::array<double, 3>, 3>;

namespace color_detail {

template <typename T>
inline int argmax3(const Pixel<T>& p) {
  if (p[0] >= p[1] && p[0] >= p[2]) return 0;
  return p[1] >= p[2] ? 1 : 2;
}

template <typename T>
inline int argmin3(const Pixel<T>& p, int not_this) {
  int best = not_this == 0 ? 1 : 0;
  for (int c = 0; c < 3; ++c) {
    if (c != not_this && p[c] < p[best]) best = c;
  }
  return best;
}

}  // namespace color_detail

template <typename T>
inline Pixel<T> rgb_to_hsv(const Pixel<T>& rgb) {
  const int imax = color_detail::argmax3(rgb);
  const int imin = color_detail::argmin3(rgb, imax);
  const T mx = rgb[imax];
  const T delta = mx - rgb[imin];
  Pixel<T> hsv{T(0), T(0), mx};
  if (mx > T(0)) hsv[1] = delta / mx;
  if (delta > T(0)) {
    // Sector offset and the ordered pair (a - b) for each max channel.
    static constexpr int kA[3] = {1, 2, 0};
    static constexpr int kB[3] = {2, 0, 1};
    T h6 = (rgb[kA[imax]] - rgb[kB[imax]]) / delta + T(2 * imax);
    if (h6 < T(0)) h6 += T(6);
    T h = h6 / T(6);
    if (h >= T(1)) h -= T(1);
    hsv[0] = h;
  }
  return hsv;
}

template <typename T>
inline Pixel<T> hsv_to_rgb(const Pixel<T>& hsv) {
  const T s = hsv[1], v = hsv[2];
  T h6 = hsv[0] * T(6);
  T sector = std::floor(h6);
  T f = h6 - sector;
  int i = static_cast<int>(sector) % 6;
  if (i < 0) i += 6;
  const T p = v * (T(1) - s);
  const T q = v * (T(1) - s * f);
  const T t = v * (T(1) - s * (T(1) - f));
  switch (i) {
    case 0:
      return {v, t, p};
    case 1:
      return {q, v, p};
    case 2:
      return {p, v, t};
    case 3:
      return {p, q, v};
    case 4:
      return {t, p, v};
    default:
      return {v, p, q};
  }
}

// Forward conversion that also fills the Jacobian.
Pixel<double> rgb_to_hsv(const Pixel<double>& rgb, Jacobian3& jac);
Pixel<double> hsv_to_rgb(const Pixel<double>& hsv, Jacobian3& jac);

// Vector-Jacobian products: gradient w.r.t. the input given the gradient
// w.r.t. the output.
Pixel<double> rgb_to_hsv_backward(const Pixel<double>& rgb,
                                  const Pixel<double>& grad_hsv);
Pixel<double> hsv_to_rgb_backward(const Pixel<double>& hsv,
                                  const Pixel<double>& grad_rgb);

// Whole-image conversions of [3, H, W] tensors.
Tensor rgb_to_hsv(const Tensor& rgb);
Tensor hsv_to_rgb(const Tensor& hsv);

}  // namespace kpn
