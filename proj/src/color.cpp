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

#include "kpn/color.hpp"

namespace kpn {

Pixel<double> rgb_to_hsv(const Pixel<double>& rgb, Jacobian3& jac) {
  for (auto& row : jac) row.fill(0.0);
  const int imax = color_detail::argmax3(rgb);
  const int imin = color_detail::argmin3(rgb, imax);
  const double mx = rgb[imax];
  const double delta = mx - rgb[imin];
  const Pixel<double> hsv = rgb_to_hsv(rgb);

  // d(delta)/d(channel)
  double ddelta[3] = {0, 0, 0};
  ddelta[imax] += 1.0;
  ddelta[imin] -= 1.0;

  jac[2][imax] = 1.0;
  if (mx > 0.0) {
    for (int c = 0; c < 3; ++c) {
      const double dmx = c == imax ? 1.0 : 0.0;
      jac[1][c] = (ddelta[c] * mx - delta * dmx) / (mx * mx);
    }
  }
  if (delta > 0.0) {
    static constexpr int kA[3] = {1, 2, 0};
    static constexpr int kB[3] = {2, 0, 1};
    const int a = kA[imax], b = kB[imax];
    const double num = rgb[a] - rgb[b];
    for (int c = 0; c < 3; ++c) {
      const double dnum = (c == a ? 1.0 : 0.0) - (c == b ? 1.0 : 0.0);
      jac[0][c] = (dnum * delta - num * ddelta[c]) / (delta * delta) / 6.0;
    }
  }
  return hsv;
}

Pixel<double> hsv_to_rgb(const Pixel<double>& hsv, Jacobian3& jac) {
  const double s = hsv[1], v = hsv[2];
  const double h6 = hsv[0] * 6.0;
  const double sector = std::floor(h6);
  const double f = h6 - sector;
  int i = static_cast<int>(sector) % 6;
  if (i < 0) i += 6;

  // Values and (d/dh, d/ds, d/dv) of the four hexcone terms.
  struct Term {
    double value, dh, ds, dv;
  };
  const Term tv{v, 0.0, 0.0, 1.0};
  const Term tp{v * (1.0 - s), 0.0, -v, 1.0 - s};
  const Term tq{v * (1.0 - s * f), -v * s * 6.0, -v * f, 1.0 - s * f};
  const Term tt{v * (1.0 - s * (1.0 - f)), v * s * 6.0, -v * (1.0 - f),
                1.0 - s * (1.0 - f)};
  const Term* order[3];
  switch (i) {
    case 0:
      order[0] = &tv, order[1] = &tt, order[2] = &tp;
      break;
    case 1:
      order[0] = &tq, order[1] = &tv, order[2] = &tp;
      break;
    case 2:
      order[0] = &tp, order[1] = &tv, order[2] = &tt;
      break;
    case 3:
      order[0] = &tp, order[1] = &tq, order[2] = &tv;
      break;
    case 4:
      order[0] = &tt, order[1] = &tp, order[2] = &tv;
      break;
    default:
      order[0] = &tv, order[1] = &tp, order[2] = &tq;
      break;
  }
  Pixel<double> rgb{};
  for (int c = 0; c < 3; ++c) {
    rgb[c] = order[c]->value;
    jac[c] = {order[c]->dh, order[c]->ds, order[c]->dv};
  }
  return rgb;
}

Pixel<double> rgb_to_hsv_backward(const Pixel<double>& rgb,
                                  const Pixel<double>& grad_hsv) {
  Jacobian3 jac;
  rgb_to_hsv(rgb, jac);
  Pixel<double> g{0, 0, 0};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) g[j] += jac[i][j] * grad_hsv[i];
  return g;
}

Pixel<double> hsv_to_rgb_backward(const Pixel<double>& hsv,
                                  const Pixel<double>& grad_rgb) {
  Jacobian3 jac;
  hsv_to_rgb(hsv, jac);
  Pixel<double> g{0, 0, 0};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) g[j] += jac[i][j] * grad_rgb[i];
  return g;
}

namespace {

template <typename F>
Tensor convert_image(const Tensor& in, F&& fn) {
  require_rank(in, 3, "color conversion");
  if (in.dim(0) != 3) {
    throw DimensionError("color conversion expects 3 channels, got " +
                         shape_string(in.shape()));
  }
  const std::size_t n = in.dim(1) * in.dim(2);
  Tensor out(in.shape());
  for (std::size_t p = 0; p < n; ++p) {
    const Pixel<Real> px{in[p], in[n + p], in[2 * n + p]};
    const Pixel<Real> r = fn(px);
    out[p] = r[0];
    out[n + p] = r[1];
    out[2 * n + p] = r[2];
  }
  return out;
}

}  // namespace

Tensor rgb_to_hsv(const Tensor& rgb) {
  return convert_image(rgb, [](const Pixel<Real>& p) { return rgb_to_hsv(p); });
}

Tensor hsv_to_rgb(const Tensor& hsv) {
  return convert_image(hsv, [](const Pixel<Real>& p) { return hsv_to_rgb(p); });
}

}  // namespace kpn
