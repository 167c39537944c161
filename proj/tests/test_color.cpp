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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "kpn/color.hpp"
#include "test_util.hpp"

namespace kpn {
namespace {

using P = Pixel<double>;

// Independent hexcone reference: hue from atan-free sector arithmetic written
// in degrees, then scaled.
P reference_rgb_to_hsv(const P& c) {
  const double mx = std::max({c[0], c[1], c[2]});
  const double mn = std::min({c[0], c[1], c[2]});
  const double d = mx - mn;
  double deg = 0;
  if (d > 0) {
    if (mx == c[0]) deg = 60.0 * std::fmod((c[1] - c[2]) / d + 6.0, 6.0);
    else if (mx == c[1]) deg = 60.0 * ((c[2] - c[0]) / d + 2.0);
    else deg = 60.0 * ((c[0] - c[1]) / d + 4.0);
  }
  return {deg / 360.0, mx > 0 ? d / mx : 0.0, mx};
}

P random_distinct(std::mt19937& gen, double gap) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (;;) {
    const P c{u(gen), u(gen), u(gen)};
    if (std::abs(c[0] - c[1]) >= gap && std::abs(c[1] - c[2]) >= gap &&
        std::abs(c[0] - c[2]) >= gap)
      return c;
  }
}

void expect_pixel_near(const P& a, const P& b, double tol) {
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(a[i], b[i], tol) << "channel " << i;
}

TEST(Color, PrimaryExamples) {
  expect_pixel_near(rgb_to_hsv(P{1, 0, 0}), P{0, 1, 1}, 0);
  expect_pixel_near(rgb_to_hsv(P{0.5, 0.5, 0.5}), P{0, 0, 0.5}, 0);
  expect_pixel_near(rgb_to_hsv(P{0, 1, 1}), P{0.5, 1, 1}, 1e-15);
  expect_pixel_near(rgb_to_hsv(P{0, 0, 0}), P{0, 0, 0}, 0);
  expect_pixel_near(hsv_to_rgb(P{0, 1, 1}), P{1, 0, 0}, 0);
  for (double h : {0.0, 0.1, 0.37, 0.99}) expect_pixel_near(hsv_to_rgb(P{h, 0, 0.4}), P{0.4, 0.4, 0.4}, 0);
}

TEST(Color, MatchesReferenceConversion) {
  std::mt19937 gen(1);
  for (int i = 0; i < 1000; ++i) {
    const P c = random_distinct(gen, 1e-6);
    expect_pixel_near(rgb_to_hsv(c), reference_rgb_to_hsv(c), 1e-14);
  }
}

TEST(Color, RoundTripIsIdentity) {
  std::mt19937 gen(2);
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    const P c = random_distinct(gen, 1e-6);
    const P back = hsv_to_rgb(rgb_to_hsv(c));
    for (int k = 0; k < 3; ++k) worst = std::max(worst, std::abs(back[k] - c[k]));
  }
  EXPECT_LE(worst, 1e-12);
}

TEST(Color, HueInUnitIntervalAndOutputInRange) {
  std::mt19937 gen(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 5000; ++i) {
    const P c{u(gen), u(gen), u(gen)};
    const P hsv = rgb_to_hsv(c);
    EXPECT_GE(hsv[0], 0.0);
    EXPECT_LT(hsv[0], 1.0);
    const P rgb = hsv_to_rgb(P{u(gen), u(gen), u(gen)});
    for (double v : rgb) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(Color, TensorFormsAgreeWithPixelForms) {
  const Tensor img = testing::random_tensor({3, 4, 5}, 4, 0, 1);
  const Tensor hsv = rgb_to_hsv(img);
  const Tensor back = hsv_to_rgb(hsv);
  for (std::size_t p = 0; p < 20; ++p) {
    const P h = rgb_to_hsv(P{img[p], img[20 + p], img[40 + p]});
    for (int c = 0; c < 3; ++c) EXPECT_EQ(hsv[c * 20 + p], h[c]);
  }
  EXPECT_LE(max_abs_diff(back, img), 1e-12);
}

template <typename F, typename B>
double worst_gradient_error(F forward, B backward, bool hsv_input, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0;
  for (int i = 0; i < 500; ++i) {
    P x;
    if (hsv_input) {
      std::uniform_real_distribution<double> v(0.05, 0.95);
      do x = P{v(gen), v(gen), v(gen)};
      while (std::abs(x[0] * 6 - std::round(x[0] * 6)) < 6e-3);
    } else {
      x = random_distinct(gen, 1e-3);
    }
    const P r{u(gen), u(gen), u(gen)};
    const P g = backward(x, r);
    for (int k = 0; k < 3; ++k) {
      const double h = 1e-7;
      P xp = x, xm = x;
      xp[k] += h;
      xm[k] -= h;
      const P fp = forward(xp), fm = forward(xm);
      double n = 0;
      for (int c = 0; c < 3; ++c) n += r[c] * (fp[c] - fm[c]) / (2 * h);
      if (std::abs(n) + std::abs(g[k]) > 1e-8) worst = std::max(worst, testing::rel_err(g[k], n));
    }
  }
  return worst;
}

TEST(Color, RgbToHsvGradientMatchesFiniteDifferences) {
  const double worst = worst_gradient_error(
      [](const P& x) { return rgb_to_hsv(x); },
      [](const P& x, const P& r) { return rgb_to_hsv_backward(x, r); }, false, 5);
  EXPECT_LE(worst, 1e-4);
}

TEST(Color, HsvToRgbGradientMatchesFiniteDifferences) {
  const double worst = worst_gradient_error(
      [](const P& x) { return hsv_to_rgb(x); },
      [](const P& x, const P& r) { return hsv_to_rgb_backward(x, r); }, true, 6);
  EXPECT_LE(worst, 1e-4);
}

TEST(Color, JacobianFormAgreesWithVectorProduct) {
  std::mt19937 gen(7);
  for (int i = 0; i < 100; ++i) {
    const P x = random_distinct(gen, 1e-3);
    Jacobian3 j;
    const P y = rgb_to_hsv(x, j);
    expect_pixel_near(y, rgb_to_hsv(x), 0);
    const P r{0.3, -0.7, 1.1};
    const P g = rgb_to_hsv_backward(x, r);
    for (int k = 0; k < 3; ++k) {
      double s = 0;
      for (int c = 0; c < 3; ++c) s += r[c] * j[c][k];
      EXPECT_NEAR(g[k], s, 1e-12 * (1 + std::abs(s)));
    }
  }
}

}  // namespace
}  // namespace kpn
