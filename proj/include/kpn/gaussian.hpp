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
#include <vector>

#include "kpn/common.hpp"

namespace kpn {

inline constexpr std::size_t kDefaultKernelSize = 25;

struct SigmaBounds {
  double min = 0.05;
  double max = 8.0;
};

// Square blur kernel, normalized to sum 1. Indexed by offsets in
// [-radius, radius] along each axis.
class BlurKernel {
 public:
  BlurKernel(double sigma, std::size_t size, std::vector<double> weights);

  double sigma() const { return sigma_; }
  std::size_t size() const { return size_; }
  int radius() const { return static_cast<int>(size_ / 2); }
  double at(int dy, int dx) const {
    return weights_[(dy + radius()) * size_ + (dx + radius())];
  }
  const std::vector<double>& weights() const { return weights_; }

 private:
  double sigma_;
  std::size_t size_;
  std::vector<double> weights_;
};

// Unnormalized 2D Gaussian density 1 / (2 pi s^2) * exp(-(x^2 + y^2) / 2 s^2).
double gaussian_density(double sigma, double x, double y);

// Density sampled on the integer grid of a size x size window, divided by its
// sum. DomainError for sigma <= 0; ConfigError for even sizes.
BlurKernel gaussian_kernel(double sigma,
                           std::size_t size = kDefaultKernelSize);

// d(normalized kernel)/d(sigma), row-major size x size. Returns zeros when
// sigma sits on or beyond either bound (the clamp is saturated there).
std::vector<double> gaussian_kernel_sigma_grad(
    double sigma, SigmaBounds bounds = {},
    std::size_t size = kDefaultKernelSize);

// One-sided separable profile of the normalized kernel: the 2D kernel equals
// h(|dy|) * h(|dx|) with h summing to 1 over [-radius, radius].
//
// With `truncate` set, taps whose unnormalized weight falls below 2^-70 of the
// center are dropped (set to zero) and `radius` shrinks accordingly; every
// retained weight is unchanged in double precision.
template <typename T>
struct GaussianProfile {
  T h[13] = {};
  int radius = 0;
  // Second moment sum_d h(d) d^2 over the full line.
  double m2 = 0;
};

template <typename T>
GaussianProfile<T> gaussian_profile(double sigma, int max_radius,
                                    bool truncate);

// Radius beyond which the unnormalized profile is below 2^-70.
int negligible_radius(double sigma, int max_radius);

}  // namespace kpn
