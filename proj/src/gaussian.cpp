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

#include "kpn/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace kpn {
namespace {

void check_size(std::size_t size) {
  if (size % 2 == 0 || size == 0) {
    throw ConfigError("kernel size must be odd, got " + std::to_string(size));
  }
}

void check_sigma(double sigma) {
  if (!(sigma > 0) || !std::isfinite(sigma)) {
    throw DomainError("gaussian sigma must be positive and finite, got " +
                      std::to_string(sigma));
  }
}

}  // namespace

BlurKernel::BlurKernel(double sigma, std::size_t size,
                       std::vector<double> weights)
    : sigma_(sigma), size_(size), weights_(std::move(weights)) {}

double gaussian_density(double sigma, double x, double y) {
  check_sigma(sigma);
  const double s2 = sigma * sigma;
  return std::exp(-(x * x + y * y) / (2.0 * s2)) / (2.0 * std::numbers::pi * s2);
}

BlurKernel gaussian_kernel(double sigma, std::size_t size) {
  check_sigma(sigma);
  check_size(size);
  const int r = static_cast<int>(size / 2);
  std::vector<double> w(size * size);
  double sum = 0;
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      const double v = gaussian_density(sigma, dx, dy);
      w[(dy + r) * size + (dx + r)] = v;
      sum += v;
    }
  }
  for (double& v : w) v /= sum;
  return BlurKernel(sigma, size, std::move(w));
}

std::vector<double> gaussian_kernel_sigma_grad(double sigma,
                                               SigmaBounds bounds,
                                               std::size_t size) {
  check_size(size);
  std::vector<double> grad(size * size, 0.0);
  if (sigma <= bounds.min || sigma >= bounds.max) return grad;
  const BlurKernel k = gaussian_kernel(sigma, size);
  const int r = k.radius();
  // d k / d sigma = k (r^2 - sum_j k_j r_j^2) / sigma^3
  double moment = 0;
  for (int dy = -r; dy <= r; ++dy)
    for (int dx = -r; dx <= r; ++dx) moment += k.at(dy, dx) * (dx * dx + dy * dy);
  const double s3 = sigma * sigma * sigma;
  for (int dy = -r; dy <= r; ++dy)
    for (int dx = -r; dx <= r; ++dx)
      grad[(dy + r) * size + (dx + r)] =
          k.at(dy, dx) * (dx * dx + dy * dy - moment) / s3;
  return grad;
}

int negligible_radius(double sigma, int max_radius) {
  // exp(-d^2 / 2 s^2) < 2^-70  <=>  d > s * sqrt(140 ln 2)
  const double cutoff = sigma * std::sqrt(140.0 * std::numbers::ln2);
  if (!(cutoff < max_radius)) return max_radius;
  return std::min(max_radius, static_cast<int>(std::floor(cutoff)));
}

template <typename T>
GaussianProfile<T> gaussian_profile(double sigma, int max_radius,
                                    bool truncate) {
  check_sigma(sigma);
  GaussianProfile<T> prof;
  const int r = truncate ? negligible_radius(sigma, max_radius) : max_radius;
  prof.radius = r;
  const double inv = 1.0 / (2.0 * sigma * sigma);
  double e[13];
  double sum = 1.0;
  e[0] = 1.0;
  for (int d = 1; d <= r; ++d) {
    e[d] = std::exp(-static_cast<double>(d * d) * inv);
    sum += 2.0 * e[d];
  }
  double m2 = 0;
  for (int d = 0; d <= r; ++d) {
    const double h = e[d] / sum;
    prof.h[d] = static_cast<T>(h);
    m2 += (d == 0 ? 1.0 : 2.0) * h * d * d;
  }
  prof.m2 = m2;
  return prof;
}

template GaussianProfile<float> gaussian_profile<float>(double, int, bool);
template GaussianProfile<double> gaussian_profile<double>(double, int, bool);

}  // namespace kpn
