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

#include "kpn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace kpn {

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

Tensor::Tensor(Shape shape, Real fill)
    : shape_(std::move(shape)), data_(shape_numel(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<Real> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (shape_numel(shape_) != data_.size()) {
    throw DimensionError("tensor shape " + shape_string(shape_) + " holds " +
                         std::to_string(shape_numel(shape_)) +
                         " elements but buffer has " +
                         std::to_string(data_.size()));
  }
}

Real Tensor::item() const {
  if (data_.size() != 1) {
    throw ContractError("item() on non-scalar tensor " + shape_string(shape_));
  }
  return data_[0];
}

void Tensor::fill(Real value) { std::fill(data_.begin(), data_.end(), value); }

Tensor Tensor::reshaped(Shape shape) const {
  if (shape_numel(shape) != data_.size()) {
    throw DimensionError("cannot reshape " + shape_string(shape_) + " to " +
                         shape_string(shape));
  }
  return Tensor(std::move(shape), data_);
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(what) + ": shape mismatch " +
                         shape_string(a.shape()) + " vs " +
                         shape_string(b.shape()));
  }
}

void require_rank(const Tensor& t, std::size_t rank, const char* what) {
  if (t.rank() != rank) {
    throw DimensionError(std::string(what) + ": expected rank " +
                         std::to_string(rank) + ", got " +
                         shape_string(t.shape()));
  }
}

Real max_abs_diff(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "max_abs_diff");
  Real m = 0;
  for (std::size_t i = 0; i < a.numel(); ++i) {
    m = std::max(m, std::abs(a[i] - b[i]));
  }
  return m;
}

Tensor crop_chw(const Tensor& src, std::size_t y0, std::size_t x0,
                std::size_t h, std::size_t w) {
  require_rank(src, 3, "crop");
  const std::size_t C = src.dim(0), H = src.dim(1), W = src.dim(2);
  if (y0 + h > H || x0 + w > W) {
    throw DimensionError("crop window exceeds " + shape_string(src.shape()));
  }
  Tensor out({C, h, w});
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t y = 0; y < h; ++y) {
      const Real* row = src.ptr() + (c * H + y0 + y) * W + x0;
      std::copy(row, row + w, out.ptr() + (c * h + y) * w);
    }
  }
  return out;
}

void paste_chw(const Tensor& patch, std::size_t y0, std::size_t x0,
               Tensor& dst) {
  require_rank(patch, 3, "paste");
  require_rank(dst, 3, "paste");
  const std::size_t C = patch.dim(0), h = patch.dim(1), w = patch.dim(2);
  const std::size_t H = dst.dim(1), W = dst.dim(2);
  if (C != dst.dim(0) || y0 + h > H || x0 + w > W) {
    throw DimensionError("paste of " + shape_string(patch.shape()) +
                         " does not fit " + shape_string(dst.shape()));
  }
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t y = 0; y < h; ++y) {
      const Real* row = patch.ptr() + (c * h + y) * w;
      std::copy(row, row + w, dst.ptr() + (c * H + y0 + y) * W + x0);
    }
  }
}

Tensor flip_horizontal(const Tensor& chw) {
  require_rank(chw, 3, "flip_horizontal");
  Tensor out(chw.shape());
  const std::size_t C = chw.dim(0), H = chw.dim(1), W = chw.dim(2);
  for (std::size_t c = 0; c < C; ++c)
    for (std::size_t y = 0; y < H; ++y)
      for (std::size_t x = 0; x < W; ++x)
        out.at(c, y, x) = chw.at(c, y, W - 1 - x);
  return out;
}

}  // namespace kpn
