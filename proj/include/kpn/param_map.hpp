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
#include <filesystem>
#include <vector>

#include "kpn/gaussian.hpp"
#include "kpn/tape.hpp"
#include "kpn/tensor.hpp"

namespace kpn {

inline constexpr std::size_t kParamChannels = 12;

// Fixed channel layout of a parameter map.
enum ParamChannel : std::size_t {
  kWeightH = 0,
  kWeightS = 1,
  kWeightV = 2,
  kBiasH = 3,
  kBiasS = 4,
  kBiasV = 5,
  kSigmaR = 6,
  kSigmaG = 7,
  kSigmaB = 8,
  kNoiseR = 9,
  kNoiseG = 10,
  kNoiseB = 11,
};

inline constexpr std::size_t kWeightBegin = 0;
inline constexpr std::size_t kBiasBegin = 3;
inline constexpr std::size_t kSigmaBegin = 6;
inline constexpr std::size_t kNoiseBegin = 9;

const char* param_channel_name(std::size_t channel);

// High-resolution image size, low-resolution feature size, and the grid that
// splits both into corresponding patches.
struct Geometry {
  std::size_t hi_h = 720;
  std::size_t hi_w = 1280;
  std::size_t lo_h = 96;
  std::size_t lo_w = 160;
  std::size_t grid = 8;

  std::size_t patch_h() const { return hi_h / grid; }
  std::size_t patch_w() const { return hi_w / grid; }
  std::size_t lo_patch_h() const { return lo_h / grid; }
  std::size_t lo_patch_w() const { return lo_w / grid; }
  std::size_t patch_count() const { return grid * grid; }

  // ConfigError unless every dimension is a positive multiple of `grid`.
  void validate() const;

  static Geometry full() { return {}; }
  // 240 x 416 images with 32 x 56 features (30 x 52 and 4 x 7 patches).
  static Geometry desk() { return {240, 416, 32, 56, 8}; }

  bool operator==(const Geometry&) const = default;
};

// Network-space parameters, [12, H, W], no range constraints.
class RawParamMap {
 public:
  explicit RawParamMap(Tensor data);
  const Tensor& tensor() const { return data_; }
  Tensor& tensor() { return data_; }
  std::size_t height() const { return data_.dim(1); }
  std::size_t width() const { return data_.dim(2); }

 private:
  Tensor data_;
};

// Constrained parameters: sigma channels inside the bounds, all finite.
class ParamMap {
 public:
  ParamMap(Tensor data, SigmaBounds bounds = {});
  const Tensor& tensor() const { return data_; }
  const SigmaBounds& bounds() const { return bounds_; }
  std::size_t height() const { return data_.dim(1); }
  std::size_t width() const { return data_.dim(2); }

 private:
  Tensor data_;
  SigmaBounds bounds_;
};

// sigma = clamp(exp(raw_sigma), min, max); other channels pass through.
ParamMap constrain(const RawParamMap& raw, SigmaBounds bounds = {});
Var constrain(Var raw, SigmaBounds bounds = {});

// Raw map whose constrained form is w = 1, b = 0, n = 0, sigma = bounds.min.
RawParamMap identity_raw(std::size_t height, std::size_t width,
                         SigmaBounds bounds = {});

// The 12 raw values of identity_raw at one pixel.
std::vector<Real> identity_raw_vector(SigmaBounds bounds = {});

struct ParamPatchGrid {
  std::size_t grid = 0;
  // Row-major over the grid: index = gy * grid + gx.
  std::vector<Tensor> lowres;
  std::vector<Tensor> highres;
};

// Splits a low-resolution map into grid x grid patches and bilinearly
// upsamples each one (independently) to the high-resolution patch size.
ParamPatchGrid tile_and_upsample(const ParamMap& lowres,
                                 const Geometry& geometry);

// Upsampled parameters of one grid cell.
Tensor upsample_patch(const Tensor& lowres, const Geometry& geometry,
                      std::size_t gy, std::size_t gx);

enum class ParamSpace : std::uint8_t { kRaw = 0, kConstrained = 1 };

struct StoredParams {
  Tensor data;  // [12, H, W]
  ParamSpace space = ParamSpace::kRaw;
};

// Little-endian "KPNP" v1 file: u32 version, H, W, C = 12, u8 space, then
// H * W * C float32 values, row-major with the channel fastest.
void save_params(const std::filesystem::path& path, const Tensor& data,
                 ParamSpace space);
void save_params(const std::filesystem::path& path, const ParamMap& map);
StoredParams load_params(const std::filesystem::path& path);

}  // namespace kpn
