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

#include "kpn/param_map.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "kpn/binary_io.hpp"
#include "kpn/ops.hpp"

namespace kpn {
namespace {

constexpr char kParamMagic[4] = {'K', 'P', 'N', 'P'};
constexpr std::uint32_t kParamVersion = 1;

void check_param_tensor(const Tensor& t, const char* what) {
  if (t.rank() != 3 || t.dim(0) != kParamChannels) {
    throw DimensionError(std::string(what) + " must be [12, H, W], got " +
                         shape_string(t.shape()));
  }
}

}  // namespace

const char* param_channel_name(std::size_t channel) {
  static const char* const kNames[kParamChannels] = {
      "weight_h", "weight_s", "weight_v", "bias_h",  "bias_s",  "bias_v",
      "sigma_r",  "sigma_g",  "sigma_b",  "noise_r", "noise_g", "noise_b"};
  return channel < kParamChannels ? kNames[channel] : "?";
}

void Geometry::validate() const {
  auto check = [this](std::size_t v, const char* name) {
    if (v == 0 || grid == 0 || v % grid != 0) {
      throw ConfigError(std::string("geometry: ") + name + " = " +
                        std::to_string(v) + " is not a positive multiple of " +
                        std::to_string(grid));
    }
  };
  check(hi_h, "high-res height");
  check(hi_w, "high-res width");
  check(lo_h, "low-res height");
  check(lo_w, "low-res width");
}

RawParamMap::RawParamMap(Tensor data) : data_(std::move(data)) {
  check_param_tensor(data_, "raw parameter map");
}

ParamMap::ParamMap(Tensor data, SigmaBounds bounds)
    : data_(std::move(data)), bounds_(bounds) {
  check_param_tensor(data_, "parameter map");
  if (!(bounds_.min > 0) || !(bounds_.max > bounds_.min)) {
    throw ConfigError("sigma bounds must satisfy 0 < min < max");
  }
  const std::size_t n = height() * width();
  for (std::size_t i = 0; i < data_.numel(); ++i) {
    if (!std::isfinite(data_[i])) {
      throw DomainError(std::string("parameter map: non-finite ") +
                        param_channel_name(i / n));
    }
  }
  for (std::size_t c = kSigmaBegin; c < kSigmaBegin + 3; ++c) {
    for (std::size_t p = 0; p < n; ++p) {
      const double s = data_[c * n + p];
      if (s < bounds_.min || s > bounds_.max) {
        throw ContractError(std::string("parameter map: ") +
                            param_channel_name(c) + " = " + std::to_string(s) +
                            " outside sigma bounds");
      }
    }
  }
}

ParamMap constrain(const RawParamMap& raw, SigmaBounds bounds) {
  const Tensor& r = raw.tensor();
  const std::size_t n = raw.height() * raw.width();
  Tensor out(r.shape());
  for (std::size_t i = 0; i < r.numel(); ++i) {
    if (!std::isfinite(r[i])) {
      throw DomainError(std::string("raw parameter map: non-finite ") +
                        param_channel_name(i / n) + " at pixel " +
                        std::to_string(i % n));
    }
    const std::size_t c = i / n;
    if (c >= kSigmaBegin && c < kSigmaBegin + 3) {
      out[i] = static_cast<Real>(
          std::clamp(std::exp(static_cast<double>(r[i])), bounds.min, bounds.max));
    } else {
      out[i] = r[i];
    }
  }
  return ParamMap(std::move(out), bounds);
}

Var constrain(Var raw, SigmaBounds bounds) {
  const ParamMap map = constrain(RawParamMap(raw.value()), bounds);
  return raw.tape->record(
      map.tensor(), {raw}, [raw, bounds](Tape& t, const Tensor& g) {
        const Tensor& r = t.value(raw);
        Tensor& gr = t.grad_buffer(raw);
        const std::size_t n = r.dim(1) * r.dim(2);
        for (std::size_t i = 0; i < r.numel(); ++i) {
          const std::size_t c = i / n;
          if (c >= kSigmaBegin && c < kSigmaBegin + 3) {
            const double e = std::exp(static_cast<double>(r[i]));
            // Zero gradient where the clamp is saturated.
            if (e > bounds.min && e < bounds.max) gr[i] += g[i] * static_cast<Real>(e);
          } else {
            gr[i] += g[i];
          }
        }
      });
}

std::vector<Real> identity_raw_vector(SigmaBounds bounds) {
  const Real ls = static_cast<Real>(std::log(bounds.min));
  return {1, 1, 1, 0, 0, 0, ls, ls, ls, 0, 0, 0};
}

RawParamMap identity_raw(std::size_t height, std::size_t width,
                         SigmaBounds bounds) {
  const auto v = identity_raw_vector(bounds);
  Tensor t({kParamChannels, height, width});
  const std::size_t n = height * width;
  for (std::size_t c = 0; c < kParamChannels; ++c)
    std::fill(t.ptr() + c * n, t.ptr() + (c + 1) * n, v[c]);
  return RawParamMap(std::move(t));
}

Tensor upsample_patch(const Tensor& lowres, const Geometry& geometry,
                      std::size_t gy, std::size_t gx) {
  const std::size_t lh = geometry.lo_patch_h(), lw = geometry.lo_patch_w();
  const Tensor patch = crop_chw(lowres, gy * lh, gx * lw, lh, lw);
  return resize_bilinear(patch, geometry.patch_h(), geometry.patch_w());
}

ParamPatchGrid tile_and_upsample(const ParamMap& lowres,
                                 const Geometry& geometry) {
  geometry.validate();
  if (lowres.height() != geometry.lo_h || lowres.width() != geometry.lo_w) {
    throw ConfigError("parameter map is " + std::to_string(lowres.height()) +
                      "x" + std::to_string(lowres.width()) + ", expected " +
                      std::to_string(geometry.lo_h) + "x" +
                      std::to_string(geometry.lo_w));
  }
  ParamPatchGrid grid;
  grid.grid = geometry.grid;
  const std::size_t lh = geometry.lo_patch_h(), lw = geometry.lo_patch_w();
  for (std::size_t gy = 0; gy < geometry.grid; ++gy) {
    for (std::size_t gx = 0; gx < geometry.grid; ++gx) {
      Tensor low = crop_chw(lowres.tensor(), gy * lh, gx * lw, lh, lw);
      grid.highres.push_back(
          resize_bilinear(low, geometry.patch_h(), geometry.patch_w()));
      grid.lowres.push_back(std::move(low));
    }
  }
  return grid;
}

void save_params(const std::filesystem::path& path, const Tensor& data,
                 ParamSpace space) {
  check_param_tensor(data, "parameter map");
  const std::size_t H = data.dim(1), W = data.dim(2), n = H * W;
  ByteWriter w;
  w.bytes(kParamMagic, 4);
  w.u32(kParamVersion);
  w.u32(static_cast<std::uint32_t>(H));
  w.u32(static_cast<std::uint32_t>(W));
  w.u32(static_cast<std::uint32_t>(kParamChannels));
  w.u8(static_cast<std::uint8_t>(space));
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t c = 0; c < kParamChannels; ++c)
      w.f32(static_cast<float>(data[c * n + p]));
  write_file(path, w.buffer());
}

void save_params(const std::filesystem::path& path, const ParamMap& map) {
  save_params(path, map.tensor(), ParamSpace::kConstrained);
}

StoredParams load_params(const std::filesystem::path& path) {
  ByteReader r(read_file(path));
  char magic[4];
  r.bytes(magic, 4, "magic");
  if (std::memcmp(magic, kParamMagic, 4) != 0) {
    throw FormatError("parameter file " + path.string() + ": bad magic");
  }
  const std::uint32_t version = r.u32("version");
  if (version != kParamVersion) {
    throw FormatError("parameter file " + path.string() +
                      ": unsupported version " + std::to_string(version));
  }
  const std::uint32_t H = r.u32("height");
  const std::uint32_t W = r.u32("width");
  const std::uint32_t C = r.u32("channel count");
  if (C != kParamChannels) {
    throw FormatError("parameter file " + path.string() + ": channel count " +
                      std::to_string(C) + " != 12");
  }
  const std::uint8_t space = r.u8("space flag");
  if (space > 1) {
    throw FormatError("parameter file " + path.string() + ": space flag " +
                      std::to_string(space));
  }
  const std::size_t n = static_cast<std::size_t>(H) * W;
  if (r.remaining() < n * C * 4) {
    throw FormatError("parameter file " + path.string() +
                      ": truncated data block");
  }
  StoredParams out{Tensor({kParamChannels, H, W}),
                   static_cast<ParamSpace>(space)};
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t c = 0; c < kParamChannels; ++c)
      out.data[c * n + p] = static_cast<Real>(r.f32("data"));
  return out;
}

}  // namespace kpn
