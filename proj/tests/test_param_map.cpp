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
#include <fstream>

#include "kpn/binary_io.hpp"
#include "kpn/noise.hpp"
#include "kpn/ops.hpp"
#include "kpn/param_map.hpp"
#include "kpn/tape.hpp"
#include "test_util.hpp"

namespace kpn {
namespace {

using testing::random_tensor;
using testing::TempDir;

TEST(Noise, ClampOfRawSamples) {
  EXPECT_EQ(clamp_noise_sample(-1.5), 0.0);
  EXPECT_EQ(clamp_noise_sample(0.3), Real(0.3));
  EXPECT_EQ(clamp_noise_sample(2.5), 1.0);
}

TEST(Noise, FieldIsClampedAndReproducible) {
  const NoiseField a = generate_noise_field(42, 37, 53);
  const NoiseField b = generate_noise_field(42, 37, 53);
  const NoiseField c = generate_noise_field(43, 37, 53);
  ASSERT_EQ(a.values.shape(), (Shape{3, 37, 53}));
  EXPECT_EQ(a.seed, 42u);
  EXPECT_EQ(std::memcmp(a.values.ptr(), b.values.ptr(), a.values.numel() * sizeof(Real)), 0);
  EXPECT_GT(max_abs_diff(a.values, c.values), 0);
  for (std::size_t i = 0; i < a.values.numel(); ++i) {
    EXPECT_GE(a.values[i], 0);
    EXPECT_LE(a.values[i], 1);
  }
}

TEST(Noise, ElementIndexing) {
  const std::size_t h = 5, w = 7;
  const NoiseField f = generate_noise_field(9, h, w);
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x)
        EXPECT_EQ(f.values.at(c, y, x),
                  clamp_noise_sample(noise_normal_sample(9, (y * w + x) * 3 + c)));
}

TEST(Noise, HalfOfSamplesClampToZero) {
  const NoiseField f = generate_noise_field(7, 1000, 334);
  std::size_t zeros = 0;
  const std::size_t n = 1000000;
  for (std::size_t i = 0; i < n; ++i) zeros += f.values[i] == 0;
  EXPECT_NEAR(static_cast<double>(zeros) / n, 0.5, 0.002);
}

TEST(Noise, SamplesAreStandardNormal) {
  double sum = 0, sq = 0;
  const std::size_t n = 200000;
  for (std::size_t i = 0; i < n; ++i) {
    const double z = noise_normal_sample(11, i);
    sum += z;
    sq += z * z;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(sq / n, 1.0, 0.01);
}

TEST(Constrain, Examples) {
  Tensor raw({12, 1, 1});
  raw[0] = 1;
  raw[3] = 0;
  raw[6] = std::log(0.05);
  raw[7] = 10;
  raw[8] = std::log(1.5);
  raw[9] = -0.25;
  const ParamMap m = constrain(RawParamMap(raw));
  EXPECT_EQ(m.tensor()[0], 1);
  EXPECT_EQ(m.tensor()[3], 0);
  EXPECT_NEAR(m.tensor()[6], 0.05, 1e-17);
  EXPECT_EQ(m.tensor()[7], 8.0);
  EXPECT_NEAR(m.tensor()[8], 1.5, 1e-15);
  EXPECT_EQ(m.tensor()[9], Real(-0.25));
}

TEST(Constrain, RejectsNonFinite) {
  Tensor raw({12, 2, 2});
  raw[5] = std::nan("");
  EXPECT_THROW(constrain(RawParamMap(raw)), DomainError);
  raw[5] = 0;
  raw[7 * 4] = INFINITY;
  EXPECT_THROW(constrain(RawParamMap(raw)), DomainError);
}

TEST(Constrain, ParamMapRejectsOutOfBoundSigma) {
  Tensor t = identity_raw(2, 2).tensor();
  for (std::size_t i = 6 * 4; i < 9 * 4; ++i) t[i] = 0.01;
  EXPECT_THROW(ParamMap{t}, ContractError);
}

TEST(Constrain, IdempotentThroughRawPath) {
  const Tensor raw = random_tensor({12, 4, 5}, 1, -4, 3);
  const ParamMap once = constrain(RawParamMap(raw));
  Tensor back = raw;
  for (std::size_t i = 6 * 20; i < 9 * 20; ++i) back[i] = std::log(once.tensor()[i]);
  const ParamMap twice = constrain(RawParamMap(back));
  for (std::size_t i = 6 * 20; i < 9 * 20; ++i)
    EXPECT_NEAR(twice.tensor()[i], once.tensor()[i], 1e-15 * once.tensor()[i]);
}

TEST(Constrain, RecordedFormGradient) {
  Tape t;
  Tensor raw = identity_raw(1, 3).tensor();
  raw[6 * 3 + 0] = std::log(0.05) - 1;
  raw[6 * 3 + 1] = std::log(2.0);
  raw[6 * 3 + 2] = 5.0;
  Var r = t.leaf(raw, true);
  Var s = constrain(r);
  t.backward(mean(s));
  const Tensor g = t.grad(r);
  const double unit = 1.0 / 36;
  EXPECT_NEAR(g[0], unit, 1e-15);
  EXPECT_EQ(g[6 * 3 + 0], 0);
  EXPECT_NEAR(g[6 * 3 + 1], unit * 2.0, 1e-15);
  EXPECT_EQ(g[6 * 3 + 2], 0);
}

TEST(IdentityRaw, Layout) {
  const RawParamMap r = identity_raw(96, 160);
  ASSERT_EQ(r.tensor().shape(), (Shape{12, 96, 160}));
  const std::size_t n = 96 * 160;
  for (std::size_t p = 0; p < n; p += 997) {
    for (std::size_t c = 0; c < 3; ++c) {
      EXPECT_EQ(r.tensor()[c * n + p], 1);
      EXPECT_EQ(r.tensor()[(3 + c) * n + p], 0);
      EXPECT_EQ(r.tensor()[(6 + c) * n + p], Real(std::log(0.05)));
      EXPECT_EQ(r.tensor()[(9 + c) * n + p], 0);
    }
  }
  const ParamMap m = constrain(r);
  EXPECT_NEAR(m.tensor()[6 * n], 0.05, 1e-17);
}

TEST(ChannelNames, FrozenLayout) {
  EXPECT_STREQ(param_channel_name(2), "weight_v");
  EXPECT_STREQ(param_channel_name(5), "bias_v");
  EXPECT_STREQ(param_channel_name(8), "sigma_b");
  EXPECT_STREQ(param_channel_name(11), "noise_b");
}

TEST(TileAndUpsample, FullGeometry) {
  const ParamMap m = constrain(identity_raw(96, 160));
  const ParamPatchGrid g = tile_and_upsample(m, Geometry::full());
  ASSERT_EQ(g.lowres.size(), 64u);
  ASSERT_EQ(g.highres.size(), 64u);
  EXPECT_EQ(g.lowres[0].shape(), (Shape{12, 12, 20}));
  EXPECT_EQ(g.highres[63].shape(), (Shape{12, 90, 160}));
}

TEST(TileAndUpsample, TilesCoverWithoutOverlap) {
  const Geometry geo{64, 80, 16, 24, 4};
  Tensor t = random_tensor({12, 16, 24}, 2, -1, 1);
  for (std::size_t i = 6 * 384; i < 9 * 384; ++i) t[i] = 1.0;
  const ParamPatchGrid g = tile_and_upsample(ParamMap(t), geo);
  for (std::size_t gy = 0; gy < 4; ++gy)
    for (std::size_t gx = 0; gx < 4; ++gx) {
      const Tensor& lo = g.lowres[gy * 4 + gx];
      for (std::size_t c = 0; c < 12; ++c)
        for (std::size_t y = 0; y < 4; ++y)
          for (std::size_t x = 0; x < 6; ++x)
            EXPECT_EQ(lo.at(c, y, x), t.at(c, gy * 4 + y, gx * 6 + x));
    }
}

TEST(TileAndUpsample, ConstantMapGivesConstantPatches) {
  Tensor t({12, 16, 24});
  for (std::size_t c = 0; c < 12; ++c)
    for (std::size_t i = 0; i < 384; ++i) t[c * 384 + i] = c >= 6 && c < 9 ? 2.0 : 0.1 * c;
  const ParamPatchGrid g = tile_and_upsample(ParamMap(t), Geometry{64, 80, 16, 24, 4});
  for (const Tensor& p : g.highres)
    for (std::size_t c = 0; c < 12; ++c)
      for (std::size_t i = 0; i < 16 * 20; ++i)
        EXPECT_NEAR(p[c * 320 + i], t[c * 384], 1e-15);
}

TEST(TileAndUpsample, FlipEquivariance) {
  const Geometry geo{64, 80, 16, 24, 4};
  Tensor t = random_tensor({12, 16, 24}, 3, -1, 1);
  for (std::size_t i = 6 * 384; i < 9 * 384; ++i) t[i] = std::abs(t[i]) + 0.05;
  const ParamPatchGrid a = tile_and_upsample(ParamMap(t), geo);
  const ParamPatchGrid b = tile_and_upsample(ParamMap(flip_horizontal(t)), geo);
  for (std::size_t gy = 0; gy < 4; ++gy)
    for (std::size_t gx = 0; gx < 4; ++gx)
      EXPECT_LE(max_abs_diff(b.highres[gy * 4 + (3 - gx)],
                             flip_horizontal(a.highres[gy * 4 + gx])), 1e-14);
}

TEST(TileAndUpsample, IndivisibleSizeIsConfigError) {
  const ParamMap m = constrain(identity_raw(20, 30));
  EXPECT_THROW(tile_and_upsample(m, Geometry{72, 120, 20, 30, 8}), ConfigError);
  EXPECT_THROW(tile_and_upsample(m, Geometry::full()), ConfigError);
}

TEST(ParamFile, RoundTripIsBitExact) {
  TempDir dir("params");
  Tensor t = random_tensor({12, 7, 9}, 4, -3, 3);
  for (std::size_t i = 0; i < t.numel(); ++i) t[i] = static_cast<float>(t[i]);
  save_params(dir / "a.kpnp", t, ParamSpace::kRaw);
  const StoredParams s = load_params(dir / "a.kpnp");
  EXPECT_EQ(s.space, ParamSpace::kRaw);
  ASSERT_EQ(s.data.shape(), t.shape());
  EXPECT_EQ(std::memcmp(s.data.ptr(), t.ptr(), t.numel() * sizeof(Real)), 0);

  const ParamMap m = constrain(RawParamMap(t));
  save_params(dir / "b.kpnp", m);
  EXPECT_EQ(load_params(dir / "b.kpnp").space, ParamSpace::kConstrained);
}

TEST(ParamFile, ChannelMinorLayout) {
  TempDir dir("layout");
  Tensor t({12, 1, 2});
  for (std::size_t i = 0; i < 24; ++i) t[i] = static_cast<Real>(i);
  save_params(dir / "p.kpnp", t, ParamSpace::kRaw);
  const std::vector<std::uint8_t> bytes = read_file(dir / "p.kpnp");
  ASSERT_EQ(bytes.size(), 4 + 16 + 1 + 24 * 4u);
  float second;
  std::memcpy(&second, bytes.data() + 21 + 4, 4);
  EXPECT_EQ(second, 2.0f);  // pixel 0, channel 1 = t[1 * 2 + 0]
}

TEST(ParamFile, FormatErrorsNameTheField) {
  TempDir dir("bad");
  const Tensor t = identity_raw(2, 3).tensor();
  save_params(dir / "ok.kpnp", t, ParamSpace::kRaw);
  std::vector<std::uint8_t> good = read_file(dir / "ok.kpnp");
  auto expect_error = [&](std::vector<std::uint8_t> bytes, const char* what) {
    write_file(dir / "x.kpnp", bytes);
    try {
      load_params(dir / "x.kpnp");
      ADD_FAILURE() << "no error for " << what;
    } catch (const FormatError& e) {
      EXPECT_NE(std::string(e.what()).find(what), std::string::npos) << e.what();
    }
  };
  auto magic = good;
  std::memcpy(magic.data(), "XXXX", 4);
  expect_error(magic, "bad magic");
  auto channels = good;
  channels[16] = 11;
  expect_error(channels, "channel count");
  auto truncated = good;
  truncated.resize(truncated.size() - 3);
  expect_error(truncated, "truncated");
  auto version = good;
  version[4] = 9;
  expect_error(version, "version");
}

}  // namespace
}  // namespace kpn
