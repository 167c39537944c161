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

#include "kpn/translate.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "kpn/color.hpp"
#include "kpn/ops.hpp"
#include "kpn/parallel.hpp"
#include "kpn/simd/dispatch.hpp"
#include "kpn/simd/svblur.hpp"

namespace kpn {
namespace {

constexpr std::size_t kPad = simd::kMaxRadius;
constexpr double kSigmaTolerance = 1e-9;

std::size_t fold_index(std::ptrdiff_t i, std::size_t n) {
  const std::ptrdiff_t period = 2 * static_cast<std::ptrdiff_t>(n);
  i %= period;
  if (i < 0) i += period;
  return i < static_cast<std::ptrdiff_t>(n) ? static_cast<std::size_t>(i)
                                            : static_cast<std::size_t>(period - 1 - i);
}

// Copies an h x w plane into a buffer padded by kPad on every side.
template <typename T>
void pad_plane(const T* src, std::size_t h, std::size_t w, Padding padding,
               std::vector<T>& out) {
  const std::size_t stride = w + 2 * kPad;
  out.assign((h + 2 * kPad) * stride, T(0));
  if (padding == Padding::kZero) {
    for (std::size_t y = 0; y < h; ++y)
      std::copy(src + y * w, src + (y + 1) * w,
                out.data() + (y + kPad) * stride + kPad);
    return;
  }
  for (std::size_t py = 0; py < h + 2 * kPad; ++py) {
    const std::size_t sy = fold_index(static_cast<std::ptrdiff_t>(py) - kPad, h);
    for (std::size_t px = 0; px < stride; ++px) {
      const std::size_t sx =
          fold_index(static_cast<std::ptrdiff_t>(px) - kPad, w);
      out[py * stride + px] = src[sy * w + sx];
    }
  }
}

// Adjoint of pad_plane: sums a padded buffer back onto the h x w plane.
void unpad_plane_adjoint(const std::vector<double>& padded, std::size_t h,
                         std::size_t w, Padding padding, double* dst) {
  const std::size_t stride = w + 2 * kPad;
  if (padding == Padding::kZero) {
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x)
        dst[y * w + x] += padded[(y + kPad) * stride + x + kPad];
    return;
  }
  for (std::size_t py = 0; py < h + 2 * kPad; ++py) {
    const std::size_t sy = fold_index(static_cast<std::ptrdiff_t>(py) - kPad, h);
    for (std::size_t px = 0; px < stride; ++px) {
      const std::size_t sx =
          fold_index(static_cast<std::ptrdiff_t>(px) - kPad, w);
      dst[sy * w + sx] += padded[py * stride + px];
    }
  }
}

template <typename T>
struct Profiles {
  std::vector<T> h;  // (kPad + 1) planes of n values
  std::vector<std::uint8_t> radius;
  std::vector<double> sigma;
  std::vector<double> m2;
};

double checked_sigma(Real s, const SigmaBounds& b, std::size_t channel,
                     std::size_t pixel) {
  const double v = static_cast<double>(s);
  if (!(v >= b.min * (1 - kSigmaTolerance) && v <= b.max * (1 + kSigmaTolerance))) {
    throw ContractError(std::string("translate: ") + param_channel_name(channel) +
                        " = " + std::to_string(v) + " at pixel " +
                        std::to_string(pixel) +
                        " is not a constrained sigma; apply constrain() first");
  }
  return std::clamp(v, b.min, b.max);
}

template <typename T>
void build_profiles(const Real* sigma, std::size_t n, std::size_t channel,
                    const TransformConfig& cfg, const std::uint8_t* active,
                    Profiles<T>& out) {
  const int max_radius = static_cast<int>(cfg.kernel_size / 2);
  out.h.assign((kPad + 1) * n, T(0));
  out.radius.assign(n, 0);
  out.sigma.resize(n);
  out.m2.resize(n);
  std::unordered_map<long, GaussianProfile<T>> memo;
  for (std::size_t p = 0; p < n; ++p) {
    double s = checked_sigma(sigma[p], cfg.sigma_bounds, channel, p);
    out.sigma[p] = s;
    if (active && !active[p]) {
      out.m2[p] = 0;
      continue;
    }
    GaussianProfile<T> prof;
    if (cfg.quantize_sigma) {
      const long bucket = std::lround(s * 1000.0);
      auto it = memo.find(bucket);
      if (it == memo.end()) {
        const double q = std::clamp(bucket / 1000.0, cfg.sigma_bounds.min,
                                    cfg.sigma_bounds.max);
        it = memo.emplace(bucket, gaussian_profile<T>(q, max_radius,
                                                      cfg.truncate_negligible))
                 .first;
      }
      prof = it->second;
    } else {
      prof = gaussian_profile<T>(s, max_radius, cfg.truncate_negligible);
    }
    out.radius[p] = static_cast<std::uint8_t>(prof.radius);
    out.m2[p] = prof.m2;
    for (int d = 0; d <= prof.radius; ++d) out.h[d * n + p] = prof.h[d];
  }
}

// Intermediate values of one forward evaluation, kept for the backward pass.
template <typename T>
struct ForwardState {
  std::size_t h = 0, w = 0;
  std::vector<T> hsv;      // input in HSV
  std::vector<T> affine;   // w * hsv + b before wrap/clamp
  std::vector<T> wrapped;  // after wrap/clamp
  std::vector<T> rgb2;     // blur input
  std::vector<T> blurred;
  std::vector<T> pre;      // before the output clamp
  Profiles<T> prof[3];
  std::vector<T> padded[3];
};

void check_patch_shapes(const Tensor& rgb, const Tensor& params,
                        const Tensor& noise) {
  require_rank(rgb, 3, "translate input");
  if (rgb.dim(0) != 3) {
    throw DimensionError("translate input must have 3 channels, got " +
                         shape_string(rgb.shape()));
  }
  const Shape pshape{kParamChannels, rgb.dim(1), rgb.dim(2)};
  if (params.shape() != pshape) {
    throw DimensionError("translate parameters " + shape_string(params.shape()) +
                         " do not match " + shape_string(pshape));
  }
  require_same_shape(rgb, noise, "translate noise");
}

template <typename T>
void run_forward(const Tensor& rgb_t, const Tensor& params,
                 const Tensor& noise, const TransformConfig& cfg,
                 const std::uint8_t* active, ForwardState<T>& st, bool keep) {
  const std::size_t h = rgb_t.dim(1), w = rgb_t.dim(2), n = h * w;
  st.h = h;
  st.w = w;
  const Real* prm = params.ptr();
  std::vector<T> rgb(3 * n);
  for (std::size_t i = 0; i < 3 * n; ++i) rgb[i] = static_cast<T>(rgb_t[i]);

  if (cfg.enable_affine) {
    st.rgb2.resize(3 * n);
    if (keep) {
      st.hsv.resize(3 * n);
      st.affine.resize(3 * n);
      st.wrapped.resize(3 * n);
    }
    for (std::size_t p = 0; p < n; ++p) {
      const Pixel<T> x = rgb_to_hsv(Pixel<T>{rgb[p], rgb[n + p], rgb[2 * n + p]});
      Pixel<T> a;
      for (std::size_t c = 0; c < 3; ++c) {
        a[c] = static_cast<T>(prm[(kWeightBegin + c) * n + p]) * x[c] +
               static_cast<T>(prm[(kBiasBegin + c) * n + p]);
      }
      Pixel<T> aw = a;
      aw[0] = a[0] - std::floor(a[0]);
      if (aw[0] >= T(1)) aw[0] = T(0);
      aw[1] = std::clamp(a[1], T(0), T(1));
      aw[2] = std::clamp(a[2], T(0), T(1));
      const Pixel<T> out = hsv_to_rgb(aw);
      for (std::size_t c = 0; c < 3; ++c) {
        st.rgb2[c * n + p] = out[c];
        if (keep) {
          st.hsv[c * n + p] = x[c];
          st.affine[c * n + p] = a[c];
          st.wrapped[c * n + p] = aw[c];
        }
      }
    }
  } else {
    st.rgb2 = std::move(rgb);
  }

  if (cfg.enable_blur) {
    st.blurred.resize(3 * n);
    for (std::size_t c = 0; c < 3; ++c) {
      build_profiles(prm + (kSigmaBegin + c) * n, n, kSigmaBegin + c, cfg,
                     active, st.prof[c]);
      pad_plane(st.rgb2.data() + c * n, h, w, cfg.padding, st.padded[c]);
      const std::size_t stride = w + 2 * kPad;
      simd::BlurPlane<T> plane{st.padded[c].data() + kPad * stride + kPad,
                               stride,
                               st.prof[c].h.data(),
                               st.prof[c].radius.data(),
                               h,
                               w,
                               active};
      simd::svblur_forward(plane, st.blurred.data() + c * n);
      if (!keep) {
        st.padded[c] = {};
        st.prof[c] = {};
      }
    }
  } else {
    st.blurred = st.rgb2;
  }

  st.pre = st.blurred;
  if (cfg.enable_noise) {
    for (std::size_t c = 0; c < 3; ++c) {
      for (std::size_t p = 0; p < n; ++p) {
        st.pre[c * n + p] += static_cast<T>(prm[(kNoiseBegin + c) * n + p]) *
                             static_cast<T>(noise[c * n + p]);
      }
    }
  }
}

template <typename T>
Tensor forward_patch(const Tensor& rgb, const Tensor& params,
                     const Tensor& noise, const TransformConfig& cfg,
                     const std::uint8_t* active) {
  ForwardState<T> st;
  run_forward(rgb, params, noise, cfg, active, st, false);
  Tensor out(rgb.shape());
  const std::size_t n = rgb.dim(1) * rgb.dim(2);
  for (std::size_t i = 0; i < out.numel(); ++i) {
    if (active && !active[i % n]) continue;
    out[i] = static_cast<Real>(std::clamp(st.pre[i], T(0), T(1)));
  }
  return out;
}

Tensor patch_forward(const Tensor& rgb, const Tensor& params,
                     const Tensor& noise, const TransformConfig& cfg,
                     const std::uint8_t* active) {
  if (cfg.precision == Precision::kFloat32)
    return forward_patch<float>(rgb, params, noise, cfg, active);
  return forward_patch<double>(rgb, params, noise, cfg, active);
}

PatchGrads patch_backward(const Tensor& rgb, const Tensor& params,
                          const Tensor& noise, const Tensor& grad_out,
                          const TransformConfig& cfg, bool want_input,
                          const std::uint8_t* active);

}  // namespace

void TransformConfig::validate() const {
  if (kernel_size % 2 == 0 || kernel_size > 2 * kPad + 1) {
    throw ConfigError("kernel size must be odd and at most 25, got " +
                      std::to_string(kernel_size));
  }
  if (!(sigma_bounds.min > 0) || !(sigma_bounds.max > sigma_bounds.min)) {
    throw ConfigError("sigma bounds must satisfy 0 < min < max");
  }
}

Tensor translate_patch(const Tensor& rgb, const Tensor& params,
                       const Tensor& noise, const TransformConfig& cfg) {
  cfg.validate();
  check_patch_shapes(rgb, params, noise);
  return patch_forward(rgb, params, noise, cfg, nullptr);
}

PatchGrads translate_patch_backward(const Tensor& rgb, const Tensor& params,
                                    const Tensor& noise,
                                    const Tensor& grad_out,
                                    const TransformConfig& cfg,
                                    bool want_input) {
  cfg.validate();
  check_patch_shapes(rgb, params, noise);
  require_same_shape(rgb, grad_out, "translate upstream gradient");
  return patch_backward(rgb, params, noise, grad_out, cfg, want_input, nullptr);
}

namespace {

PatchGrads patch_backward(const Tensor& rgb, const Tensor& params,
                          const Tensor& noise, const Tensor& grad_out,
                          const TransformConfig& cfg, bool want_input,
                          const std::uint8_t* active) {
  ForwardState<double> st;
  run_forward(rgb, params, noise, cfg, active, st, true);
  const std::size_t h = st.h, w = st.w, n = h * w;
  const Real* prm = params.ptr();

  PatchGrads grads{Tensor(params.shape()), Tensor()};
  Real* gp = grads.params.ptr();

  std::vector<double> g_pre(3 * n);
  for (std::size_t i = 0; i < 3 * n; ++i) {
    const double v = st.pre[i];
    const bool on = !active || active[i % n];
    g_pre[i] = (on && v > 0.0 && v < 1.0) ? static_cast<double>(grad_out[i]) : 0.0;
  }
  if (cfg.enable_noise) {
    for (std::size_t i = 0; i < 3 * n; ++i)
      gp[kNoiseBegin * n + i] = static_cast<Real>(g_pre[i] * noise[i]);
  }

  const bool need_rgb2 = cfg.enable_affine || want_input;
  std::vector<double> g_rgb2;
  if (cfg.enable_blur) {
    if (need_rgb2) g_rgb2.assign(3 * n, 0.0);
    const std::size_t stride = w + 2 * kPad;
    std::vector<double> moment(n);
    std::vector<double> scratch;
    for (std::size_t c = 0; c < 3; ++c) {
      const Profiles<double>& pr = st.prof[c];
      simd::BlurPlane<double> plane{st.padded[c].data() + kPad * stride + kPad,
                                    stride,
                                    pr.h.data(),
                                    pr.radius.data(),
                                    h,
                                    w,
                                    active};
      simd::svblur_moment(plane, moment.data());
      const SigmaBounds& b = cfg.sigma_bounds;
      for (std::size_t p = 0; p < n; ++p) {
        const double s = pr.sigma[p];
        if (s <= b.min || s >= b.max) continue;
        const double u = st.blurred[c * n + p];
        gp[(kSigmaBegin + c) * n + p] = static_cast<Real>(
            g_pre[c * n + p] * (moment[p] - 2.0 * pr.m2[p] * u) / (s * s * s));
      }
      if (need_rgb2) {
        scratch.assign(st.padded[c].size(), 0.0);
        simd::svblur_scatter(plane, g_pre.data() + c * n,
                             scratch.data() + kPad * stride + kPad);
        unpad_plane_adjoint(scratch, h, w, cfg.padding, g_rgb2.data() + c * n);
      }
    }
  } else if (need_rgb2) {
    g_rgb2 = g_pre;
  }

  if (want_input) grads.input = Tensor(rgb.shape());
  if (cfg.enable_affine) {
    for (std::size_t p = 0; p < n; ++p) {
      Pixel<double> aw, g2;
      for (std::size_t c = 0; c < 3; ++c) {
        aw[c] = st.wrapped[c * n + p];
        g2[c] = g_rgb2[c * n + p];
      }
      Pixel<double> ga = hsv_to_rgb_backward(aw, g2);
      for (std::size_t c = 1; c < 3; ++c) {
        const double a = st.affine[c * n + p];
        if (!(a > 0.0 && a < 1.0)) ga[c] = 0.0;
      }
      Pixel<double> gx;
      for (std::size_t c = 0; c < 3; ++c) {
        gp[(kWeightBegin + c) * n + p] =
            static_cast<Real>(ga[c] * st.hsv[c * n + p]);
        gp[(kBiasBegin + c) * n + p] = static_cast<Real>(ga[c]);
        gx[c] = ga[c] * static_cast<double>(prm[(kWeightBegin + c) * n + p]);
      }
      if (want_input) {
        const Pixel<double> in{static_cast<double>(rgb[p]),
                               static_cast<double>(rgb[n + p]),
                               static_cast<double>(rgb[2 * n + p])};
        const Pixel<double> gi = rgb_to_hsv_backward(in, gx);
        for (std::size_t c = 0; c < 3; ++c)
          grads.input[c * n + p] = static_cast<Real>(gi[c]);
      }
    }
  } else if (want_input) {
    for (std::size_t i = 0; i < 3 * n; ++i)
      grads.input[i] = static_cast<Real>(g_rgb2[i]);
  }
  return grads;
}

}  // namespace

void check_translate_geometry(const Tensor& rgb, const Tensor& lowres,
                              const Tensor& noise, const Geometry& g) {
  g.validate();
  auto dims = [](std::size_t c, std::size_t h, std::size_t w) {
    return std::to_string(c) + "x" + std::to_string(h) + "x" + std::to_string(w);
  };
  const Shape hi{3, g.hi_h, g.hi_w};
  const Shape lo{kParamChannels, g.lo_h, g.lo_w};
  if (rgb.shape() != hi) {
    throw ConfigError("image is " + shape_string(rgb.shape()) + ", expected " +
                      dims(3, g.hi_h, g.hi_w));
  }
  if (lowres.shape() != lo) {
    throw ConfigError("parameter map is " + shape_string(lowres.shape()) +
                      ", expected " + dims(kParamChannels, g.lo_h, g.lo_w));
  }
  if (noise.shape() != hi) {
    throw ConfigError("noise field is " + shape_string(noise.shape()) +
                      ", expected " + dims(3, g.hi_h, g.hi_w));
  }
}

namespace {

// Patch-local copy of a full-image mask; empty when the patch has no
// selected pixel.
std::vector<std::uint8_t> patch_mask(const PixelMask& mask, const Geometry& g,
                                     std::size_t gy, std::size_t gx) {
  const std::size_t ph = g.patch_h(), pw = g.patch_w();
  std::vector<std::uint8_t> out(ph * pw);
  bool any = false;
  for (std::size_t y = 0; y < ph; ++y) {
    const std::uint8_t* row = mask.data() + (gy * ph + y) * g.hi_w + gx * pw;
    for (std::size_t x = 0; x < pw; ++x) {
      out[y * pw + x] = row[x] ? 1 : 0;
      any |= row[x] != 0;
    }
  }
  if (!any) out.clear();
  return out;
}

void check_mask(const PixelMask* mask, const Geometry& g) {
  if (mask && mask->size() != g.hi_h * g.hi_w) {
    throw DimensionError("translate mask has " + std::to_string(mask->size()) +
                         " entries, expected " + std::to_string(g.hi_h * g.hi_w));
  }
}

Tensor translate_grid(const Tensor& rgb, const Tensor& lowres,
                      const Tensor& noise, const Geometry& g,
                      const TransformConfig& cfg, const PixelMask* mask) {
  cfg.validate();
  check_translate_geometry(rgb, lowres, noise, g);
  check_mask(mask, g);
  Tensor out(rgb.shape());
  const std::size_t ph = g.patch_h(), pw = g.patch_w();
  parallel_for(g.patch_count(), [&](std::size_t i) {
    const std::size_t gy = i / g.grid, gx = i % g.grid;
    std::vector<std::uint8_t> local;
    if (mask) {
      local = patch_mask(*mask, g, gy, gx);
      if (local.empty()) return;
    }
    const Tensor params = upsample_patch(lowres, g, gy, gx);
    const Tensor patch = crop_chw(rgb, gy * ph, gx * pw, ph, pw);
    const Tensor nz = crop_chw(noise, gy * ph, gx * pw, ph, pw);
    paste_chw(patch_forward(patch, params, nz, cfg, mask ? local.data() : nullptr),
              gy * ph, gx * pw, out);
  });
  return out;
}

}  // namespace

Tensor translate_image(const Tensor& rgb, const ParamMap& lowres,
                       const NoiseField& noise, const Geometry& geometry,
                       const TransformConfig& cfg) {
  return translate_grid(rgb, lowres.tensor(), noise.values, geometry, cfg, nullptr);
}

Tensor translate_image(const Tensor& rgb, const ParamMap& lowres,
                       const NoiseField& noise, const Geometry& geometry,
                       const TransformConfig& cfg, const PixelMask& mask) {
  return translate_grid(rgb, lowres.tensor(), noise.values, geometry, cfg, &mask);
}

Var translate_image(Var rgb, Var lowres, const NoiseField& noise,
                    const Geometry& geometry, const TransformConfig& cfg,
                    std::shared_ptr<const PixelMask> mask) {
  Tape& tape = *rgb.tape;
  Tensor out = translate_grid(rgb.value(), lowres.value(), noise.values,
                              geometry, cfg, mask.get());
  auto nz = std::make_shared<const Tensor>(noise.values);
  return tape.record(
      std::move(out), {rgb, lowres},
      [rgb, lowres, nz, geometry, cfg, mask](Tape& t, const Tensor& g) {
        const bool want_input = t.requires_grad(rgb);
        const bool want_params = t.requires_grad(lowres);
        const Geometry& geo = geometry;
        const std::size_t ph = geo.patch_h(), pw = geo.patch_w();
        const std::size_t lh = geo.lo_patch_h(), lw = geo.lo_patch_w();
        const Tensor& image = t.value(rgb);
        const Tensor& low = t.value(lowres);
        Tensor* g_low = want_params ? &t.grad_buffer(lowres) : nullptr;
        Tensor* g_img = want_input ? &t.grad_buffer(rgb) : nullptr;
        const std::size_t LH = geo.lo_h, LW = geo.lo_w;
        const std::size_t H = geo.hi_h, W = geo.hi_w;
        // Grid cells own disjoint regions of both gradients.
        parallel_for(geo.patch_count(), [&](std::size_t i) {
          const std::size_t gy = i / geo.grid, gx = i % geo.grid;
          std::vector<std::uint8_t> local;
          if (mask) {
            local = patch_mask(*mask, geo, gy, gx);
            if (local.empty()) return;
          }
          const Tensor params = upsample_patch(low, geo, gy, gx);
          const Tensor patch = crop_chw(image, gy * ph, gx * pw, ph, pw);
          const Tensor noise_patch = crop_chw(*nz, gy * ph, gx * pw, ph, pw);
          const Tensor gout = crop_chw(g, gy * ph, gx * pw, ph, pw);
          PatchGrads pg = patch_backward(patch, params, noise_patch, gout, cfg,
                                         want_input,
                                         mask ? local.data() : nullptr);
          if (g_low) {
            const Tensor gl = resize_bilinear_backward(pg.params, lh, lw);
            for (std::size_t c = 0; c < kParamChannels; ++c)
              for (std::size_t y = 0; y < lh; ++y)
                for (std::size_t x = 0; x < lw; ++x)
                  (*g_low)[(c * LH + gy * lh + y) * LW + gx * lw + x] +=
                      gl[(c * lh + y) * lw + x];
          }
          if (g_img) {
            for (std::size_t c = 0; c < 3; ++c)
              for (std::size_t y = 0; y < ph; ++y)
                for (std::size_t x = 0; x < pw; ++x)
                  (*g_img)[(c * H + gy * ph + y) * W + gx * pw + x] +=
                      pg.input[(c * ph + y) * pw + x];
          }
        });
      });
}

}  // namespace kpn
