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

#include "kpn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include "kpn/simd/gemm.hpp"

namespace kpn {
namespace {

struct ConvGeom {
  std::size_t cin, h, w, cout, kh, kw, stride, pad, oh, ow;
  std::size_t k() const { return cin * kh * kw; }
  std::size_t n() const { return oh * ow; }
};

ConvGeom conv_geom(const Tensor& input, const Tensor& weight,
                   std::size_t stride, std::size_t pad) {
  require_rank(input, 3, "conv2d input");
  require_rank(weight, 4, "conv2d weight");
  if (stride == 0) throw DimensionError("conv2d: stride must be positive");
  ConvGeom g{};
  g.cin = input.dim(0);
  g.h = input.dim(1);
  g.w = input.dim(2);
  g.cout = weight.dim(0);
  g.kh = weight.dim(2);
  g.kw = weight.dim(3);
  g.stride = stride;
  g.pad = pad;
  if (weight.dim(1) != g.cin) {
    throw DimensionError("conv2d: input has " + std::to_string(g.cin) +
                         " channels but weight " +
                         shape_string(weight.shape()) + " expects " +
                         std::to_string(weight.dim(1)));
  }
  if (g.h + 2 * pad < g.kh || g.w + 2 * pad < g.kw) {
    throw DimensionError("conv2d: input " + shape_string(input.shape()) +
                         " smaller than kernel " + shape_string(weight.shape()));
  }
  g.oh = conv_out_size(g.h, g.kh, stride, pad);
  g.ow = conv_out_size(g.w, g.kw, stride, pad);
  return g;
}

std::vector<Real> im2col(const Tensor& input, const ConvGeom& g) {
  std::vector<Real> cols(g.k() * g.n(), Real(0));
  for (std::size_t ci = 0; ci < g.cin; ++ci) {
    for (std::size_t ky = 0; ky < g.kh; ++ky) {
      for (std::size_t kx = 0; kx < g.kw; ++kx) {
        Real* row = cols.data() + ((ci * g.kh + ky) * g.kw + kx) * g.n();
        for (std::size_t oy = 0; oy < g.oh; ++oy) {
          const std::ptrdiff_t iy =
              static_cast<std::ptrdiff_t>(oy * g.stride + ky) -
              static_cast<std::ptrdiff_t>(g.pad);
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.h)) continue;
          const Real* src = input.ptr() + (ci * g.h + iy) * g.w;
          for (std::size_t ox = 0; ox < g.ow; ++ox) {
            const std::ptrdiff_t ix =
                static_cast<std::ptrdiff_t>(ox * g.stride + kx) -
                static_cast<std::ptrdiff_t>(g.pad);
            if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(g.w)) continue;
            row[oy * g.ow + ox] = src[ix];
          }
        }
      }
    }
  }
  return cols;
}

void col2im_add(const std::vector<Real>& cols, const ConvGeom& g,
                Tensor& grad_input) {
  for (std::size_t ci = 0; ci < g.cin; ++ci) {
    for (std::size_t ky = 0; ky < g.kh; ++ky) {
      for (std::size_t kx = 0; kx < g.kw; ++kx) {
        const Real* row = cols.data() + ((ci * g.kh + ky) * g.kw + kx) * g.n();
        for (std::size_t oy = 0; oy < g.oh; ++oy) {
          const std::ptrdiff_t iy =
              static_cast<std::ptrdiff_t>(oy * g.stride + ky) -
              static_cast<std::ptrdiff_t>(g.pad);
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.h)) continue;
          Real* dst = grad_input.ptr() + (ci * g.h + iy) * g.w;
          for (std::size_t ox = 0; ox < g.ow; ++ox) {
            const std::ptrdiff_t ix =
                static_cast<std::ptrdiff_t>(ox * g.stride + kx) -
                static_cast<std::ptrdiff_t>(g.pad);
            if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(g.w)) continue;
            dst[ix] += row[oy * g.ow + ox];
          }
        }
      }
    }
  }
}

struct Lerp {
  std::size_t i0, i1;
  Real f;
};

std::vector<Lerp> lerp_table(std::size_t in, std::size_t out) {
  std::vector<Lerp> table(out);
  const Real ratio = static_cast<Real>(in) / static_cast<Real>(out);
  for (std::size_t o = 0; o < out; ++o) {
    Real s = (static_cast<Real>(o) + Real(0.5)) * ratio - Real(0.5);
    s = std::clamp(s, Real(0), static_cast<Real>(in - 1));
    const std::size_t i0 = static_cast<std::size_t>(std::floor(s));
    const std::size_t i1 = std::min(i0 + 1, in - 1);
    table[o] = Lerp{i0, i1, s - static_cast<Real>(i0)};
  }
  return table;
}

template <typename F>
Var unary(Var x, F&& forward_fn, std::function<Real(Real, Real)> dydx) {
  const Tensor& xv = x.value();
  Tensor y(xv.shape());
  for (std::size_t i = 0; i < xv.numel(); ++i) y[i] = forward_fn(xv[i]);
  Tape& tape = *x.tape;
  auto out_vals = std::make_shared<Tensor>(y);
  return tape.record(std::move(y), {x},
                     [x, out_vals, dydx](Tape& t, const Tensor& g) {
                       const Tensor& xv = t.value(x);
                       Tensor& gx = t.grad_buffer(x);
                       for (std::size_t i = 0; i < g.numel(); ++i)
                         gx[i] += g[i] * dydx(xv[i], (*out_vals)[i]);
                     });
}

}  // namespace

std::size_t conv_out_size(std::size_t in, std::size_t kernel,
                          std::size_t stride, std::size_t pad) {
  return (in + 2 * pad - kernel) / stride + 1;
}

Tensor conv2d_forward(const Tensor& input, const Tensor& weight,
                      const Tensor& bias, std::size_t stride,
                      std::size_t pad) {
  const ConvGeom g = conv_geom(input, weight, stride, pad);
  if (bias.numel() != g.cout) {
    throw DimensionError("conv2d: bias " + shape_string(bias.shape()) +
                         " does not match " + std::to_string(g.cout) +
                         " output channels");
  }
  Tensor out({g.cout, g.oh, g.ow});
  const std::size_t n = g.n();
  for (std::size_t co = 0; co < g.cout; ++co)
    std::fill(out.ptr() + co * n, out.ptr() + (co + 1) * n, bias[co]);
  if (g.kh == 1 && g.kw == 1 && stride == 1 && pad == 0) {
    simd::gemm<Real>(false, false, g.cout, n, g.cin, weight.ptr(), g.cin,
                     input.ptr(), n, out.ptr(), n, true);
    return out;
  }
  const std::vector<Real> cols = im2col(input, g);
  simd::gemm<Real>(false, false, g.cout, n, g.k(), weight.ptr(), g.k(),
                   cols.data(), n, out.ptr(), n, true);
  return out;
}

Conv2dGrads conv2d_backward(const Tensor& grad_out, const Tensor& input,
                            const Tensor& weight, std::size_t stride,
                            std::size_t pad, bool want_input,
                            bool want_params) {
  const ConvGeom g = conv_geom(input, weight, stride, pad);
  if (grad_out.shape() != Shape{g.cout, g.oh, g.ow}) {
    throw DimensionError("conv2d_backward: upstream gradient " +
                         shape_string(grad_out.shape()) + " expected " +
                         shape_string({g.cout, g.oh, g.ow}));
  }
  const std::size_t n = g.n();
  Conv2dGrads out;
  const bool pointwise = g.kh == 1 && g.kw == 1 && stride == 1 && pad == 0;
  if (want_params) {
    out.weight = Tensor(weight.shape());
    out.bias = Tensor({g.cout});
    for (std::size_t co = 0; co < g.cout; ++co) {
      Real s = 0;
      for (std::size_t j = 0; j < n; ++j) s += grad_out[co * n + j];
      out.bias[co] = s;
    }
    if (pointwise) {
      simd::gemm<Real>(false, true, g.cout, g.cin, n, grad_out.ptr(), n,
                       input.ptr(), n, out.weight.ptr(), g.cin, false);
    } else {
      const std::vector<Real> cols = im2col(input, g);
      simd::gemm<Real>(false, true, g.cout, g.k(), n, grad_out.ptr(), n,
                       cols.data(), n, out.weight.ptr(), g.k(), false);
    }
  }
  if (want_input) {
    out.input = Tensor(input.shape());
    if (pointwise) {
      simd::gemm<Real>(true, false, g.cin, n, g.cout, weight.ptr(), g.cin,
                       grad_out.ptr(), n, out.input.ptr(), n, false);
    } else {
      std::vector<Real> gcols(g.k() * n);
      simd::gemm<Real>(true, false, g.k(), n, g.cout, weight.ptr(), g.k(),
                       grad_out.ptr(), n, gcols.data(), n, false);
      col2im_add(gcols, g, out.input);
    }
  }
  return out;
}

Tensor resize_bilinear(const Tensor& input, std::size_t out_h,
                       std::size_t out_w) {
  require_rank(input, 3, "bilinear_resize");
  if (out_h == 0 || out_w == 0) {
    throw DimensionError("bilinear_resize: output size must be positive");
  }
  const std::size_t C = input.dim(0), H = input.dim(1), W = input.dim(2);
  const auto ty = lerp_table(H, out_h);
  const auto tx = lerp_table(W, out_w);
  Tensor out({C, out_h, out_w});
  for (std::size_t c = 0; c < C; ++c) {
    const Real* plane = input.ptr() + c * H * W;
    for (std::size_t oy = 0; oy < out_h; ++oy) {
      const Real* r0 = plane + ty[oy].i0 * W;
      const Real* r1 = plane + ty[oy].i1 * W;
      const Real fy = ty[oy].f;
      Real* dst = out.ptr() + (c * out_h + oy) * out_w;
      for (std::size_t ox = 0; ox < out_w; ++ox) {
        const Lerp& l = tx[ox];
        const Real top = r0[l.i0] + l.f * (r0[l.i1] - r0[l.i0]);
        const Real bot = r1[l.i0] + l.f * (r1[l.i1] - r1[l.i0]);
        dst[ox] = top + fy * (bot - top);
      }
    }
  }
  return out;
}

Tensor resize_bilinear_backward(const Tensor& grad_out, std::size_t in_h,
                                std::size_t in_w) {
  require_rank(grad_out, 3, "bilinear_resize backward");
  const std::size_t C = grad_out.dim(0), oh = grad_out.dim(1),
                    ow = grad_out.dim(2);
  const auto ty = lerp_table(in_h, oh);
  const auto tx = lerp_table(in_w, ow);
  Tensor gin({C, in_h, in_w});
  for (std::size_t c = 0; c < C; ++c) {
    Real* plane = gin.ptr() + c * in_h * in_w;
    for (std::size_t oy = 0; oy < oh; ++oy) {
      Real* r0 = plane + ty[oy].i0 * in_w;
      Real* r1 = plane + ty[oy].i1 * in_w;
      const Real fy = ty[oy].f;
      const Real* g = grad_out.ptr() + (c * oh + oy) * ow;
      for (std::size_t ox = 0; ox < ow; ++ox) {
        const Lerp& l = tx[ox];
        const Real gt = g[ox] * (Real(1) - fy);
        const Real gb = g[ox] * fy;
        r0[l.i0] += gt * (Real(1) - l.f);
        r0[l.i1] += gt * l.f;
        r1[l.i0] += gb * (Real(1) - l.f);
        r1[l.i1] += gb * l.f;
      }
    }
  }
  return gin;
}

std::vector<std::uint8_t> resize_labels_nearest(
    std::span<const std::uint8_t> labels, std::size_t in_h, std::size_t in_w,
    std::size_t out_h, std::size_t out_w) {
  if (labels.size() != in_h * in_w) {
    throw DimensionError("label map holds " + std::to_string(labels.size()) +
                         " values, expected " + std::to_string(in_h * in_w));
  }
  std::vector<std::uint8_t> out(out_h * out_w);
  for (std::size_t oy = 0; oy < out_h; ++oy) {
    const std::size_t iy = std::min(in_h - 1, (2 * oy + 1) * in_h / (2 * out_h));
    for (std::size_t ox = 0; ox < out_w; ++ox) {
      const std::size_t ix =
          std::min(in_w - 1, (2 * ox + 1) * in_w / (2 * out_w));
      out[oy * out_w + ox] = labels[iy * in_w + ix];
    }
  }
  return out;
}

Tensor softmax_channels(const Tensor& logits) {
  require_rank(logits, 3, "softmax");
  const std::size_t C = logits.dim(0), n = logits.dim(1) * logits.dim(2);
  Tensor out(logits.shape());
  for (std::size_t p = 0; p < n; ++p) {
    Real m = logits[p];
    for (std::size_t c = 1; c < C; ++c) m = std::max(m, logits[c * n + p]);
    Real s = 0;
    for (std::size_t c = 0; c < C; ++c) {
      const Real e = std::exp(logits[c * n + p] - m);
      out[c * n + p] = e;
      s += e;
    }
    for (std::size_t c = 0; c < C; ++c) out[c * n + p] /= s;
  }
  return out;
}

Var conv2d(Var input, Var weight, Var bias, std::size_t stride,
           std::size_t pad) {
  Tape& tape = *input.tape;
  Tensor y = conv2d_forward(input.value(), weight.value(), bias.value(),
                            stride, pad);
  return tape.record(
      std::move(y), {input, weight, bias},
      [input, weight, bias, stride, pad](Tape& t, const Tensor& g) {
        const bool want_input = t.requires_grad(input);
        const bool want_params = t.requires_grad(weight) || t.requires_grad(bias);
        Conv2dGrads grads = conv2d_backward(g, t.value(input), t.value(weight),
                                            stride, pad, want_input,
                                            want_params);
        if (want_input) t.accumulate(input, grads.input);
        if (want_params) {
          t.accumulate(weight, grads.weight);
          t.accumulate(bias, grads.bias);
        }
      });
}

Var leaky_relu(Var x, Real slope) {
  if (!(slope >= 0 && slope < 1)) {
    throw DomainError("leaky_relu slope must lie in [0, 1)");
  }
  return unary(
      x, [slope](Real v) { return v >= 0 ? v : slope * v; },
      [slope](Real v, Real) { return v >= 0 ? Real(1) : slope; });
}

Var bilinear_resize(Var x, std::size_t out_h, std::size_t out_w) {
  Tape& tape = *x.tape;
  const std::size_t in_h = x.value().dim(1), in_w = x.value().dim(2);
  return tape.record(resize_bilinear(x.value(), out_h, out_w), {x},
                     [x, in_h, in_w](Tape& t, const Tensor& g) {
                       t.accumulate(x, resize_bilinear_backward(g, in_h, in_w));
                     });
}

Var crop(Var x, std::size_t y0, std::size_t x0, std::size_t h, std::size_t w) {
  Tape& tape = *x.tape;
  return tape.record(crop_chw(x.value(), y0, x0, h, w), {x},
                     [x, y0, x0](Tape& t, const Tensor& g) {
                       Tensor& gx = t.grad_buffer(x);
                       const std::size_t C = g.dim(0), h = g.dim(1),
                                         w = g.dim(2);
                       const std::size_t H = gx.dim(1), W = gx.dim(2);
                       for (std::size_t c = 0; c < C; ++c)
                         for (std::size_t y = 0; y < h; ++y)
                           for (std::size_t xx = 0; xx < w; ++xx)
                             gx[(c * H + y0 + y) * W + x0 + xx] +=
                                 g[(c * h + y) * w + xx];
                     });
}

Var add(Var a, Var b) {
  require_same_shape(a.value(), b.value(), "add");
  Tensor y(a.value().shape());
  for (std::size_t i = 0; i < y.numel(); ++i) y[i] = a.value()[i] + b.value()[i];
  return a.tape->record(std::move(y), {a, b}, [a, b](Tape& t, const Tensor& g) {
    t.accumulate(a, g);
    t.accumulate(b, g);
  });
}

Var sub(Var a, Var b) {
  require_same_shape(a.value(), b.value(), "sub");
  Tensor y(a.value().shape());
  for (std::size_t i = 0; i < y.numel(); ++i) y[i] = a.value()[i] - b.value()[i];
  return a.tape->record(std::move(y), {a, b}, [a, b](Tape& t, const Tensor& g) {
    t.accumulate(a, g);
    if (t.requires_grad(b)) {
      Tensor& gb = t.grad_buffer(b);
      for (std::size_t i = 0; i < g.numel(); ++i) gb[i] -= g[i];
    }
  });
}

Var mul(Var a, Var b) {
  require_same_shape(a.value(), b.value(), "mul");
  Tensor y(a.value().shape());
  for (std::size_t i = 0; i < y.numel(); ++i) y[i] = a.value()[i] * b.value()[i];
  return a.tape->record(std::move(y), {a, b}, [a, b](Tape& t, const Tensor& g) {
    const Tensor& av = t.value(a);
    const Tensor& bv = t.value(b);
    if (t.requires_grad(a)) {
      Tensor& ga = t.grad_buffer(a);
      for (std::size_t i = 0; i < g.numel(); ++i) ga[i] += g[i] * bv[i];
    }
    if (t.requires_grad(b)) {
      Tensor& gb = t.grad_buffer(b);
      for (std::size_t i = 0; i < g.numel(); ++i) gb[i] += g[i] * av[i];
    }
  });
}

Var scale(Var a, Real s) {
  return unary(
      a, [s](Real v) { return s * v; }, [s](Real, Real) { return s; });
}

Var exp(Var x) {
  return unary(
      x, [](Real v) { return std::exp(v); }, [](Real, Real y) { return y; });
}

Var log(Var x) {
  for (Real v : x.value().data()) {
    if (!(v > 0)) {
      throw DomainError("log of non-positive value " + std::to_string(v));
    }
  }
  return unary(
      x, [](Real v) { return std::log(v); },
      [](Real v, Real) { return Real(1) / v; });
}

Var clamp(Var x, Real lo, Real hi) {
  return unary(
      x, [lo, hi](Real v) { return std::clamp(v, lo, hi); },
      [lo, hi](Real v, Real) { return (v > lo && v < hi) ? Real(1) : Real(0); });
}

Var sigmoid(Var x) {
  return unary(
      x,
      [](Real v) {
        if (v >= 0) return Real(1) / (Real(1) + std::exp(-v));
        const Real e = std::exp(v);
        return e / (Real(1) + e);
      },
      [](Real, Real y) { return y * (Real(1) - y); });
}

Var softplus(Var x) {
  return unary(
      x,
      [](Real v) { return std::max(v, Real(0)) + std::log1p(std::exp(-std::abs(v))); },
      [](Real v, Real) {
        if (v >= 0) return Real(1) / (Real(1) + std::exp(-v));
        const Real e = std::exp(v);
        return e / (Real(1) + e);
      });
}

Var mean(Var x) {
  const Tensor& xv = x.value();
  if (xv.numel() == 0) throw DimensionError("mean of empty tensor");
  Real s = 0;
  for (Real v : xv.data()) s += v;
  const Real n = static_cast<Real>(xv.numel());
  return x.tape->record(Tensor::scalar(s / n), {x},
                        [x, n](Tape& t, const Tensor& g) {
                          Tensor& gx = t.grad_buffer(x);
                          const Real v = g[0] / n;
                          for (std::size_t i = 0; i < gx.numel(); ++i) gx[i] += v;
                        });
}

Var mse_mean(Var a, Var b) {
  require_same_shape(a.value(), b.value(), "mse_mean");
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.numel() == 0) throw DimensionError("mse_mean of empty tensors");
  Real s = 0;
  for (std::size_t i = 0; i < av.numel(); ++i) {
    const Real d = av[i] - bv[i];
    s += d * d;
  }
  const Real n = static_cast<Real>(av.numel());
  return a.tape->record(
      Tensor::scalar(s / n), {a, b}, [a, b, n](Tape& t, const Tensor& g) {
        const Tensor& av = t.value(a);
        const Tensor& bv = t.value(b);
        const Real k = Real(2) * g[0] / n;
        if (t.requires_grad(a)) {
          Tensor& ga = t.grad_buffer(a);
          for (std::size_t i = 0; i < ga.numel(); ++i) ga[i] += k * (av[i] - bv[i]);
        }
        if (t.requires_grad(b)) {
          Tensor& gb = t.grad_buffer(b);
          for (std::size_t i = 0; i < gb.numel(); ++i) gb[i] -= k * (av[i] - bv[i]);
        }
      });
}

Var cross_entropy(Var logits, std::span<const std::uint8_t> labels) {
  const Tensor& z = logits.value();
  require_rank(z, 3, "cross_entropy");
  const std::size_t C = z.dim(0), n = z.dim(1) * z.dim(2);
  if (labels.size() != n) {
    throw DimensionError("cross_entropy: " + std::to_string(labels.size()) +
                         " labels for " + std::to_string(n) + " pixels");
  }
  auto probs = std::make_shared<Tensor>(softmax_channels(z));
  auto lbl = std::make_shared<std::vector<std::uint8_t>>(labels.begin(),
                                                         labels.end());
  Real loss = 0;
  for (std::size_t p = 0; p < n; ++p) {
    if (labels[p] >= C) {
      throw DataError("cross_entropy: label " + std::to_string(labels[p]) +
                      " at pixel " + std::to_string(p) + " exceeds " +
                      std::to_string(C) + " classes");
    }
    loss -= std::log(std::max((*probs)[labels[p] * n + p], Real(1e-300)));
  }
  const Real count = static_cast<Real>(n);
  return logits.tape->record(
      Tensor::scalar(loss / count), {logits},
      [logits, probs, lbl, C, n, count](Tape& t, const Tensor& g) {
        Tensor& gz = t.grad_buffer(logits);
        const Real k = g[0] / count;
        for (std::size_t c = 0; c < C; ++c)
          for (std::size_t p = 0; p < n; ++p)
            gz[c * n + p] +=
                k * ((*probs)[c * n + p] - ((*lbl)[p] == c ? Real(1) : Real(0)));
      });
}

}  // namespace kpn
