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

#include "kpn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "kpn/color.hpp"
#include "kpn/gaussian.hpp"
#include "kpn/losses.hpp"
#include "kpn/networks.hpp"
#include "kpn/noise.hpp"
#include "kpn/ops.hpp"
#include "kpn/param_map.hpp"
#include "kpn/rng.hpp"
#include "kpn/translate.hpp"

namespace kpn {
namespace {

constexpr double kStep = 1e-5;
constexpr double kSigmaStep = 1e-6;
constexpr double kMinMagnitude = 1e-8;
constexpr double kCorruptFactor = 1.01;

using LossAt = std::function<double(double)>;

class Tally {
 public:
  Tally(std::string name, const GradCheckOptions& opt)
      : corrupt_(opt.corrupt == name ? kCorruptFactor : 1.0) {
    result_.component = std::move(name);
    result_.tolerance = opt.tolerance;
  }

  // `loss_at(d)` evaluates the loss with the checked entry shifted by d.
  // An entry is skipped when its one-sided slopes do not scale like a smooth
  // function's (their gap must halve with the step), which flags a kink of
  // a clamp, wrap, branch or leaky ReLU inside the stencil.
  void check(double analytic, const LossAt& loss_at, double step = kStep) {
    analytic *= corrupt_;
    const double f0 = loss_at(0.0), fp = loss_at(step), fm = loss_at(-step);
    const double fp2 = loss_at(step / 2), fm2 = loss_at(-step / 2);
    const double fwd = (fp - f0) / step, bwd = (f0 - fm) / step;
    const double gap = fwd - bwd, gap2 = 2 * (fp2 - f0) / step - 2 * (f0 - fm2) / step;
    if (std::abs(gap - 2 * gap2) > 1e-5 * (std::abs(fwd) + std::abs(bwd)) + 1e-7) {
      ++result_.skipped;
      return;
    }
    // Richardson combination of the h and h/2 central differences.
    const double c1 = (fp - fm) / (2 * step), c2 = (fp2 - fm2) / step;
    const double numeric = (4 * c2 - c1) / 3;
    const double mag = std::max(std::abs(analytic), std::abs(numeric));
    if (std::abs(analytic) + std::abs(numeric) <= kMinMagnitude) return;
    ++result_.checked;
    result_.max_rel_error =
        std::max(result_.max_rel_error, std::abs(analytic - numeric) / mag);
  }

  void end_case() { ++result_.cases; }
  const GradCheckResult& result() const { return result_; }

 private:
  double corrupt_;
  GradCheckResult result_;
};

// Evaluates f() with t[i] shifted by d, restoring it afterwards.
double shifted(Tensor& t, std::size_t i, double d, const std::function<double()>& f) {
  const Real saved = t[i];
  t[i] = static_cast<Real>(saved + d);
  const double v = f();
  t[i] = saved;
  return v;
}

Tensor random_tensor(Shape shape, double lo, double hi, Rng& rng) {
  Tensor t(std::move(shape));
  for (std::size_t i = 0; i < t.numel(); ++i) t[i] = static_cast<Real>(rng.uniform(lo, hi));
  return t;
}


// dot(r, y - y0), differenced per element so that unchanged outputs cancel
// exactly instead of leaving summation round-off in the quotient.
double dot_delta(const Tensor& r, const Tensor& y, const Tensor& y0) {
  double s = 0;
  for (std::size_t i = 0; i < r.numel(); ++i) {
    s += static_cast<double>(r[i]) * (static_cast<double>(y[i]) - y0[i]);
  }
  return s;
}

bool distinct_channels(const Pixel<double>& p, double gap) {
  return std::abs(p[0] - p[1]) >= gap && std::abs(p[1] - p[2]) >= gap &&
         std::abs(p[0] - p[2]) >= gap;
}

// Fraction of the hue sector, kept away from the piecewise boundaries.
bool away_from_sector_edge(double h, double margin) {
  double h6 = (h - std::floor(h)) * 6.0;
  const double f = h6 - std::floor(h6);
  return f > margin && f < 1.0 - margin;
}

// RGB pixel with distinct channels, drawn through HSV.
Pixel<double> random_pixel(Rng& rng, double s_lo, double s_hi, double v_lo,
                           double v_hi) {
  for (;;) {
    const Pixel<double> rgb = hsv_to_rgb(Pixel<double>{
        rng.uniform(), rng.uniform(s_lo, s_hi), rng.uniform(v_lo, v_hi)});
    if (distinct_channels(rgb, 1e-3)) return rgb;
  }
}

Tensor random_image(std::size_t h, std::size_t w, Rng& rng) {
  Tensor t({3, h, w});
  const std::size_t n = h * w;
  for (std::size_t p = 0; p < n; ++p) {
    const Pixel<double> px = random_pixel(rng, 0.3, 0.7, 0.3, 0.7);
    for (std::size_t c = 0; c < 3; ++c) t[c * n + p] = static_cast<Real>(px[c]);
  }
  return t;
}

// Weights with unit-scale activations so that every gradient is well above
// finite-difference round-off.
void kaiming_params(ParamList& params, Rng& rng) {
  for (NamedTensor& p : params) {
    if (p.value.rank() == 4) {
      const std::size_t fan_in = p.value.dim(1) * p.value.dim(2) * p.value.dim(3);
      p.value = uniform_tensor(p.value.shape(), std::sqrt(6.0 / fan_in), rng.next(), 0);
    } else {
      p.value = random_tensor(p.value.shape(), -0.1, 0.1, rng);
    }
  }
}

std::vector<std::size_t> pick(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<std::size_t> out;
  if (k >= n) {
    for (std::size_t i = 0; i < n; ++i) out.push_back(i);
    return out;
  }
  for (std::size_t i = 0; i < k; ++i) out.push_back(rng.below(n));
  return out;
}

// ---------------------------------------------------------------------------

GradCheckResult check_translate(const GradCheckOptions& opt) {
  Tally tally("translate", opt);
  Rng rng(opt.seed, 1);
  const std::size_t s = opt.size, n = s * s;
  TransformConfig cfg;
  for (std::size_t k = 0; k < opt.cases; ++k) {
    cfg.padding = k % 2 ? Padding::kReflect : Padding::kZero;
    Tensor rgb = random_image(s, s, rng);
    const Tensor hsv = rgb_to_hsv(rgb);
    Tensor params({kParamChannels, s, s});
    for (std::size_t p = 0; p < n; ++p) {
      // Hue affine chosen so the result stays off the sector boundaries.
      for (;;) {
        const double w = rng.uniform(0.9, 1.1), b = rng.uniform(-0.2, 0.2);
        if (away_from_sector_edge(w * hsv[p] + b, 1e-3)) {
          params[kWeightH * n + p] = static_cast<Real>(w);
          params[kBiasH * n + p] = static_cast<Real>(b);
          break;
        }
      }
      for (std::size_t c = 1; c < 3; ++c) {
        params[(kWeightBegin + c) * n + p] = static_cast<Real>(rng.uniform(0.9, 1.1));
        params[(kBiasBegin + c) * n + p] = static_cast<Real>(rng.uniform(-0.05, 0.05));
      }
      for (std::size_t c = 0; c < 3; ++c) {
        params[(kSigmaBegin + c) * n + p] = static_cast<Real>(rng.uniform(0.3, 3.0));
        params[(kNoiseBegin + c) * n + p] = static_cast<Real>(rng.uniform(0.0, 0.1));
      }
    }
    const Tensor noise = random_tensor({3, s, s}, 0.0, 1.0, rng);
    const Tensor weights = random_tensor({3, s, s}, -1.0, 1.0, rng);
    const PatchGrads g =
        translate_patch_backward(rgb, params, noise, weights, cfg, true);
    const Tensor base = translate_patch(rgb, params, noise, cfg);
    auto loss = [&] {
      return dot_delta(weights, translate_patch(rgb, params, noise, cfg), base);
    };
    for (std::size_t c = 0; c < kParamChannels; ++c) {
      for (std::size_t i = 0; i < 4; ++i) {
        const std::size_t e = c * n + rng.below(n);
        tally.check(g.params[e],
                    [&](double d) { return shifted(params, e, d, loss); });
      }
    }
    for (std::size_t e : pick(rgb.numel(), 12, rng)) {
      tally.check(g.input[e], [&](double d) { return shifted(rgb, e, d, loss); });
    }
    tally.end_case();
  }
  return tally.result();
}

GradCheckResult check_gaussian_sigma(const GradCheckOptions& opt) {
  Tally tally("gaussian_sigma", opt);
  Rng rng(opt.seed, 2);
  const SigmaBounds bounds;
  for (std::size_t k = 0; k < opt.cases; ++k) {
    const double sigma = rng.uniform(0.3, 7.5);
    const auto grad = gaussian_kernel_sigma_grad(sigma, bounds);
    for (std::size_t e = 0; e < grad.size(); ++e) {
      tally.check(grad[e],
                  [&](double d) { return gaussian_kernel(sigma + d).weights()[e]; },
                  kSigmaStep);
    }
    tally.end_case();
  }
  return tally.result();
}

GradCheckResult check_rgb_to_hsv(const GradCheckOptions& opt) {
  Tally tally("rgb_to_hsv", opt);
  Rng rng(opt.seed, 3);
  for (std::size_t k = 0; k < opt.cases; ++k) {
    for (std::size_t p = 0; p < opt.size * opt.size; ++p) {
      Pixel<double> rgb = random_pixel(rng, 0.05, 0.95, 0.05, 0.95);
      const Pixel<double> r{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
      const Pixel<double> g = rgb_to_hsv_backward(rgb, r);
      for (int c = 0; c < 3; ++c) {
        tally.check(g[c], [&](double d) {
          Pixel<double> q = rgb;
          q[c] += d;
          const Pixel<double> h = rgb_to_hsv(q);
          return r[0] * h[0] + r[1] * h[1] + r[2] * h[2];
        });
      }
    }
    tally.end_case();
  }
  return tally.result();
}

GradCheckResult check_hsv_to_rgb(const GradCheckOptions& opt) {
  Tally tally("hsv_to_rgb", opt);
  Rng rng(opt.seed, 4);
  for (std::size_t k = 0; k < opt.cases; ++k) {
    for (std::size_t p = 0; p < opt.size * opt.size; ++p) {
      double h;
      do {
        h = rng.uniform();
      } while (!away_from_sector_edge(h, 1e-3));
      const Pixel<double> hsv{h, rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95)};
      const Pixel<double> r{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
      const Pixel<double> g = hsv_to_rgb_backward(hsv, r);
      for (int c = 0; c < 3; ++c) {
        tally.check(g[c], [&](double d) {
          Pixel<double> q = hsv;
          q[c] += d;
          const Pixel<double> o = hsv_to_rgb(q);
          return r[0] * o[0] + r[1] * o[1] + r[2] * o[2];
        });
      }
    }
    tally.end_case();
  }
  return tally.result();
}

GradCheckResult check_conv2d(const GradCheckOptions& opt) {
  Tally tally("conv2d", opt);
  Rng rng(opt.seed, 5);
  for (std::size_t k = 0; k < opt.cases; ++k) {
    const std::size_t stride = 1 + k % 2, pad = (k / 2) % 2;
    Tensor x = random_tensor({2, opt.size / 2, opt.size / 2}, -1, 1, rng);
    Tensor w = random_tensor({3, 2, 3, 3}, -1, 1, rng);
    Tensor b = random_tensor({3}, -1, 1, rng);
    const Tensor y = conv2d_forward(x, w, b, stride, pad);
    const Tensor r = random_tensor(y.shape(), -1, 1, rng);
    const Conv2dGrads g = conv2d_backward(r, x, w, stride, pad);
    auto loss = [&] { return dot_delta(r, conv2d_forward(x, w, b, stride, pad), y); };
    for (std::size_t e = 0; e < w.numel(); ++e)
      tally.check(g.weight[e], [&](double d) { return shifted(w, e, d, loss); });
    for (std::size_t e = 0; e < b.numel(); ++e)
      tally.check(g.bias[e], [&](double d) { return shifted(b, e, d, loss); });
    for (std::size_t e : pick(x.numel(), 24, rng))
      tally.check(g.input[e], [&](double d) { return shifted(x, e, d, loss); });
    tally.end_case();
  }
  return tally.result();
}

// Gradient check of a scalar tape function with respect to parameter lists
// and an optional input tensor.
void check_network(Tally& tally, std::vector<ParamList*> lists, Tensor* input,
                   const std::function<Var(Tape&, Var, const std::vector<std::vector<Var>>&)>& build,
                   std::size_t per_tensor, std::size_t input_entries, Rng& rng) {
  auto evaluate = [&](bool grads, std::vector<std::vector<Tensor>>* out,
                      Tensor* gin) {
    Tape tape;
    std::vector<std::vector<Var>> vars;
    for (ParamList* l : lists) vars.push_back(bind_params(tape, *l, grads));
    Var x = input ? tape.leaf(*input, grads) : Var{};
    Var loss = build(tape, x, vars);
    const double v = loss.value().item();
    if (grads) {
      tape.backward(loss);
      for (const auto& vs : vars) {
        out->emplace_back();
        for (const Var& var : vs) out->back().push_back(tape.grad(var));
      }
      if (gin) *gin = tape.grad(x);
    }
    return v;
  };
  std::vector<std::vector<Tensor>> grads;
  Tensor gin;
  evaluate(true, &grads, input ? &gin : nullptr);
  auto loss = [&] { return evaluate(false, nullptr, nullptr); };
  for (std::size_t l = 0; l < lists.size(); ++l) {
    for (std::size_t t = 0; t < lists[l]->size(); ++t) {
      Tensor& value = (*lists[l])[t].value;
      for (std::size_t e : pick(value.numel(), per_tensor, rng)) {
        tally.check(grads[l][t][e],
                    [&](double d) { return shifted(value, e, d, loss); });
      }
    }
  }
  if (input) {
    for (std::size_t e : pick(input->numel(), input_entries, rng)) {
      tally.check(gin[e], [&](double d) { return shifted(*input, e, d, loss); });
    }
  }
}

Var weighted_mean(Var x, const Tensor& r) {
  return mean(mul(x, x.tape->constant(r)));
}

GradCheckResult check_kpn(const GradCheckOptions& opt) {
  Tally tally("kpn", opt);
  Rng rng(opt.seed, 6);
  for (std::size_t k = 0; k < opt.cases; ++k) {
    Kpn kpn = Kpn::identity(4);
    for (NamedTensor& p : kpn.params())
      p.value = random_tensor(p.value.shape(), -0.5, 0.5, rng);
    Tensor feats = softmax_channels(random_tensor({4, opt.size, opt.size}, -2, 2, rng));
    const Tensor r = random_tensor({kParamChannels, opt.size, opt.size}, -1, 1, rng);
    check_network(
        tally, {&kpn.params()}, &feats,
        [&](Tape&, Var x, const std::vector<std::vector<Var>>& v) {
          return weighted_mean(kpn.forward(x, v[0]), r);
        },
        24, 24, rng);
    tally.end_case();
  }
  return tally.result();
}

GradCheckResult check_encoder(const GradCheckOptions& opt) {
  Tally tally("encoder", opt);
  Rng rng(opt.seed, 7);
  for (std::size_t k = 0; k < opt.cases; ++k) {
    Encoder enc = Encoder::tiny_conv(4, rng.next());
    Tensor img = random_tensor({3, opt.size, opt.size}, 0, 1, rng);
    const Tensor r = random_tensor({4, opt.size, opt.size}, -1, 1, rng);
    check_network(
        tally, {&enc.params()}, &img,
        [&](Tape&, Var x, const std::vector<std::vector<Var>>& v) {
          return weighted_mean(enc.logits(x, v[0]), r);
        },
        6, 12, rng);
    tally.end_case();
  }
  return tally.result();
}

GradCheckResult check_discriminator(const GradCheckOptions& opt) {
  Tally tally("discriminator", opt);
  Rng rng(opt.seed, 8);
  for (std::size_t k = 0; k < opt.cases; ++k) {
    Discriminator disc = Discriminator::init(0);
    kaiming_params(disc.params(), rng);
    Tensor img = random_tensor({3, opt.size, opt.size}, 0, 1, rng);
    const Shape out = disc.forward(img).shape();
    const Tensor r = random_tensor(out, -1, 1, rng);
    check_network(
        tally, {&disc.params()}, &img,
        [&](Tape&, Var x, const std::vector<std::vector<Var>>& v) {
          return weighted_mean(disc.forward(x, v[0]), r);
        },
        8, 16, rng);
    tally.end_case();
  }
  return tally.result();
}

GradCheckResult check_disc_loss(const GradCheckOptions& opt) {
  Tally tally("disc_loss", opt);
  Rng rng(opt.seed, 9);
  for (std::size_t k = 0; k < opt.cases; ++k) {
    // With respect to the logit maps.
    Tensor logits[4];
    for (Tensor& l : logits) l = random_tensor({1, 2, 2}, -2, 2, rng);
    auto loss_of = [&](Tape& tape, bool grads, Var* leaves) {
      for (int i = 0; i < 4; ++i) leaves[i] = tape.leaf(logits[i], grads);
      return disc_loss(discriminator_probability(leaves[0]),
                       discriminator_probability(leaves[1]),
                       discriminator_probability(leaves[2]),
                       discriminator_probability(leaves[3]))
          .total;
    };
    Tape tape;
    Var leaves[4];
    Var total = loss_of(tape, true, leaves);
    tape.backward(total);
    for (int i = 0; i < 4; ++i) {
      const Tensor g = tape.grad(leaves[i]);
      for (std::size_t e = 0; e < g.numel(); ++e) {
        tally.check(g[e], [&](double d) {
          return shifted(logits[i], e, d, [&] {
            Tape t2;
            Var l2[4];
            return loss_of(t2, false, l2).value().item();
          });
        });
      }
    }
    // With respect to the discriminator weights.
    Discriminator disc = Discriminator::init(0);
    kaiming_params(disc.params(), rng);
    Tensor images[4];
    for (Tensor& im : images) im = random_tensor({3, opt.size, opt.size}, 0, 1, rng);
    check_network(
        tally, {&disc.params()}, nullptr,
        [&](Tape& t, Var, const std::vector<std::vector<Var>>& v) {
          Var d[4];
          for (int i = 0; i < 4; ++i)
            d[i] = discriminator_probability(disc.forward(t.constant(images[i]), v[0]));
          return disc_loss(d[0], d[1], d[2], d[3]).total;
        },
        6, 0, rng);
    tally.end_case();
  }
  return tally.result();
}

GradCheckResult check_gen_loss(const GradCheckOptions& opt) {
  Tally tally("gen_loss", opt);
  Rng rng(opt.seed, 10);
  const std::size_t s = opt.size;
  const Geometry geo{2 * s, 2 * s, s, s, 2};
  TransformConfig cfg;
  for (std::size_t k = 0; k < opt.cases; ++k) {
    Kpn kpn = Kpn::identity(4);
    Tensor& weight = kpn.params()[0].value;
    weight = random_tensor(weight.shape(), -0.01, 0.01, rng);
    // Hue rows carry no spatial variation, so the transformed hue of every
    // pixel is known and can be kept away from the sector boundaries.
    const std::size_t row = weight.numel() / kParamChannels;
    for (std::size_t ch : {kWeightH, kBiasH})
      std::fill_n(weight.ptr() + ch * row, row, Real(0));
    Tensor& bias = kpn.params()[1].value;
    for (std::size_t c = 0; c < 3; ++c) {
      bias[kWeightBegin + c] = static_cast<Real>(rng.uniform(0.9, 1.1));
      bias[kBiasBegin + c] = static_cast<Real>(rng.uniform(-0.05, 0.05));
      bias[kSigmaBegin + c] = static_cast<Real>(std::log(rng.uniform(0.5, 2.0)));
      bias[kNoiseBegin + c] = static_cast<Real>(rng.uniform(0.0, 0.1));
    }
    bias[kBiasH] = static_cast<Real>(rng.uniform(-0.2, 0.2));
    const double w_h = bias[kWeightH], b_h = bias[kBiasH];
    Discriminator disc = Discriminator::init(0);
    kaiming_params(disc.params(), rng);
    const Tensor feats = softmax_channels(random_tensor({4, s, s}, -2, 2, rng));
    Tensor src({3, 2 * s, 2 * s});
    const std::size_t np = 4 * s * s;
    for (std::size_t p = 0; p < np; ++p) {
      for (;;) {
        const Pixel<double> px = random_pixel(rng, 0.3, 0.7, 0.3, 0.7);
        if (!away_from_sector_edge(w_h * rgb_to_hsv(px)[0] + b_h, 0.02)) continue;
        for (std::size_t c = 0; c < 3; ++c) src[c * np + p] = static_cast<Real>(px[c]);
        break;
      }
    }
    const NoiseField noise = generate_noise_field(rng.next(), 2 * s, 2 * s);
    const std::size_t cy = rng.below(2), cx = rng.below(2);
    check_network(
        tally, {&kpn.params()}, nullptr,
        [&](Tape& t, Var, const std::vector<std::vector<Var>>& v) {
          Var raw = kpn.forward(t.constant(feats), v[0]);
          Var out = translate_image(t.constant(src), constrain(raw), noise, geo, cfg);
          Var p_t = crop(out, cy * s, cx * s, s, s);
          Var p_s = t.constant(crop_chw(src, cy * s, cx * s, s, s));
          Var i_t = bilinear_resize(out, s, s);
          const auto dv = bind_params(t, disc.params(), false);
          return gen_loss(discriminator_probability(disc.forward(p_t, dv)),
                          discriminator_probability(disc.forward(i_t, dv)), p_t, p_s)
              .total;
        },
        40, 0, rng);
    tally.end_case();
  }
  return tally.result();
}

struct Entry {
  const char* name;
  GradCheckResult (*fn)(const GradCheckOptions&);
};

constexpr Entry kChecks[] = {
    {"translate", check_translate},   {"gaussian_sigma", check_gaussian_sigma},
    {"rgb_to_hsv", check_rgb_to_hsv}, {"hsv_to_rgb", check_hsv_to_rgb},
    {"conv2d", check_conv2d},         {"kpn", check_kpn},
    {"encoder", check_encoder},       {"discriminator", check_discriminator},
    {"disc_loss", check_disc_loss},   {"gen_loss", check_gen_loss},
};

}  // namespace

std::vector<std::string> grad_check_components() {
  std::vector<std::string> out;
  for (const Entry& e : kChecks) out.push_back(e.name);
  return out;
}

GradCheckResult run_grad_check(const std::string& component,
                               const GradCheckOptions& options) {
  for (const Entry& e : kChecks)
    if (component == e.name) return e.fn(options);
  throw ConfigError("unknown grad-check component '" + component + "'");
}

std::vector<GradCheckResult> run_grad_checks(const GradCheckOptions& options) {
  std::vector<GradCheckResult> out;
  for (const Entry& e : kChecks) out.push_back(e.fn(options));
  return out;
}

}  // namespace kpn
