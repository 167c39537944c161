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

#include "kpn/toy_data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "kpn/color.hpp"
#include "kpn/ops.hpp"
#include "kpn/parallel.hpp"
#include "kpn/rng.hpp"

namespace kpn {
namespace {

// Hue centers of the three shape classes: red, green, blue.
constexpr double kClassHue[4] = {0.0, 0.0, 0.33, 0.62};

void paint_background(Rng& rng, Tensor& img) {
  const std::size_t H = img.dim(1), W = img.dim(2), n = H * W;
  const double gray = rng.uniform(0.4, 0.6);
  double tint[3];
  for (double& t : tint) t = rng.uniform(-0.03, 0.03);
  struct Wave {
    double fy, fx, phase, amp;
  } waves[3];
  for (Wave& w : waves) {
    const double angle = rng.uniform(0, std::numbers::pi);
    const double freq = rng.uniform(0.02, 0.12);
    w = {freq * std::sin(angle), freq * std::cos(angle),
         rng.uniform(0, 2 * std::numbers::pi), rng.uniform(0.02, 0.05)};
  }
  const std::uint64_t grain_key = rng.next();
  for (std::size_t y = 0; y < H; ++y) {
    for (std::size_t x = 0; x < W; ++x) {
      double v = gray;
      for (const Wave& w : waves) v += w.amp * std::sin(w.fy * y + w.fx * x + w.phase);
      const std::size_t p = y * W + x;
      const double grain =
          (static_cast<double>(mix64(grain_key, p) >> 11) * 0x1.0p-53 - 0.5) * 0.04;
      for (std::size_t c = 0; c < 3; ++c)
        img[c * n + p] = static_cast<Real>(std::clamp(v + tint[c] + grain, 0.0, 1.0));
    }
  }
}

}  // namespace

ClassDegradation ClassDegradation::identity(SigmaBounds bounds) {
  ClassDegradation d;
  for (Real& s : d.sigma) s = static_cast<Real>(bounds.min);
  return d;
}

ToySceneSpec ToySceneSpec::identity() {
  ToySceneSpec spec;
  spec.degradation.assign(spec.n_classes, ClassDegradation::identity(spec.sigma_bounds));
  return spec;
}

ToySceneSpec ToySceneSpec::standard() {
  ToySceneSpec spec = identity();
  for (Real& s : spec.degradation[1].sigma) s = Real(1.5);
  spec.degradation[2].weight[2] = Real(0.8);
  for (Real& n : spec.degradation[3].noise) n = Real(0.3);
  return spec;
}

void ToySceneSpec::validate() const {
  geometry.validate();
  if (n_classes < 1 || n_classes > 4) {
    throw ConfigError("toy scenes support 1 to 4 classes");
  }
  if (degradation.size() != n_classes) {
    throw ConfigError("toy spec: " + std::to_string(degradation.size()) +
                      " class degradations for " + std::to_string(n_classes) +
                      " classes");
  }
  if (min_shapes > max_shapes) throw ConfigError("toy spec: min_shapes > max_shapes");
  for (std::size_t k = 0; k < n_classes; ++k) {
    for (Real s : degradation[k].sigma) {
      if (!(s >= sigma_bounds.min && s <= sigma_bounds.max)) {
        throw ConfigError("toy spec: class " + std::to_string(k) + " sigma " +
                          std::to_string(s) + " outside the sigma bounds");
      }
    }
  }
}

ToyScene make_toy_scene(const ToySceneSpec& spec, ToyDomain domain,
                        std::size_t index) {
  const std::size_t H = spec.geometry.hi_h, W = spec.geometry.hi_w, n = H * W;
  Rng rng(mix64(spec.seed, static_cast<std::uint64_t>(domain)), index);
  ToyScene scene{Tensor({3, H, W}), LabelMap{H, W, std::vector<std::uint8_t>(n, 0)}};
  paint_background(rng, scene.image);
  if (spec.n_classes < 2) return scene;

  const std::size_t count =
      spec.min_shapes + rng.below(spec.max_shapes - spec.min_shapes + 1);
  for (std::size_t s = 0; s < count; ++s) {
    const std::size_t cls = 1 + rng.below(spec.n_classes - 1);
    const bool ellipse = cls == 2 || (cls == 3 && rng.uniform() < 0.5);
    const double hh = rng.uniform(0.06, 0.18) * H;
    const double hw = rng.uniform(0.05, 0.15) * W;
    const double cy = rng.uniform(0, H), cx = rng.uniform(0, W);
    double hue = kClassHue[cls] + rng.uniform(-0.04, 0.04);
    hue -= std::floor(hue);
    const Pixel<double> rgb = hsv_to_rgb(
        Pixel<double>{hue, rng.uniform(0.45, 0.75), rng.uniform(0.45, 0.65)});
    const std::size_t y0 = static_cast<std::size_t>(std::max(0.0, std::floor(cy - hh)));
    const std::size_t y1 = static_cast<std::size_t>(std::min<double>(H, std::ceil(cy + hh)));
    const std::size_t x0 = static_cast<std::size_t>(std::max(0.0, std::floor(cx - hw)));
    const std::size_t x1 = static_cast<std::size_t>(std::min<double>(W, std::ceil(cx + hw)));
    for (std::size_t y = y0; y < y1; ++y) {
      for (std::size_t x = x0; x < x1; ++x) {
        const double dy = (y + 0.5 - cy) / hh, dx = (x + 0.5 - cx) / hw;
        const bool inside = ellipse ? dy * dy + dx * dx <= 1.0
                                    : std::abs(dy) <= 1.0 && std::abs(dx) <= 1.0;
        if (!inside) continue;
        const std::size_t p = y * W + x;
        scene.labels.data[p] = static_cast<std::uint8_t>(cls);
        for (std::size_t c = 0; c < 3; ++c) scene.image[c * n + p] = static_cast<Real>(rgb[c]);
      }
    }
  }
  return scene;
}

ParamMap degradation_params(const LabelMap& labels, const ToySceneSpec& spec) {
  spec.validate();
  const std::size_t h = spec.geometry.lo_h, w = spec.geometry.lo_w, n = h * w;
  const auto small = resize_labels_nearest(labels.data, labels.height,
                                           labels.width, h, w);
  Tensor t({kParamChannels, h, w});
  for (std::size_t p = 0; p < n; ++p) {
    if (small[p] >= spec.n_classes) {
      throw ConfigError("toy spec has no parameters for class " +
                        std::to_string(small[p]));
    }
    const ClassDegradation& d = spec.degradation[small[p]];
    for (std::size_t c = 0; c < 3; ++c) {
      t[(kWeightBegin + c) * n + p] = d.weight[c];
      t[(kBiasBegin + c) * n + p] = d.bias[c];
      t[(kSigmaBegin + c) * n + p] = d.sigma[c];
      t[(kNoiseBegin + c) * n + p] = d.noise[c];
    }
  }
  return ParamMap(std::move(t), spec.sigma_bounds);
}

Tensor reference_degrade(const Tensor& image, const LabelMap& labels,
                         const ToySceneSpec& spec, const NoiseField& noise,
                         const TransformConfig& cfg) {
  TransformConfig c = cfg;
  c.sigma_bounds = spec.sigma_bounds;
  return translate_image(image, degradation_params(labels, spec), noise,
                         spec.geometry, c);
}

std::string numbered_name(const char* stem, std::size_t index) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%05zu.png", stem, index);
  return buf;
}

ToyDatasetPaths toy_dataset_paths(const std::filesystem::path& root) {
  return {root / "src", root / "tgt", root / "eval", root / "toy.txt"};
}

ToyDatasetPaths make_toy_dataset(const ToySceneSpec& spec,
                                 const std::filesystem::path& root,
                                 std::size_t count, std::size_t heldout) {
  spec.validate();
  if (count == 0) throw ConfigError("toy dataset count must be at least 1");
  const ToyDatasetPaths paths = toy_dataset_paths(root);
  std::error_code ec;
  for (const auto& dir : {paths.source, paths.target, paths.heldout}) {
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  }
  const NoiseField noise = generate_noise_field(
      spec.noise_seed, spec.geometry.hi_h, spec.geometry.hi_w);
  TransformConfig cfg;
  cfg.sigma_bounds = spec.sigma_bounds;

  parallel_for(count, [&](std::size_t i) {
    const ToyScene src = make_toy_scene(spec, ToyDomain::kSource, i);
    save_image(paths.source / numbered_name("img", i), src.image);
    save_labels(paths.source / numbered_name("lbl", i), src.labels);
    const ToyScene tgt = make_toy_scene(spec, ToyDomain::kTarget, i);
    save_image(paths.target / numbered_name("img", i),
               reference_degrade(tgt.image, tgt.labels, spec, noise, cfg));
  });
  parallel_for(heldout, [&](std::size_t i) {
    const ToyScene ev = make_toy_scene(spec, ToyDomain::kHeldOut, i);
    save_image(paths.heldout / numbered_name("img", i), ev.image);
    save_labels(paths.heldout / numbered_name("lbl", i), ev.labels);
    save_image(paths.heldout / numbered_name("ref", i),
               reference_degrade(ev.image, ev.labels, spec, noise, cfg));
  });

  std::ofstream meta(paths.meta);
  if (!meta) throw IoError("cannot write " + paths.meta.string());
  const Geometry& g = spec.geometry;
  meta << "seed = " << spec.seed << "\n"
       << "noise_seed = " << spec.noise_seed << "\n"
       << "hi_height = " << g.hi_h << "\nhi_width = " << g.hi_w << "\n"
       << "lo_height = " << g.lo_h << "\nlo_width = " << g.lo_w << "\n"
       << "grid = " << g.grid << "\n"
       << "n_classes = " << spec.n_classes << "\n"
       << "count = " << count << "\nheldout = " << heldout << "\n";
  for (std::size_t k = 0; k < spec.n_classes; ++k) {
    const ClassDegradation& d = spec.degradation[k];
    auto triple = [&](const char* key, const Real* v) {
      meta << "class" << k << "." << key << " = " << v[0] << " " << v[1] << " "
           << v[2] << "\n";
    };
    triple("weight", d.weight);
    triple("bias", d.bias);
    triple("sigma", d.sigma);
    triple("noise", d.noise);
  }
  return paths;
}

}  // namespace kpn
