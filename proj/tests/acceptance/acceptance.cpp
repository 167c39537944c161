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

// Acceptance suite: one PASS/FAIL line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cli.hpp"
#include "kpn/checkpoint.hpp"
#include "kpn/dataset.hpp"
#include "kpn/gaussian.hpp"
#include "kpn/gradcheck.hpp"
#include "kpn/image_io.hpp"
#include "kpn/metrics.hpp"
#include "kpn/model.hpp"
#include "kpn/noise.hpp"
#include "kpn/parallel.hpp"
#include "kpn/param_map.hpp"
#include "kpn/rng.hpp"
#include "kpn/toy_data.hpp"
#include "kpn/train_config.hpp"
#include "kpn/trainer.hpp"
#include "kpn/translate.hpp"

namespace kpn::acceptance {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

Tensor random_image(const Geometry& g, Rng& rng) {
  Tensor img({3, g.hi_h, g.hi_w});
  for (std::size_t i = 0; i < img.numel(); ++i) img[i] = static_cast<Real>(rng.uniform());
  return img;
}

LabelMap random_blocks(const Geometry& g, std::size_t n_classes, Rng& rng) {
  LabelMap l{g.hi_h, g.hi_w, std::vector<std::uint8_t>(g.hi_h * g.hi_w)};
  const std::size_t block = 16;
  std::vector<std::uint8_t> cls((g.hi_h / block + 1) * (g.hi_w / block + 1));
  for (auto& c : cls) c = static_cast<std::uint8_t>(rng.below(n_classes));
  for (std::size_t y = 0; y < g.hi_h; ++y) {
    for (std::size_t x = 0; x < g.hi_w; ++x) {
      l.data[y * g.hi_w + x] = cls[(y / block) * (g.hi_w / block + 1) + x / block];
    }
  }
  return l;
}

// Random constrained map over the whole parameter range.
ParamMap random_params(const Geometry& g, Rng& rng, SigmaBounds bounds = {}) {
  Tensor raw = identity_raw(g.lo_h, g.lo_w, bounds).tensor();
  const std::size_t n = g.lo_h * g.lo_w;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < 3; ++c) {
      raw[(kWeightBegin + c) * n + i] = static_cast<Real>(rng.uniform(0.5, 1.5));
      raw[(kBiasBegin + c) * n + i] = static_cast<Real>(rng.uniform(-0.2, 0.2));
      raw[(kSigmaBegin + c) * n + i] =
          static_cast<Real>(std::log(rng.uniform(bounds.min, bounds.max)));
      raw[(kNoiseBegin + c) * n + i] = static_cast<Real>(rng.uniform(0.0, 0.3));
    }
  }
  return constrain(RawParamMap(raw), bounds);
}

Tensor flip_x(const Tensor& t) {
  Tensor out(t.shape());
  const std::size_t c = t.dim(0), h = t.dim(1), w = t.dim(2);
  for (std::size_t k = 0; k < c; ++k) {
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        out[(k * h + y) * w + x] = t[(k * h + y) * w + (w - 1 - x)];
      }
    }
  }
  return out;
}

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// ---------------------------------------------------------------------------

Outcome identity_translation(const fs::path& work) {
  const auto t0 = Clock::now();
  const Geometry g = Geometry::full();
  const SigmaBounds bounds;
  const Model model = Model::create(Encoder::oracle(4), g, bounds, 11, 0, false);
  const NoiseField noise = model.noise_field();
  Rng rng(101, 0);
  double worst = 0;
  std::vector<Tensor> inputs;
  inputs.push_back(random_image(g, rng));
  {
    ToySceneSpec spec = ToySceneSpec::standard();
    spec.geometry = g;
    inputs.push_back(make_toy_scene(spec, ToyDomain::kSource, 0).image);
  }
  {
    // Saturated primaries, black and white.
    Tensor t({3, g.hi_h, g.hi_w});
    const std::size_t n = g.hi_h * g.hi_w;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t k = rng.below(8);
      for (std::size_t c = 0; c < 3; ++c) t[c * n + i] = static_cast<Real>((k >> c) & 1);
    }
    inputs.push_back(t);
  }
  for (const Tensor& img : inputs) {
    const LabelMap labels = random_blocks(g, 4, rng);
    const Tensor out = model.translate(img, &labels, noise, model.transform_config());
    worst = std::max(worst, max_abs_diff(out, img));
  }

  // 8-bit round trip through the command-line tool.
  const fs::path dir = work / "identity";
  fs::remove_all(dir);
  fs::create_directories(dir / "in");
  fs::create_directories(dir / "lbl");
  const Tensor img = random_image(g, rng);
  save_image(dir / "in" / "img_00000.png", img);
  save_labels(dir / "lbl" / "lbl_00000.png", random_blocks(g, 4, rng));
  save_checkpoint(dir / "identity.kpnc", model);
  std::ostringstream out, err;
  const int code = cli::run({"translate", "--ckpt", (dir / "identity.kpnc").string(), "--in",
                             (dir / "in").string(), "--labels", (dir / "lbl").string(),
                             "--out", (dir / "out").string()},
                            out, err);
  int levels = 255;
  if (code == cli::kOk) {
    const Image8 a = load_image8(dir / "in" / "img_00000.png");
    const Image8 b = load_image8(dir / "out" / "img_00000.png");
    levels = 0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
      levels = std::max(levels, std::abs(int(a.data[i]) - int(b.data[i])));
    }
  }
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = worst <= 1e-6 && levels <= 1 && secs < 10.0;
  o.detail = "max |out - in| " + fmt("%.2e", worst) + " over 3 full-size images (<= 1e-6), " +
             "8-bit path " + std::to_string(levels) + " level(s) (<= 1), " + fmt("%.2f", secs) +
             " s (< 10 s)";
  return o;
}

Outcome gradient_checks() {
  const auto t0 = Clock::now();
  GradCheckOptions opt;
  opt.seed = 0;
  opt.cases = 20;
  opt.tolerance = 1e-4;
  const std::vector<GradCheckResult> results = run_grad_checks(opt);
  const double secs = seconds_since(t0);
  bool pass = secs < 300.0;
  double worst = 0;
  std::string failed;
  for (const GradCheckResult& r : results) {
    worst = std::max(worst, r.max_rel_error);
    if (!r.passed()) {
      pass = false;
      failed += " " + r.component;
    }
  }
  Outcome o;
  o.pass = pass && !results.empty();
  o.detail = std::to_string(results.size()) + " components, max relative error " +
             fmt("%.2e", worst) + " (<= 1e-4), " + fmt("%.1f", secs) + " s (< 300 s)";
  if (!failed.empty()) o.detail += ", failed:" + failed;
  return o;
}

Outcome kernel_properties() {
  Rng rng(303, 0);
  const SigmaBounds bounds;
  double sum_err = 0, grad_sum = 0;
  std::size_t asym = 0;
  for (int t = 0; t < 100; ++t) {
    const double sigma = rng.uniform(bounds.min, bounds.max);
    const BlurKernel k = gaussian_kernel(sigma);
    double s = 0;
    for (double w : k.weights()) s += w;
    sum_err = std::max(sum_err, std::abs(s - 1.0));
    const int r = k.radius();
    for (int dy = -r; dy <= r; ++dy) {
      for (int dx = -r; dx <= r; ++dx) {
        const double v = k.at(dy, dx);
        const double images[7] = {k.at(-dy, dx), k.at(dy, -dx), k.at(-dy, -dx), k.at(dx, dy),
                                  k.at(-dx, dy), k.at(dx, -dy), k.at(-dx, -dy)};
        for (double u : images) asym += u != v;
      }
    }
    double gs = 0;
    for (double d : gaussian_kernel_sigma_grad(sigma, bounds)) gs += d;
    grad_sum = std::max(grad_sum, std::abs(gs));
  }
  Outcome o;
  o.pass = sum_err <= 1e-9 && asym == 0 && grad_sum <= 1e-9;
  o.detail = "100 sigmas: max |sum - 1| " + fmt("%.1e", sum_err) + ", " + std::to_string(asym) +
             " asymmetric taps under the 8 symmetries, max |sum d/dsigma| " +
             fmt("%.1e", grad_sum);
  return o;
}

Outcome locality_and_flip() {
  const Geometry g = Geometry::desk();
  const NoiseField noise = generate_noise_field(5, g.hi_h, g.hi_w);
  const int r = static_cast<int>(kDefaultKernelSize / 2);
  Rng rng(404, 0);
  std::size_t leaks = 0, changed = 0;
  double flip_err = 0;
  for (int t = 0; t < 50; ++t) {
    const ParamMap params = random_params(g, rng);
    Tensor img = random_image(g, rng);
    const Tensor base = translate_image(img, params, noise, g);
    const std::size_t py = rng.below(g.hi_h), px = rng.below(g.hi_w);
    const std::size_t n = g.hi_h * g.hi_w;
    for (std::size_t c = 0; c < 3; ++c) {
      Real& v = img[c * n + py * g.hi_w + px];
      v = v > 0.5 ? v - 0.4 : v + 0.4;
    }
    const Tensor moved = translate_image(img, params, noise, g);
    bool any = false;
    for (std::size_t c = 0; c < 3; ++c) {
      for (std::size_t y = 0; y < g.hi_h; ++y) {
        for (std::size_t x = 0; x < g.hi_w; ++x) {
          const std::size_t i = c * n + y * g.hi_w + x;
          if (base[i] == moved[i]) continue;
          any = true;
          const long dy = static_cast<long>(y) - static_cast<long>(py);
          const long dx = static_cast<long>(x) - static_cast<long>(px);
          if (std::abs(dy) > r || std::abs(dx) > r) ++leaks;
        }
      }
    }
    changed += any;

    if (t < 10) {
      const ParamMap fp(flip_x(params.tensor()), params.bounds());
      NoiseField fn{noise.seed, flip_x(noise.values)};
      const Tensor a = flip_x(translate_image(img, params, noise, g));
      const Tensor b = translate_image(flip_x(img), fp, fn, g);
      flip_err = std::max(flip_err, max_abs_diff(a, b));
    }
  }
  Outcome o;
  o.pass = leaks == 0 && changed > 0 && flip_err <= 1e-6;
  o.detail = "50 maps: " + std::to_string(leaks) + " changed values outside the 25x25 window (" +
             std::to_string(changed) + " perturbations visible), flip error " +
             fmt("%.2e", flip_err) + " (<= 1e-6)";
  return o;
}

Outcome segmentation_metrics() {
  Rng rng(707, 0);
  double worst = 0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 2 + rng.below(4);
    const std::size_t side = 32;
    std::vector<std::uint8_t> pred(side * side), gt(side * side);
    const bool use_ignore = t % 2 == 1;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      pred[i] = static_cast<std::uint8_t>(rng.below(n));
      gt[i] = static_cast<std::uint8_t>(rng.below(n));
      if (use_ignore && rng.below(10) == 0) gt[i] = 255;
    }
    ConfusionMatrix cm(n);
    if (use_ignore) {
      cm.accumulate(pred, gt, std::uint8_t{255});
    } else {
      cm.accumulate(pred, gt);
    }
    const SegScores s = scores(cm);

    double correct = 0, counted = 0, acc_sum = 0, iou_sum = 0;
    std::size_t acc_n = 0, iou_n = 0;
    for (std::size_t c = 0; c < n; ++c) {
      double inter = 0, uni = 0, gt_c = 0;
      for (std::size_t i = 0; i < pred.size(); ++i) {
        if (gt[i] == 255) continue;
        const bool p = pred[i] == c, q = gt[i] == c;
        inter += p && q;
        uni += p || q;
        gt_c += q;
      }
      if (gt_c > 0) {
        acc_sum += inter / gt_c;
        ++acc_n;
      }
      if (uni > 0) {
        iou_sum += inter / uni;
        ++iou_n;
      }
    }
    for (std::size_t i = 0; i < pred.size(); ++i) {
      if (gt[i] == 255) continue;
      ++counted;
      correct += pred[i] == gt[i];
    }
    worst = std::max({worst, std::abs(s.pixel_acc - correct / counted),
                      std::abs(s.class_acc - acc_sum / acc_n),
                      std::abs(s.miou - iou_sum / iou_n)});
  }
  Outcome o;
  o.pass = worst <= 1e-12;
  o.detail = "100 random 32x32 pairs, max deviation from brute force " + fmt("%.1e", worst) +
             " (<= 1e-12)";
  return o;
}

Outcome throughput() {
  const Geometry g = Geometry::full();
  Rng rng(808, 0);
  const Tensor img = random_image(g, rng);
  const ParamMap params = random_params(g, rng);
  const NoiseField noise = generate_noise_field(8, g.hi_h, g.hi_w);
  TransformConfig cfg;
  cfg.precision = Precision::kFloat32;
  std::vector<double> times;
  for (int t = 0; t < 3; ++t) {
    const auto t0 = Clock::now();
    const Tensor out = translate_image(img, params, noise, g, cfg);
    times.push_back(seconds_since(t0));
    if (out.numel() != img.numel()) times.back() = INFINITY;
  }
  std::sort(times.begin(), times.end());
  const double median = times[1];
  Outcome o;
  o.pass = median <= 10.0;
  o.detail = "720x1280 float32, median " + fmt("%.3f", median) + " s on " +
             std::to_string(num_threads()) + " thread(s) (soft target 2.0 s " +
             (median <= 2.0 ? "met" : "missed") + ", hard limit 10 s)";
  return o;
}

// ---------------------------------------------------------------------------

struct RegionError {
  double mse = 0;  // whole image
  std::vector<double> class_mse;
};

// Mean squared error of translated held-out sources against their reference
// degradations, overall and per label region.
RegionError evaluate(const Model& model, const fs::path& heldout, std::size_t n_classes) {
  const NoiseField noise = model.noise_field();
  const TransformConfig cfg = model.transform_config();
  std::vector<double> sq(n_classes, 0), count(n_classes, 0);
  double total = 0, total_n = 0;
  for (const fs::path& f : list_images(heldout, "img_")) {
    const std::string stem = f.filename().string().substr(4);
    const Tensor src = load_image(f);
    const LabelMap labels = load_labels(heldout / ("lbl_" + stem));
    const Tensor ref = load_image(heldout / ("ref_" + stem));
    const Tensor out = model.translate(src, &labels, noise, cfg);
    const std::size_t n = labels.height * labels.width;
    for (std::size_t c = 0; c < 3; ++c) {
      for (std::size_t i = 0; i < n; ++i) {
        const double d = static_cast<double>(out[c * n + i]) - static_cast<double>(ref[c * n + i]);
        const std::size_t k = labels.data[i];
        if (k < n_classes) {
          sq[k] += d * d;
          count[k] += 1;
        }
        total += d * d;
        total_n += 1;
      }
    }
  }
  RegionError e;
  e.mse = total / total_n;
  for (std::size_t k = 0; k < n_classes; ++k) {
    e.class_mse.push_back(count[k] > 0 ? sq[k] / count[k] : 0.0);
  }
  return e;
}

struct Run {
  std::string name;
  fs::path dir;
  Model model;
  double seconds = 0;
};

class TrainingCriteria {
 public:
  TrainingCriteria(fs::path work, std::size_t iterations, bool verbose)
      : work_(std::move(work)), iterations_(iterations), verbose_(verbose) {}

  void prepare() {
    const ToySceneSpec spec = ToySceneSpec::standard();
    noise_seed_ = spec.noise_seed;
    n_classes_ = spec.n_classes;
    const auto t0 = Clock::now();
    paths_ = make_toy_dataset(spec, work_ / "toy", 200, 20);
    source_ = SourceDataset::load(paths_.source);
    target_ = TargetDataset::load(paths_.target, spec.geometry.patch_h(),
                                  spec.geometry.patch_w());
    std::cerr << "toy dataset ready in " << fmt("%.1f", seconds_since(t0)) << " s\n";
  }

  const Run& run(const std::string& name, const std::function<void(TrainConfig&)>& edit) {
    auto it = runs_.find(name);
    if (it != runs_.end()) return it->second;
    TrainConfig cfg;
    cfg.iterations = iterations_;
    cfg.noise_seed = noise_seed_;
    cfg.n_classes = n_classes_;
    edit(cfg);
    cfg.validate();
    const fs::path dir = work_ / ("run_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::ofstream(dir / "config.txt") << cfg.to_text();
    const auto t0 = Clock::now();
    const TrainOutputs res = run_training(cfg, source_, target_, initial_model(cfg, source_),
                                          dir, verbose_ ? &std::cerr : nullptr);
    Run r{name, dir, load_checkpoint(res.final_checkpoint), seconds_since(t0)};
    std::cerr << "run " << name << ": " << cfg.iterations << " iterations in "
              << fmt("%.0f", r.seconds) << " s\n";
    return runs_.emplace(name, std::move(r)).first->second;
  }

  const Run& full() { return run("full", [](TrainConfig&) {}); }

  RegionError error_of(const Run& r) {
    auto it = errors_.find(r.name);
    if (it != errors_.end()) return it->second;
    const RegionError e = evaluate(r.model, paths_.heldout, n_classes_);
    errors_[r.name] = e;
    return e;
  }

  Outcome mse_reduction() {
    const Run& r = full();
    const Model identity = Model::create(Encoder::oracle(n_classes_), r.model.geometry,
                                         r.model.sigma_bounds, noise_seed_, 0, false);
    const RegionError base = evaluate(identity, paths_.heldout, n_classes_);
    const RegionError trained = error_of(r);
    const double reduction = 1.0 - trained.mse / base.mse;
    Outcome o;
    o.pass = reduction >= 0.30;
    o.detail = "held-out MSE " + fmt("%.3e", trained.mse) + " vs identity " +
               fmt("%.3e", base.mse) + ", reduction " + fmt("%.1f", 100 * reduction) +
               "% (>= 30%)";
    return o;
  }

  Outcome ablations() {
    const RegionError full_err = error_of(full());
    struct Axis {
      const char* name;
      std::size_t cls;
      std::function<void(TrainConfig&)> edit;
    };
    const Axis axes[] = {
        {"blur", 1, [](TrainConfig& c) { c.enable_blur = false; }},
        {"affine", 2, [](TrainConfig& c) { c.enable_affine = false; }},
        {"noise", 3, [](TrainConfig& c) { c.enable_noise = false; }},
    };
    Outcome o;
    o.pass = true;
    for (const Axis& a : axes) {
      const RegionError e = error_of(run(std::string("no_") + a.name, a.edit));
      const double f = full_err.class_mse[a.cls], v = e.class_mse[a.cls];
      o.pass = o.pass && f <= v;
      if (!o.detail.empty()) o.detail += "; ";
      o.detail += std::string(a.name) + " (class " + std::to_string(a.cls) + ") full " +
                  fmt("%.3e", f) + " vs ablated " + fmt("%.3e", v);
    }
    return o;
  }

  Outcome determinism() {
    const Run& a = full();
    const Run& b = run("full_repeat", [](TrainConfig&) {});
    const bool same_log = read_bytes(a.dir / "loss.csv") == read_bytes(b.dir / "loss.csv");
    const bool same_ckpt = read_bytes(a.dir / "final.kpnc") == read_bytes(b.dir / "final.kpnc");
    Outcome o;
    o.pass = same_log && same_ckpt && !read_bytes(a.dir / "loss.csv").empty();
    o.detail = std::string("two seeded runs: loss log ") + (same_log ? "identical" : "differs") +
               ", final checkpoint " + (same_ckpt ? "identical" : "differs");
    return o;
  }

 private:
  fs::path work_;
  std::size_t iterations_;
  bool verbose_;
  std::uint64_t noise_seed_ = 0;
  std::size_t n_classes_ = 4;
  ToyDatasetPaths paths_;
  SourceDataset source_;
  TargetDataset target_;
  std::map<std::string, Run> runs_;
  std::map<std::string, RegionError> errors_;
};

}  // namespace
}  // namespace kpn::acceptance

int main(int argc, char** argv) {
  using namespace kpn::acceptance;
  CLI::App app("Acceptance criteria");
  std::string work = "acceptance_work";
  std::vector<int> only;
  std::size_t iterations = 2000;
  bool verbose = false;
  app.add_option("--work", work, "Scratch directory");
  app.add_option("--only", only, "Criteria to run (repeatable, default all)");
  app.add_option("--iterations", iterations, "Training iterations (criteria 5, 6, 9)");
  app.add_flag("--verbose", verbose, "Training progress on stderr");
  CLI11_PARSE(app, argc, argv);

  const fs::path root = fs::absolute(work);
  fs::create_directories(root);
  TrainingCriteria training(root, iterations, verbose);
  bool prepared = false;
  auto trained = [&](Outcome (TrainingCriteria::*f)()) {
    if (!prepared) {
      training.prepare();
      prepared = true;
    }
    return (training.*f)();
  };

  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "identity translation", [&] { return identity_translation(root); }},
      {2, "gradient checks", gradient_checks},
      {3, "blur kernel", kernel_properties},
      {4, "locality and flip equivariance", locality_and_flip},
      {5, "held-out MSE reduction", [&] { return trained(&TrainingCriteria::mse_reduction); }},
      {6, "ablations", [&] { return trained(&TrainingCriteria::ablations); }},
      {7, "segmentation metrics", segmentation_metrics},
      {8, "throughput", throughput},
      {9, "training determinism", [&] { return trained(&TrainingCriteria::determinism); }},
  };

  if (iterations != 2000) {
    std::cout << "note: " << iterations << " training iterations instead of 2000\n";
  }
  int failures = 0;
  for (const Criterion& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("error: ") + e.what();
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << c.id << "  " << c.name << ": "
              << o.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
