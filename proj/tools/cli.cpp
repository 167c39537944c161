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

#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "kpn/checkpoint.hpp"
#include "kpn/dataset.hpp"
#include "kpn/gradcheck.hpp"
#include "kpn/image_io.hpp"
#include "kpn/metrics.hpp"
#include "kpn/model.hpp"
#include "kpn/noise.hpp"
#include "kpn/ops.hpp"
#include "kpn/parallel.hpp"
#include "kpn/rng.hpp"
#include "kpn/toy_data.hpp"
#include "kpn/train_config.hpp"
#include "kpn/trainer.hpp"
#include "kpn/translate.hpp"

namespace kpn::cli {
namespace fs = std::filesystem;
namespace {

// Thrown for conditions that must map to the data/geometry exit code even
// though the library reports them as configuration problems.
class GeometryMismatch : public Error {
 public:
  using Error::Error;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

void require_dir(const fs::path& dir, const char* what) {
  if (!fs::is_directory(dir)) {
    throw ConfigError(std::string(what) + " directory '" + dir.string() +
                      "' does not exist");
  }
}

std::vector<fs::path> png_files(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".png") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Input images of a directory: the img_*.png files when there are any (toy
// layouts keep labels alongside), otherwise every PNG.
std::vector<fs::path> input_images(const fs::path& dir) {
  std::vector<fs::path> all = png_files(dir), img;
  for (const fs::path& p : all)
    if (p.filename().string().rfind("img_", 0) == 0) img.push_back(p);
  return img.empty() ? all : img;
}

// Label file for an input image: the same file name, or img_ replaced by lbl_.
fs::path label_path(const fs::path& labels_dir, const fs::path& image) {
  const std::string name = image.filename().string();
  fs::path same = labels_dir / name;
  if (fs::exists(same) && !fs::equivalent(same, image)) return same;
  if (name.rfind("img_", 0) == 0) {
    fs::path alt = labels_dir / ("lbl_" + name.substr(4));
    if (fs::exists(alt)) return alt;
  }
  throw DataError("no label file for " + image.string() + " in " +
                  labels_dir.string());
}

std::string dims(std::size_t h, std::size_t w) {
  return std::to_string(h) + "x" + std::to_string(w);
}

// ---------------------------------------------------------------------------

struct ToyArgs {
  std::string out;
  std::size_t count = 200;
  std::size_t heldout = 20;
  std::uint64_t seed = 1;
  std::uint64_t noise_seed = 2;
  std::string geometry = "desk";
  bool identity = false;
};

int make_toy_data(const ToyArgs& a, std::ostream& out) {
  ToySceneSpec spec = a.identity ? ToySceneSpec::identity() : ToySceneSpec::standard();
  if (a.geometry == "full") {
    spec.geometry = Geometry::full();
  } else if (a.geometry != "desk") {
    throw ConfigError("unknown geometry '" + a.geometry + "' (desk or full)");
  }
  spec.seed = a.seed;
  spec.noise_seed = a.noise_seed;
  const ToyDatasetPaths p = make_toy_dataset(spec, a.out, a.count, a.heldout);
  out << "source:  " << p.source.string() << " (" << a.count << " images)\n"
      << "target:  " << p.target.string() << " (" << a.count << " images)\n"
      << "heldout: " << p.heldout.string() << " (" << a.heldout << " images)\n";
  return kOk;
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  std::string config;
  std::string source;
  std::string target;
  std::string out;
  std::vector<std::string> overrides;
  bool quiet = false;
};

// noise_seed from a toy dataset description next to the source directory.
bool toy_noise_seed(const fs::path& source, std::uint64_t* seed) {
  const fs::path meta = fs::absolute(source).lexically_normal().parent_path() / "toy.txt";
  if (!fs::exists(meta)) return false;
  std::ifstream in(meta);
  std::stringstream ss;
  ss << in.rdbuf();
  for (const KeyValueLine& kv : parse_key_values(ss.str())) {
    if (kv.key == "noise_seed") {
      *seed = std::stoull(kv.value);
      return true;
    }
  }
  return false;
}

int train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  require_dir(a.source, "source");
  require_dir(a.target, "target");
  std::string text;
  if (!a.config.empty()) {
    std::ifstream in(a.config);
    if (!in) throw ConfigError("cannot read config '" + a.config + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  TrainConfig cfg = TrainConfig::parse(text);
  bool seed_given = false;
  for (const KeyValueLine& kv : parse_key_values(text)) seed_given |= kv.key == "noise_seed";
  for (const std::string& o : a.overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + o + "' is not key=value");
    const auto kv = parse_key_values(o);
    if (kv.empty()) throw ConfigError("override '" + o + "' is empty");
    cfg.set(kv[0].key, kv[0].value);
    seed_given |= kv[0].key == "noise_seed";
  }
  std::uint64_t toy_seed = 0;
  if (!seed_given && toy_noise_seed(a.source, &toy_seed)) {
    cfg.noise_seed = toy_seed;
    out << "noise_seed " << toy_seed << " taken from the toy dataset description\n";
  }
  cfg.validate();

  const SourceDataset source = SourceDataset::load(a.source);
  const TargetDataset target =
      TargetDataset::load(a.target, cfg.geometry.patch_h(), cfg.geometry.patch_w());
  if (source.samples.empty()) throw DataError("no source images in " + a.source);
  if (target.images.empty()) throw DataError("no usable target images in " + a.target);
  out << source.samples.size() << " source / " << target.images.size()
      << " target images, " << cfg.iterations << " iterations\n";

  fs::create_directories(a.out);
  {
    std::ofstream c(fs::path(a.out) / "config.txt");
    c << cfg.to_text();
  }
  Model initial = initial_model(cfg, source);
  const TrainOutputs res =
      run_training(cfg, source, target, std::move(initial), a.out, a.quiet ? nullptr : &out);
  (void)err;
  out << "loss log:   " << res.loss_csv.string() << "\n"
      << "checkpoint: " << res.final_checkpoint.string() << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------

struct TranslateArgs {
  std::string ckpt;
  std::string in;
  std::string out;
  std::string labels;
  std::vector<std::string> disable;
  bool float32 = false;
};

int translate(const TranslateArgs& a, std::ostream& out) {
  require_dir(a.in, "input");
  const Model model = load_checkpoint(a.ckpt);
  if (model.encoder.mode() == EncoderMode::kOracle && a.labels.empty()) {
    throw ConfigError("the checkpoint uses the oracle encoder; --labels is required");
  }
  if (!a.labels.empty()) require_dir(a.labels, "labels");
  TransformConfig cfg = model.transform_config();
  for (const std::string& d : a.disable) {
    if (d == "affine") cfg.enable_affine = false;
    else if (d == "blur") cfg.enable_blur = false;
    else if (d == "noise") cfg.enable_noise = false;
    else throw ConfigError("--disable expects affine, blur or noise, got '" + d + "'");
  }
  if (a.float32) cfg.precision = Precision::kFloat32;
  const Geometry& g = model.geometry;
  const NoiseField noise = model.noise_field();
  fs::create_directories(a.out);
  const std::vector<fs::path> files = input_images(a.in);
  if (files.empty()) throw DataError("no PNG files in " + a.in);
  double total = 0;
  for (const fs::path& f : files) {
    const Tensor img = load_image(f);
    if (img.dim(1) != g.hi_h || img.dim(2) != g.hi_w) {
      throw GeometryMismatch(f.string() + " is " + dims(img.dim(1), img.dim(2)) +
                             ", the checkpoint expects " + dims(g.hi_h, g.hi_w));
    }
    LabelMap labels;
    if (!a.labels.empty()) labels = load_labels(label_path(a.labels, f));
    const auto t0 = std::chrono::steady_clock::now();
    const Tensor result = model.translate(img, a.labels.empty() ? nullptr : &labels,
                                          noise, cfg);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    total += secs;
    save_image(fs::path(a.out) / f.filename(), result);
    out << f.filename().string() << "  " << fmt("%.3f", secs) << " s\n";
  }
  out << files.size() << " images, mean " << fmt("%.3f", total / files.size())
      << " s per image\n";
  return kOk;
}

// ---------------------------------------------------------------------------

struct GradArgs {
  std::uint64_t seed = 0;
  std::size_t cases = 20;
  std::vector<std::string> only;
  std::string corrupt;
};

int grad_check(const GradArgs& a, std::ostream& out) {
  GradCheckOptions opt;
  opt.seed = a.seed;
  opt.cases = a.cases;
  opt.corrupt = a.corrupt;
  std::vector<GradCheckResult> results;
  if (a.only.empty()) {
    results = run_grad_checks(opt);
  } else {
    for (const std::string& c : a.only) results.push_back(run_grad_check(c, opt));
  }
  std::vector<std::string> failed;
  char line[200];
  std::snprintf(line, sizeof(line), "%-16s %6s %8s %8s %12s  %s\n", "component",
                "cases", "checked", "skipped", "max_rel_err", "status");
  out << line;
  for (const GradCheckResult& r : results) {
    std::snprintf(line, sizeof(line), "%-16s %6zu %8zu %8zu %12.3e  %s\n",
                  r.component.c_str(), r.cases, r.checked, r.skipped,
                  r.max_rel_error, r.passed() ? "ok" : "FAIL");
    out << line;
    if (!r.passed()) failed.push_back(r.component);
  }
  if (!failed.empty()) {
    out << "failed:";
    for (const auto& f : failed) out << " " << f;
    out << "\n";
    return kCheckFailed;
  }
  out << "all " << results.size() << " components within "
      << fmt("%.0e", opt.tolerance) << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------

struct EvalArgs {
  std::string pred;
  std::string gt;
  std::size_t classes = 0;
  std::string csv;
  int ignore = -1;
};

int eval_seg(const EvalArgs& a, std::ostream& out) {
  require_dir(a.pred, "prediction");
  require_dir(a.gt, "ground-truth");
  if (a.classes < 1 || a.classes > 256) throw ConfigError("--classes must be in [1, 256]");
  const std::vector<fs::path> gts = png_files(a.gt);
  if (gts.empty()) throw DataError("no label files in " + a.gt);
  std::size_t n_pred = png_files(a.pred).size();
  if (n_pred != gts.size()) {
    throw DataError("file sets differ: " + std::to_string(n_pred) + " predictions, " +
                    std::to_string(gts.size()) + " ground-truth maps");
  }
  ConfusionMatrix cm(a.classes);
  std::optional<std::uint8_t> ignore;
  if (a.ignore >= 0) ignore = static_cast<std::uint8_t>(a.ignore);
  for (const fs::path& g : gts) {
    const fs::path p = fs::path(a.pred) / g.filename();
    if (!fs::exists(p)) throw DataError("missing prediction " + p.string());
    const LabelMap gl = load_labels(g), pl = load_labels(p);
    if (gl.height != pl.height || gl.width != pl.width) {
      throw DataError(g.filename().string() + ": prediction is " +
                      dims(pl.height, pl.width) + ", ground truth " +
                      dims(gl.height, gl.width));
    }
    try {
      cm.accumulate(pl.data, gl.data, ignore);
    } catch (const DataError& e) {
      throw DataError(g.filename().string() + ": " + e.what());
    }
  }
  const SegScores s = scores(cm);
  out << "images      " << gts.size() << "\n"
      << "pixel_acc   " << fmt("%.6f", s.pixel_acc) << "\n"
      << "class_acc   " << fmt("%.6f", s.class_acc) << "\n"
      << "miou        " << fmt("%.6f", s.miou) << "\n"
      << "class  accuracy  iou\n";
  for (std::size_t k = 0; k < a.classes; ++k) {
    char line[96];
    std::snprintf(line, sizeof(line), "%5zu  %8.4f  %6.4f\n", k,
                  s.class_accuracy[k], s.class_iou[k]);
    out << line;
  }
  if (!a.csv.empty()) {
    std::ofstream c(a.csv);
    if (!c) throw IoError("cannot write " + a.csv);
    c << "metric,value\n";
    c << "pixel_acc," << fmt("%.17g", s.pixel_acc) << "\n";
    c << "class_acc," << fmt("%.17g", s.class_acc) << "\n";
    c << "miou," << fmt("%.17g", s.miou) << "\n";
    for (std::size_t k = 0; k < a.classes; ++k) {
      c << "class" << k << "_accuracy," << fmt("%.17g", s.class_accuracy[k]) << "\n";
      c << "class" << k << "_iou," << fmt("%.17g", s.class_iou[k]) << "\n";
    }
  }
  return kOk;
}

// ---------------------------------------------------------------------------

struct VisArgs {
  std::string ckpt;
  std::string in;
  std::string labels;
  std::string out;
};

constexpr std::uint8_t kPalette[][3] = {
    {0, 0, 0},     {230, 25, 75},  {60, 180, 75},   {0, 130, 200},
    {255, 225, 25}, {245, 130, 48}, {145, 30, 180}, {70, 240, 240},
};

int vis_params(const VisArgs& a, std::ostream& out) {
  const Model model = load_checkpoint(a.ckpt);
  const Tensor img = load_image(a.in);
  const Geometry& g = model.geometry;
  if (img.dim(1) != g.hi_h || img.dim(2) != g.hi_w) {
    throw GeometryMismatch(a.in + " is " + dims(img.dim(1), img.dim(2)) +
                           ", the checkpoint expects " + dims(g.hi_h, g.hi_w));
  }
  LabelMap labels;
  const LabelMap* lp = nullptr;
  if (!a.labels.empty()) {
    labels = load_labels(a.labels);
    lp = &labels;
  } else if (model.encoder.mode() == EncoderMode::kOracle) {
    throw ConfigError("the checkpoint uses the oracle encoder; --labels is required");
  }
  const ParamMap params = model.predict_params(img, lp);
  const Tensor& p = params.tensor();
  const std::size_t h = p.dim(1), w = p.dim(2), n = h * w;
  fs::create_directories(a.out);
  for (std::size_t c = 0; c < kParamChannels; ++c) {
    double lo = p[c * n], hi = p[c * n];
    for (std::size_t i = 0; i < n; ++i) {
      lo = std::min<double>(lo, p[c * n + i]);
      hi = std::max<double>(hi, p[c * n + i]);
    }
    Tensor plane({h, w});
    for (std::size_t i = 0; i < n; ++i) {
      plane[i] = hi > lo ? static_cast<Real>((p[c * n + i] - lo) / (hi - lo)) : Real(0.5);
    }
    char name[64];
    std::snprintf(name, sizeof(name), "param_%02zu_%s.png", c, param_channel_name(c));
    save_gray(fs::path(a.out) / name, plane);
    char line[128];
    std::snprintf(line, sizeof(line), "%2zu %-10s min %12.6g  max %12.6g\n", c,
                  param_channel_name(c), lo, hi);
    out << line;
  }
  const Tensor low = resize_bilinear(img, g.lo_h, g.lo_w);
  const std::vector<std::uint8_t> cls = model.encoder.predict(low, lp);
  std::vector<std::uint8_t> rgb(n * 3);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& col = kPalette[cls[i] % std::size(kPalette)];
    std::copy(col, col + 3, rgb.begin() + 3 * i);
  }
  save_rgb_interleaved(fs::path(a.out) / "classes.png", rgb, h, w);
  out << "wrote " << kParamChannels << " channel maps and classes.png to " << a.out << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------

struct BenchArgs {
  std::size_t repeat = 3;
  bool float64 = false;
  std::string geometry = "full";
  std::uint64_t seed = 0;
  double soft_limit = 2.0;
  double hard_limit = 10.0;
};

int bench(const BenchArgs& a, std::ostream& out) {
  Geometry g = a.geometry == "desk" ? Geometry::desk() : Geometry::full();
  if (a.geometry != "desk" && a.geometry != "full") {
    throw ConfigError("unknown geometry '" + a.geometry + "' (desk or full)");
  }
  Rng rng(a.seed, 0);
  Tensor img({3, g.hi_h, g.hi_w});
  for (std::size_t i = 0; i < img.numel(); ++i) img[i] = static_cast<Real>(rng.uniform());
  Tensor raw = identity_raw(g.lo_h, g.lo_w).tensor();
  const std::size_t n = g.lo_h * g.lo_w;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < 3; ++c) {
      raw[(kWeightBegin + c) * n + i] = static_cast<Real>(rng.uniform(0.8, 1.2));
      raw[(kBiasBegin + c) * n + i] = static_cast<Real>(rng.uniform(-0.1, 0.1));
      raw[(kSigmaBegin + c) * n + i] = static_cast<Real>(std::log(rng.uniform(0.05, 8.0)));
      raw[(kNoiseBegin + c) * n + i] = static_cast<Real>(rng.uniform(0.0, 0.1));
    }
  }
  const SigmaBounds bounds;
  const ParamMap params = constrain(RawParamMap(raw), bounds);
  const NoiseField noise = generate_noise_field(a.seed, g.hi_h, g.hi_w);
  TransformConfig cfg;
  cfg.precision = a.float64 ? Precision::kFloat64 : Precision::kFloat32;
  std::vector<double> times;
  for (std::size_t r = 0; r < std::max<std::size_t>(a.repeat, 1); ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    const Tensor y = translate_image(img, params, noise, g, cfg);
    times.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    if (y.numel() != img.numel()) throw ContractError("translated size mismatch");
  }
  std::sort(times.begin(), times.end());
  const double median = times[times.size() / 2];
  out << "geometry   " << dims(g.hi_h, g.hi_w) << " image, " << g.patch_count()
      << " patches of " << dims(g.patch_h(), g.patch_w()) << "\n"
      << "precision  " << (a.float64 ? "float64" : "float32") << "\n"
      << "threads    " << num_threads() << "\n"
      << "median     " << fmt("%.3f", median) << " s over " << times.size() << " runs\n"
      << "reference  0.52 s (GPU); soft target "
      << fmt("%.1f", a.soft_limit) << " s, hard limit " << fmt("%.1f", a.hard_limit)
      << " s\n";
  if (median > a.hard_limit) {
    out << "FAIL: above the hard limit\n";
    return kCheckFailed;
  }
  out << (median <= a.soft_limit ? "within the soft target\n"
                                 : "above the soft target (not a failure)\n");
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Per-pixel kernel prediction translation"};
  app.require_subcommand(1);
  std::size_t threads = 0;
  app.add_option("--threads", threads, "Worker threads (default: hardware)");

  ToyArgs toy;
  auto* c_toy = app.add_subcommand("make-toy-data", "Generate the synthetic toy dataset");
  c_toy->add_option("--out", toy.out, "Output root")->required();
  c_toy->add_option("--count", toy.count, "Source and target images each");
  c_toy->add_option("--heldout", toy.heldout, "Held-out evaluation pairs");
  c_toy->add_option("--seed", toy.seed, "Scene seed");
  c_toy->add_option("--noise-seed", toy.noise_seed, "Noise field seed");
  c_toy->add_option("--geometry", toy.geometry, "desk or full");
  c_toy->add_flag("--identity", toy.identity, "No degradation on the target side");

  TrainArgs tr;
  auto* c_train = app.add_subcommand("train", "Adversarial training");
  c_train->add_option("--config", tr.config, "key = value config file");
  c_train->add_option("--source", tr.source, "Source directory (img_/lbl_)")->required();
  c_train->add_option("--target", tr.target, "Target directory (img_)")->required();
  c_train->add_option("--out", tr.out, "Output directory")->required();
  c_train->add_option("--set", tr.overrides, "Config override key=value");
  c_train->add_flag("--quiet", tr.quiet, "No progress lines");

  TranslateArgs tl;
  auto* c_tl = app.add_subcommand("translate", "Translate a directory of images");
  c_tl->add_option("--ckpt", tl.ckpt, "Checkpoint")->required();
  c_tl->add_option("--in", tl.in, "Input directory")->required();
  c_tl->add_option("--out", tl.out, "Output directory")->required();
  c_tl->add_option("--labels", tl.labels, "Label directory (oracle encoder)");
  c_tl->add_option("--disable", tl.disable, "affine, blur or noise (repeatable)");
  c_tl->add_flag("--float32", tl.float32, "Single-precision blur kernels");

  GradArgs gc;
  auto* c_gc = app.add_subcommand("grad-check", "Finite-difference gradient suite");
  c_gc->add_option("--seed", gc.seed, "Case seed");
  c_gc->add_option("--cases", gc.cases, "Random cases per component");
  c_gc->add_option("--component", gc.only, "Restrict to components (repeatable)");
  c_gc->add_option("--corrupt", gc.corrupt, "Scale one component's analytic gradient")
      ->group("");

  EvalArgs ev;
  auto* c_ev = app.add_subcommand("eval-seg", "Segmentation scores");
  c_ev->add_option("--pred", ev.pred, "Predicted label maps")->required();
  c_ev->add_option("--gt", ev.gt, "Ground-truth label maps")->required();
  c_ev->add_option("--classes", ev.classes, "Number of classes")->required();
  c_ev->add_option("--csv", ev.csv, "CSV output");
  c_ev->add_option("--ignore", ev.ignore, "Ignored label value");

  VisArgs vis;
  auto* c_vis = app.add_subcommand("vis-params", "Dump predicted parameter channels");
  c_vis->add_option("--ckpt", vis.ckpt, "Checkpoint")->required();
  c_vis->add_option("--in", vis.in, "Input image")->required();
  c_vis->add_option("--labels", vis.labels, "Label map (oracle encoder)");
  c_vis->add_option("--out", vis.out, "Output directory")->required();

  BenchArgs bn;
  auto* c_bn = app.add_subcommand("bench", "Translation throughput");
  c_bn->add_option("--repeat", bn.repeat, "Timed runs");
  c_bn->add_flag("--float64", bn.float64, "Double-precision kernels");
  c_bn->add_option("--geometry", bn.geometry, "full or desk");
  c_bn->add_option("--seed", bn.seed, "Input seed");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }
  if (threads > 0) set_num_threads(threads);

  try {
    if (*c_toy) return make_toy_data(toy, out);
    if (*c_train) return train(tr, out, err);
    if (*c_tl) return translate(tl, out);
    if (*c_gc) return grad_check(gc, out);
    if (*c_ev) return eval_seg(ev, out);
    if (*c_vis) return vis_params(vis, out);
    if (*c_bn) return bench(bn, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const NumericError& e) {
    err << "error: " << e.what() << "\n";
    return kCheckFailed;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kData;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kData;
  }
  return kUsage;
}

}  // namespace kpn::cli
