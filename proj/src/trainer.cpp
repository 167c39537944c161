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

#include "kpn/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>

#include "kpn/checkpoint.hpp"
#include "kpn/losses.hpp"
#include "kpn/ops.hpp"
#include "kpn/translate.hpp"

namespace kpn {
namespace {

constexpr std::uint64_t kBatchStream = 0x62617463;
constexpr std::uint64_t kPretrainStream = 0x70726574;

std::vector<Tensor> collect_grads(const Tape& tape, const std::vector<Var>& vars) {
  std::vector<Tensor> g;
  g.reserve(vars.size());
  for (const Var& v : vars) g.push_back(tape.grad(v));
  return g;
}

void require_finite(double v, const char* what, std::uint64_t iteration) {
  if (!std::isfinite(v)) {
    throw NumericError(std::string(what) + " loss is not finite at iteration " +
                       std::to_string(iteration));
  }
}

Var sum_into(Var acc, Var term, bool first) { return first ? term : add(acc, term); }

// Pixels of a translated image that reach the losses: the sampled grid cell
// and every tap with nonzero weight in the low-resolution resize.
PixelMask resize_support(const Geometry& g) {
  Tensor ones({1, g.lo_h, g.lo_w});
  for (std::size_t i = 0; i < ones.numel(); ++i) ones[i] = 1;
  const Tensor w = resize_bilinear_backward(ones, g.hi_h, g.hi_w);
  PixelMask mask(g.hi_h * g.hi_w);
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = w[i] != 0;
  return mask;
}

std::shared_ptr<const PixelMask> loss_support(const PixelMask& resize,
                                              const Geometry& g,
                                              std::size_t cy, std::size_t cx) {
  auto mask = std::make_shared<PixelMask>(resize);
  const std::size_t ph = g.patch_h(), pw = g.patch_w();
  for (std::size_t y = cy * ph; y < (cy + 1) * ph; ++y)
    std::fill_n(mask->begin() + y * g.hi_w + cx * pw, pw, 1);
  return mask;
}

}  // namespace

std::string loss_csv_row(const LossReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%llu,%s,%.17g,%.17g,%.17g,%.17g",
                static_cast<unsigned long long>(r.iteration),
                r.side == LossSide::kDisc ? "disc" : "gen", r.l_h, r.l_r,
                r.l_id, r.total);
  return buf;
}

Encoder pretrain_encoder(Encoder encoder, const SourceDataset& source,
                         const Geometry& geometry, std::size_t iterations,
                         double lr, std::uint64_t seed) {
  if (encoder.mode() != EncoderMode::kTinyConv) return encoder;
  AdamConfig ac;
  ac.lr = lr;
  Adam adam(ac);
  Rng rng(seed, kPretrainStream);
  for (std::size_t it = 0; it < iterations; ++it) {
    const SourceSample& s = source.samples[rng.below(source.samples.size())];
    const Tensor low =
        resize_bilinear(s.image.to_tensor(), geometry.lo_h, geometry.lo_w);
    const auto labels = resize_labels_nearest(
        s.labels.data, s.labels.height, s.labels.width, geometry.lo_h,
        geometry.lo_w);
    Tape tape;
    const auto vars = bind_params(tape, encoder.params(), true);
    Var loss = cross_entropy(encoder.logits(tape.constant(low), vars), labels);
    require_finite(loss.value().item(), "encoder pretraining", it);
    tape.backward(loss);
    adam.step("encoder", encoder.params(), collect_grads(tape, vars));
  }
  return encoder;
}

Model initial_model(const TrainConfig& cfg, const SourceDataset& source) {
  cfg.validate();
  Encoder enc = cfg.encoder == EncoderMode::kOracle
                    ? Encoder::oracle(cfg.n_classes)
                    : Encoder::tiny_conv(cfg.n_classes, cfg.seed);
  enc.set_feature_mode(cfg.features);
  if (cfg.encoder == EncoderMode::kTinyConv) {
    enc = pretrain_encoder(std::move(enc), source, cfg.geometry,
                           cfg.encoder_pretrain_iterations, 1e-3, cfg.seed);
  }
  Model m = Model::create(enc, cfg.geometry, cfg.sigma_bounds, cfg.noise_seed,
                          cfg.seed, cfg.two_discriminators);
  m.enable_affine = cfg.enable_affine;
  m.enable_blur = cfg.enable_blur;
  m.enable_noise = cfg.enable_noise;
  return m;
}

Trainer::Trainer(const TrainConfig& cfg, const SourceDataset& source,
                 const TargetDataset& target, Model model)
    : cfg_(cfg),
      source_(source),
      target_(target),
      model_(std::move(model)),
      adam_(AdamConfig{cfg.lr, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps}),
      rng_(cfg.seed, kBatchStream),
      noise_(generate_noise_field(model_.noise_seed, model_.geometry.hi_h,
                                  model_.geometry.hi_w)),
      resize_support_(resize_support(model_.geometry)) {
  cfg_.validate();
  const Geometry& g = model_.geometry;
  if (g != cfg_.geometry) {
    throw ConfigError("model geometry does not match the training config");
  }
  if (model_.disc_low.has_value() != cfg_.two_discriminators) {
    throw ConfigError("model and config disagree on two_discriminators");
  }
  for (const SourceSample& s : source_.samples) {
    if (s.image.height != g.hi_h || s.image.width != g.hi_w) {
      throw DataError("source image is " + std::to_string(s.image.height) +
                      "x" + std::to_string(s.image.width) + ", expected " +
                      std::to_string(g.hi_h) + "x" + std::to_string(g.hi_w));
    }
    const Tensor low = resize_bilinear(s.image.to_tensor(), g.lo_h, g.lo_w);
    features_.push_back(model_.encoder.forward(low, &s.labels));
  }
  for (const Image8& t : target_.images) {
    if (t.height < g.patch_h() || t.width < g.patch_w()) {
      throw DataError("target image smaller than one patch");
    }
  }
}

std::pair<LossReport, LossReport> Trainer::step() {
  const Geometry& geo = model_.geometry;
  const std::size_t B = cfg_.batch;
  const std::size_t ph = geo.patch_h(), pw = geo.patch_w();
  const TransformConfig tcfg = model_.transform_config();
  const std::uint64_t iter = model_.iteration;
  const Batch batch = sample_batch(source_, target_, geo, B, rng_);

  // Translate the batch on the generator tape.
  Tape gt;
  const auto kpn_vars = bind_params(gt, model_.kpn.params(), true);
  std::vector<Var> p_t(B), p_s(B), i_t(B);
  for (std::size_t b = 0; b < B; ++b) {
    const std::size_t idx = batch.source_index[b];
    const Tensor img = source_.samples[idx].image.to_tensor();
    const std::size_t y0 = batch.cell_y[b] * ph, x0 = batch.cell_x[b] * pw;
    Var raw = model_.kpn.forward(gt.constant(features_[idx]), kpn_vars);
    // Only pixels feeding the crop and the resize are evaluated.
    Var translated = translate_image(
        gt.constant(img), constrain(raw, model_.sigma_bounds), noise_, geo, tcfg,
        loss_support(resize_support_, geo, batch.cell_y[b], batch.cell_x[b]));
    p_t[b] = crop(translated, y0, x0, ph, pw);
    p_s[b] = gt.constant(crop_chw(img, y0, x0, ph, pw));
    i_t[b] = bilinear_resize(translated, geo.lo_h, geo.lo_w);
  }

  const Real inv_b = Real(1) / static_cast<Real>(B);
  LossReport dr{iter, LossSide::kDisc, 0, 0, 0, 0};
  {
    Tape dt;
    const auto dv = bind_params(dt, model_.disc.params(), true);
    const auto dlv = model_.disc_low
                         ? bind_params(dt, model_.disc_low->params(), true)
                         : dv;
    const Discriminator& dl = model_.disc_low ? *model_.disc_low : model_.disc;
    Var sum_h{}, sum_r{};
    for (std::size_t b = 0; b < B; ++b) {
      Var fake_p = model_.disc.forward(dt.constant(p_t[b].value()), dv);
      Var real_p = model_.disc.forward(dt.constant(batch.target_patches[b]), dv);
      Var fake_l = dl.forward(dt.constant(i_t[b].value()), dlv);
      Var real_l = dl.forward(dt.constant(batch.target_lowres[b]), dlv);
      Var lh, lr;
      if (cfg_.per_location_loss) {
        lh = add(bce_logits_mean(fake_p, false), bce_logits_mean(real_p, true));
        lr = add(bce_logits_mean(fake_l, false), bce_logits_mean(real_l, true));
      } else {
        DiscLoss l = disc_loss(discriminator_probability(fake_p),
                               discriminator_probability(real_p),
                               discriminator_probability(fake_l),
                               discriminator_probability(real_l));
        lh = l.l_h;
        lr = l.l_r;
      }
      sum_h = sum_into(sum_h, lh, b == 0);
      sum_r = sum_into(sum_r, lr, b == 0);
    }
    Var lh = scale(sum_h, inv_b * static_cast<Real>(cfg_.weight_h));
    Var lr = scale(sum_r, inv_b * static_cast<Real>(cfg_.weight_r));
    Var total = add(lh, lr);
    dr.l_h = lh.value().item();
    dr.l_r = lr.value().item();
    dr.total = total.value().item();
    require_finite(dr.total, "discriminator", iter);
    dt.backward(total);
    adam_.step("discriminator", model_.disc.params(), collect_grads(dt, dv));
    if (model_.disc_low) {
      adam_.step("discriminator_low", model_.disc_low->params(),
                 collect_grads(dt, dlv));
    }
  }

  LossReport gr{iter, LossSide::kGen, 0, 0, 0, 0};
  {
    const auto dv = bind_params(gt, model_.disc.params(), false);
    const auto dlv = model_.disc_low
                         ? bind_params(gt, model_.disc_low->params(), false)
                         : dv;
    const Discriminator& dl = model_.disc_low ? *model_.disc_low : model_.disc;
    Var sum_h{}, sum_r{}, sum_id{};
    for (std::size_t b = 0; b < B; ++b) {
      Var fake_p = model_.disc.forward(p_t[b], dv);
      Var fake_l = dl.forward(i_t[b], dlv);
      Var lh, lr;
      if (cfg_.per_location_loss) {
        lh = bce_logits_mean(fake_p, true);
        lr = bce_logits_mean(fake_l, true);
      } else {
        GenLoss l = gen_loss(discriminator_probability(fake_p),
                             discriminator_probability(fake_l), p_t[b], p_s[b]);
        lh = l.l_h;
        lr = l.l_r;
      }
      sum_h = sum_into(sum_h, lh, b == 0);
      sum_r = sum_into(sum_r, lr, b == 0);
      sum_id = sum_into(sum_id, mse_mean(p_t[b], p_s[b]), b == 0);
    }
    Var lh = scale(sum_h, inv_b * static_cast<Real>(cfg_.weight_h));
    Var lr = scale(sum_r, inv_b * static_cast<Real>(cfg_.weight_r));
    Var lid = scale(sum_id, inv_b * static_cast<Real>(cfg_.weight_id));
    Var total = add(add(lh, lr), lid);
    gr.l_h = lh.value().item();
    gr.l_r = lr.value().item();
    gr.l_id = lid.value().item();
    gr.total = total.value().item();
    require_finite(gr.total, "generator", iter);
    gt.backward(total);
    adam_.step("kpn", model_.kpn.params(), collect_grads(gt, kpn_vars));
  }
  ++model_.iteration;
  return {dr, gr};
}

TrainOutputs run_training(const TrainConfig& cfg, const SourceDataset& source,
                          const TargetDataset& target, Model initial,
                          const std::filesystem::path& out_dir,
                          std::ostream* progress) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
  Trainer trainer(cfg, source, target, std::move(initial));
  TrainOutputs out{out_dir / "loss.csv", out_dir / "final.kpnc", {}};
  std::ofstream csv(out.loss_csv);
  if (!csv) throw IoError("cannot write " + out.loss_csv.string());
  csv << kLossCsvHeader << "\n";

  auto save_sample = [&](std::uint64_t iter) {
    const auto dir = out_dir / "samples";
    std::filesystem::create_directories(dir);
    const SourceSample& s = source.samples.front();
    const Tensor t = trainer.model().translate(s.image.to_tensor(), &s.labels,
                                               trainer.noise(),
                                               trainer.model().transform_config());
    char name[64];
    std::snprintf(name, sizeof(name), "iter_%06llu.png",
                  static_cast<unsigned long long>(iter));
    save_image(dir / name, t);
  };

  const auto start = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < cfg.iterations; ++i) {
    std::pair<LossReport, LossReport> reports;
    try {
      reports = trainer.step();
    } catch (const NumericError&) {
      save_checkpoint(out.final_checkpoint, trainer.model(), &trainer.adam());
      throw;
    }
    for (const LossReport& r : {reports.first, reports.second}) {
      csv << loss_csv_row(r) << "\n";
      out.log.push_back(r);
    }
    const std::uint64_t done = trainer.iteration();
    if (cfg.checkpoint_every > 0 && done % cfg.checkpoint_every == 0) {
      char name[64];
      std::snprintf(name, sizeof(name), "ckpt_%06llu.kpnc",
                    static_cast<unsigned long long>(done));
      save_checkpoint(out_dir / name, trainer.model(), &trainer.adam());
    }
    if (cfg.sample_every > 0 && done % cfg.sample_every == 0) save_sample(done);
    if (progress && (done % 50 == 0 || done == cfg.iterations)) {
      const double secs = std::chrono::duration<double>(
                              std::chrono::steady_clock::now() - start)
                              .count();
      char line[200];
      std::snprintf(line, sizeof(line),
                    "iter %6llu  D %.4f  G %.4f (adv %.4f + %.4f, id %.3g)  %.1fs\n",
                    static_cast<unsigned long long>(done), reports.first.total,
                    reports.second.total, reports.second.l_h,
                    reports.second.l_r, reports.second.l_id, secs);
      *progress << line << std::flush;
    }
  }
  csv.flush();
  if (!csv) throw IoError("write failed: " + out.loss_csv.string());
  save_checkpoint(out.final_checkpoint, trainer.model(), &trainer.adam());
  return out;
}

}  // namespace kpn
