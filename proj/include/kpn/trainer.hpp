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

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "kpn/adam.hpp"
#include "kpn/dataset.hpp"
#include "kpn/model.hpp"
#include "kpn/rng.hpp"
#include "kpn/train_config.hpp"
#include "kpn/translate.hpp"

namespace kpn {

enum class LossSide { kDisc, kGen };

struct LossReport {
  std::uint64_t iteration = 0;
  LossSide side = LossSide::kDisc;
  double l_h = 0;
  double l_r = 0;
  double l_id = 0;
  double total = 0;
};

inline constexpr const char* kLossCsvHeader = "iteration,side,l_h,l_r,l_id,total";
std::string loss_csv_row(const LossReport& report);

// Cross-entropy pretraining of a TinyConv encoder on the source labels at the
// low resolution of `geometry`.
Encoder pretrain_encoder(Encoder encoder, const SourceDataset& source,
                         const Geometry& geometry, std::size_t iterations,
                         double lr, std::uint64_t seed);

// Encoder (pretrained if needed), identity KPN and fresh discriminator(s).
Model initial_model(const TrainConfig& cfg, const SourceDataset& source);

// Alternating discriminator / KPN updates. The encoder is never modified.
class Trainer {
 public:
  Trainer(const TrainConfig& cfg, const SourceDataset& source,
          const TargetDataset& target, Model model);

  // One iteration: translate a batch, update the discriminator on the
  // detached translations, then update the KPN against the new
  // discriminator. NumericError (nothing updated) if a loss is not finite.
  std::pair<LossReport, LossReport> step();

  const Model& model() const { return model_; }
  Model& model() { return model_; }
  const Adam& adam() const { return adam_; }
  Adam& adam() { return adam_; }
  const NoiseField& noise() const { return noise_; }
  const TrainConfig& config() const { return cfg_; }
  std::uint64_t iteration() const { return model_.iteration; }

 private:
  TrainConfig cfg_;
  const SourceDataset& source_;
  const TargetDataset& target_;
  Model model_;
  Adam adam_;
  Rng rng_;
  NoiseField noise_;
  PixelMask resize_support_;
  std::vector<Tensor> features_;
};

struct TrainOutputs {
  std::filesystem::path loss_csv;
  std::filesystem::path final_checkpoint;
  std::vector<LossReport> log;
};

// Runs cfg.iterations iterations, writing loss.csv, ckpt_%06d.kpnc every
// cfg.checkpoint_every iterations, final.kpnc, and sample translations every
// cfg.sample_every iterations under `out_dir`. On divergence the last good
// model is saved as final.kpnc before the NumericError propagates.
TrainOutputs run_training(const TrainConfig& cfg, const SourceDataset& source,
                          const TargetDataset& target, Model initial,
                          const std::filesystem::path& out_dir,
                          std::ostream* progress = nullptr);

}  // namespace kpn
