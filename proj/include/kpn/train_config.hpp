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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "kpn/gaussian.hpp"
#include "kpn/networks.hpp"
#include "kpn/param_map.hpp"

namespace kpn {

// Parsed `key = value` lines. Blank lines and '#' comments are ignored.
struct KeyValueLine {
  std::string key;
  std::string value;
  std::size_t line = 0;
};
std::vector<KeyValueLine> parse_key_values(const std::string& text);

struct TrainConfig {
  double lr = 1e-4;
  std::size_t batch = 8;
  std::size_t iterations = 2000;
  std::uint64_t seed = 0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double weight_h = 1.0;
  double weight_r = 1.0;
  double weight_id = 1.0;
  Geometry geometry = Geometry::desk();
  SigmaBounds sigma_bounds;
  bool enable_affine = true;
  bool enable_blur = true;
  bool enable_noise = true;
  std::size_t n_classes = 4;
  EncoderMode encoder = EncoderMode::kOracle;
  FeatureMode features = FeatureMode::kSoftmax;
  std::size_t encoder_pretrain_iterations = 300;
  std::uint64_t noise_seed = 0;
  std::size_t checkpoint_every = 500;
  std::size_t sample_every = 0;
  bool two_discriminators = false;
  bool per_location_loss = false;

  // ConfigError naming the key for unknown keys or unparsable values.
  static TrainConfig parse(const std::string& text);
  static TrainConfig load(const std::filesystem::path& path);
  // Applies one key; used by parse and by command-line overrides.
  void set(const std::string& key, const std::string& value);
  // ConfigError unless lr > 0, batch >= 1 and the geometry is valid.
  void validate() const;
  // Canonical `key = value` text; parse(to_text()) reproduces the config.
  std::string to_text() const;
};

}  // namespace kpn
