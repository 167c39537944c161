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
#include <span>
#include <string>
#include <vector>

#include "kpn/gaussian.hpp"
#include "kpn/image_io.hpp"
#include "kpn/tape.hpp"
#include "kpn/tensor.hpp"

namespace kpn {

struct NamedTensor {
  std::string name;
  Tensor value;
};

using ParamList = std::vector<NamedTensor>;

// Places every parameter on the tape as a leaf.
std::vector<Var> bind_params(Tape& tape, const ParamList& params,
                             bool requires_grad);

// Uniform in [-bound, bound], a pure function of (seed, stream, index).
Tensor uniform_tensor(Shape shape, double bound, std::uint64_t seed,
                      std::uint64_t stream);

enum class EncoderMode { kOracle, kTinyConv };

// How TinyConv class scores are turned into KPN features.
enum class FeatureMode { kOneHot, kSoftmax, kLogits };

const char* encoder_mode_name(EncoderMode mode);
EncoderMode parse_encoder_mode(const std::string& name);
const char* feature_mode_name(FeatureMode mode);
FeatureMode parse_feature_mode(const std::string& name);

// Semantic feature extractor. Oracle mode turns ground-truth labels into
// one-hot maps; TinyConv is a 3-layer conv net (3 -> 32 -> 32 -> n, kernel 3,
// pad 1, ReLU between layers).
class Encoder {
 public:
  static Encoder oracle(std::size_t n_classes);
  static Encoder tiny_conv(std::size_t n_classes, std::uint64_t seed);

  EncoderMode mode() const { return mode_; }
  std::size_t n_classes() const { return n_classes_; }
  FeatureMode feature_mode() const { return feature_mode_; }
  void set_feature_mode(FeatureMode m) { feature_mode_ = m; }

  // Features [n_classes, h, w] for a [3, h, w] low-resolution image. Labels
  // of any size are nearest-downsampled to h x w. ConfigError in oracle mode
  // without labels.
  Tensor forward(const Tensor& image, const LabelMap* labels = nullptr) const;
  // TinyConv class logits on a tape.
  Var logits(Var image, std::span<const Var> params) const;
  // Per-pixel argmax class.
  std::vector<std::uint8_t> predict(const Tensor& image,
                                    const LabelMap* labels = nullptr) const;

  const ParamList& params() const { return params_; }
  ParamList& params() { return params_; }

  Encoder(EncoderMode mode, std::size_t n_classes, ParamList params);

 private:
  EncoderMode mode_;
  std::size_t n_classes_;
  FeatureMode feature_mode_ = FeatureMode::kSoftmax;
  ParamList params_;
};

// One-hot [n_classes, h, w] of nearest-downsampled labels. DataError for
// labels >= n_classes.
Tensor one_hot_labels(const LabelMap& labels, std::size_t n_classes,
                      std::size_t h, std::size_t w);

// Kernel prediction head: one conv, n_classes -> 12, kernel 3, pad 1.
class Kpn {
 public:
  // Zero weights and the identity raw vector as bias.
  static Kpn identity(std::size_t n_classes, SigmaBounds bounds = {});

  std::size_t n_classes() const { return params_[0].value.dim(1); }
  // Raw parameter map [12, h, w].
  Tensor forward(const Tensor& features) const;
  Var forward(Var features, std::span<const Var> params) const;

  const ParamList& params() const { return params_; }
  ParamList& params() { return params_; }

  explicit Kpn(ParamList params);

 private:
  void check_features(const Tensor& features) const;
  ParamList params_;
};

// Patch discriminator: 3 -> 64 -> 128 -> 256 (kernel 4, stride 2, pad 1,
// leaky ReLU 0.2) -> 1 (kernel 3, stride 1, pad 1). Produces a logit map.
class Discriminator {
 public:
  static constexpr std::size_t kMinInput = 8;
  static constexpr Real kSlope = Real(0.2);

  static Discriminator init(std::uint64_t seed);

  Tensor forward(const Tensor& image) const;
  Var forward(Var image, std::span<const Var> params) const;
  // sigmoid(mean logit)
  Real probability(const Tensor& image) const;

  const ParamList& params() const { return params_; }
  ParamList& params() { return params_; }

  explicit Discriminator(ParamList params);

 private:
  ParamList params_;
};

// D(x) = sigmoid(mean(logits)) on a tape.
Var discriminator_probability(Var logits);

}  // namespace kpn
