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

#include "kpn/networks.hpp"

#include <cmath>
#include <string>

#include "kpn/noise.hpp"
#include "kpn/ops.hpp"
#include "kpn/param_map.hpp"

namespace kpn {
namespace {

constexpr std::size_t kEncoderHidden = 32;
constexpr std::size_t kDiscWidths[4] = {3, 64, 128, 256};

Tensor relu_inplace(Tensor t, Real slope) {
  for (std::size_t i = 0; i < t.numel(); ++i)
    if (t[i] < 0) t[i] *= slope;
  return t;
}

void check_param_count(std::span<const Var> params, std::size_t n,
                       const char* what) {
  if (params.size() != n) {
    throw ContractError(std::string(what) + ": expected " + std::to_string(n) +
                        " bound parameters, got " +
                        std::to_string(params.size()));
  }
}

std::vector<std::uint8_t> argmax_channels(const Tensor& scores) {
  const std::size_t C = scores.dim(0), n = scores.dim(1) * scores.dim(2);
  std::vector<std::uint8_t> out(n, 0);
  for (std::size_t p = 0; p < n; ++p) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < C; ++c)
      if (scores[c * n + p] > scores[best * n + p]) best = c;
    out[p] = static_cast<std::uint8_t>(best);
  }
  return out;
}

}  // namespace

std::vector<Var> bind_params(Tape& tape, const ParamList& params,
                             bool requires_grad) {
  std::vector<Var> vars;
  vars.reserve(params.size());
  for (const NamedTensor& p : params) vars.push_back(tape.leaf(p.value, requires_grad));
  return vars;
}

Tensor uniform_tensor(Shape shape, double bound, std::uint64_t seed,
                      std::uint64_t stream) {
  Tensor t(std::move(shape));
  const std::uint64_t key = mix64(seed, stream);
  for (std::size_t i = 0; i < t.numel(); ++i) {
    const double u = static_cast<double>(mix64(key, i) >> 11) * 0x1.0p-53;
    t[i] = static_cast<Real>((2.0 * u - 1.0) * bound);
  }
  return t;
}

const char* encoder_mode_name(EncoderMode mode) {
  return mode == EncoderMode::kOracle ? "oracle" : "tinyconv";
}

EncoderMode parse_encoder_mode(const std::string& name) {
  if (name == "oracle") return EncoderMode::kOracle;
  if (name == "tinyconv") return EncoderMode::kTinyConv;
  throw ConfigError("unknown encoder mode '" + name + "' (oracle|tinyconv)");
}

const char* feature_mode_name(FeatureMode mode) {
  switch (mode) {
    case FeatureMode::kOneHot:
      return "onehot";
    case FeatureMode::kSoftmax:
      return "softmax";
    case FeatureMode::kLogits:
      return "logits";
  }
  return "?";
}

FeatureMode parse_feature_mode(const std::string& name) {
  if (name == "onehot") return FeatureMode::kOneHot;
  if (name == "softmax") return FeatureMode::kSoftmax;
  if (name == "logits") return FeatureMode::kLogits;
  throw ConfigError("unknown feature mode '" + name +
                    "' (onehot|softmax|logits)");
}

Tensor one_hot_labels(const LabelMap& labels, std::size_t n_classes,
                      std::size_t h, std::size_t w) {
  const auto small = resize_labels_nearest(labels.data, labels.height,
                                           labels.width, h, w);
  Tensor out({n_classes, h, w});
  const std::size_t n = h * w;
  for (std::size_t p = 0; p < n; ++p) {
    if (small[p] >= n_classes) {
      throw DataError("label " + std::to_string(small[p]) + " at pixel " +
                      std::to_string(p) + " exceeds " +
                      std::to_string(n_classes) + " classes");
    }
    out[small[p] * n + p] = 1;
  }
  return out;
}

// ---------------------------------------------------------------------------

Encoder::Encoder(EncoderMode mode, std::size_t n_classes, ParamList params)
    : mode_(mode), n_classes_(n_classes), params_(std::move(params)) {
  if (n_classes_ == 0 || n_classes_ > 255) {
    throw ConfigError("encoder class count must lie in [1, 255]");
  }
  if (mode_ == EncoderMode::kTinyConv && params_.size() != 6) {
    throw ContractError("tinyconv encoder needs 6 parameter tensors");
  }
}

Encoder Encoder::oracle(std::size_t n_classes) {
  return Encoder(EncoderMode::kOracle, n_classes, {});
}

Encoder Encoder::tiny_conv(std::size_t n_classes, std::uint64_t seed) {
  const std::size_t widths[4] = {3, kEncoderHidden, kEncoderHidden, n_classes};
  ParamList p;
  for (std::size_t l = 0; l < 3; ++l) {
    const std::size_t fan_in = widths[l] * 9;
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    p.push_back({"conv" + std::to_string(l) + ".weight",
                 uniform_tensor({widths[l + 1], widths[l], 3, 3}, bound, seed,
                                100 + l)});
    p.push_back({"conv" + std::to_string(l) + ".bias", Tensor({widths[l + 1]})});
  }
  return Encoder(EncoderMode::kTinyConv, n_classes, std::move(p));
}

Var Encoder::logits(Var image, std::span<const Var> params) const {
  if (mode_ != EncoderMode::kTinyConv) {
    throw ContractError("oracle encoder has no logits");
  }
  check_param_count(params, 6, "encoder");
  Var x = image;
  for (std::size_t l = 0; l < 3; ++l) {
    x = conv2d(x, params[2 * l], params[2 * l + 1], 1, 1);
    if (l < 2) x = leaky_relu(x, 0);
  }
  return x;
}

Tensor Encoder::forward(const Tensor& image, const LabelMap* labels) const {
  require_rank(image, 3, "encoder input");
  const std::size_t h = image.dim(1), w = image.dim(2);
  if (mode_ == EncoderMode::kOracle) {
    if (!labels) throw ConfigError("oracle encoder requires label maps");
    return one_hot_labels(*labels, n_classes_, h, w);
  }
  if (image.dim(0) != 3) {
    throw DimensionError("encoder input must have 3 channels, got " +
                         shape_string(image.shape()));
  }
  Tensor x = image;
  for (std::size_t l = 0; l < 3; ++l) {
    x = conv2d_forward(x, params_[2 * l].value, params_[2 * l + 1].value, 1, 1);
    if (l < 2) x = relu_inplace(std::move(x), 0);
  }
  switch (feature_mode_) {
    case FeatureMode::kLogits:
      return x;
    case FeatureMode::kSoftmax:
      return softmax_channels(x);
    case FeatureMode::kOneHot: {
      const auto cls = argmax_channels(x);
      Tensor out({n_classes_, h, w});
      for (std::size_t p = 0; p < cls.size(); ++p) out[cls[p] * h * w + p] = 1;
      return out;
    }
  }
  return x;
}

std::vector<std::uint8_t> Encoder::predict(const Tensor& image,
                                           const LabelMap* labels) const {
  if (mode_ == EncoderMode::kOracle) {
    if (!labels) throw ConfigError("oracle encoder requires label maps");
    return resize_labels_nearest(labels->data, labels->height, labels->width,
                                 image.dim(1), image.dim(2));
  }
  Encoder logit_encoder = *this;
  logit_encoder.set_feature_mode(FeatureMode::kLogits);
  return argmax_channels(logit_encoder.forward(image));
}

// ---------------------------------------------------------------------------

Kpn::Kpn(ParamList params) : params_(std::move(params)) {
  if (params_.size() != 2 || params_[0].value.rank() != 4 ||
      params_[0].value.dim(0) != kParamChannels) {
    throw ContractError("kpn needs a [12, n, 3, 3] weight and [12] bias");
  }
}

Kpn Kpn::identity(std::size_t n_classes, SigmaBounds bounds) {
  const auto v = identity_raw_vector(bounds);
  return Kpn({{"conv.weight", Tensor({kParamChannels, n_classes, 3, 3})},
              {"conv.bias", Tensor({kParamChannels}, v)}});
}

void Kpn::check_features(const Tensor& features) const {
  if (features.rank() != 3 || features.dim(0) != n_classes()) {
    throw DimensionError("kpn expects [" + std::to_string(n_classes()) +
                         ", H, W] features, got " +
                         shape_string(features.shape()));
  }
}

Tensor Kpn::forward(const Tensor& features) const {
  check_features(features);
  return conv2d_forward(features, params_[0].value, params_[1].value, 1, 1);
}

Var Kpn::forward(Var features, std::span<const Var> params) const {
  check_features(features.value());
  check_param_count(params, 2, "kpn");
  return conv2d(features, params[0], params[1], 1, 1);
}

// ---------------------------------------------------------------------------

Discriminator::Discriminator(ParamList params) : params_(std::move(params)) {
  if (params_.size() != 8) {
    throw ContractError("discriminator needs 8 parameter tensors");
  }
}

Discriminator Discriminator::init(std::uint64_t seed) {
  // Uniform with standard deviation 0.02.
  const double bound = 0.02 * std::sqrt(3.0);
  ParamList p;
  for (std::size_t l = 0; l < 4; ++l) {
    const std::size_t out = l < 3 ? kDiscWidths[l + 1] : 1;
    const std::size_t k = l < 3 ? 4 : 3;
    p.push_back({"conv" + std::to_string(l) + ".weight",
                 uniform_tensor({out, kDiscWidths[l], k, k}, bound, seed,
                                200 + l)});
    p.push_back({"conv" + std::to_string(l) + ".bias", Tensor({out})});
  }
  return Discriminator(std::move(p));
}

namespace {

void check_disc_input(const Tensor& image) {
  if (image.rank() != 3 || image.dim(0) != 3) {
    throw DimensionError("discriminator expects [3, H, W], got " +
                         shape_string(image.shape()));
  }
  if (image.dim(1) < Discriminator::kMinInput ||
      image.dim(2) < Discriminator::kMinInput) {
    throw DimensionError("discriminator input " + shape_string(image.shape()) +
                         " is smaller than 8 x 8");
  }
}

}  // namespace

Tensor Discriminator::forward(const Tensor& image) const {
  check_disc_input(image);
  Tensor x = image;
  for (std::size_t l = 0; l < 4; ++l) {
    const std::size_t stride = l < 3 ? 2 : 1;
    x = conv2d_forward(x, params_[2 * l].value, params_[2 * l + 1].value,
                       stride, 1);
    if (l < 3) x = relu_inplace(std::move(x), kSlope);
  }
  return x;
}

Var Discriminator::forward(Var image, std::span<const Var> params) const {
  check_disc_input(image.value());
  check_param_count(params, 8, "discriminator");
  Var x = image;
  for (std::size_t l = 0; l < 4; ++l) {
    const std::size_t stride = l < 3 ? 2 : 1;
    x = conv2d(x, params[2 * l], params[2 * l + 1], stride, 1);
    if (l < 3) x = leaky_relu(x, kSlope);
  }
  return x;
}

Real Discriminator::probability(const Tensor& image) const {
  const Tensor logits = forward(image);
  double s = 0;
  for (std::size_t i = 0; i < logits.numel(); ++i) s += logits[i];
  return static_cast<Real>(1.0 / (1.0 + std::exp(-s / logits.numel())));
}

Var discriminator_probability(Var logits) { return sigmoid(mean(logits)); }

}  // namespace kpn
