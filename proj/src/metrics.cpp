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

#include "kpn/metrics.hpp"

#include <limits>
#include <string>

#include "kpn/common.hpp"

namespace kpn {

ConfusionMatrix::ConfusionMatrix(std::size_t n_classes)
    : n_(n_classes), counts_(n_classes * n_classes, 0) {
  if (n_classes == 0) throw ConfigError("confusion matrix needs at least one class");
}

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t t = 0;
  for (std::uint64_t c : counts_) t += c;
  return t;
}

void ConfusionMatrix::accumulate(std::span<const std::uint8_t> pred,
                                 std::span<const std::uint8_t> gt,
                                 std::optional<std::uint8_t> ignore) {
  if (pred.size() != gt.size()) {
    throw DimensionError("prediction has " + std::to_string(pred.size()) +
                         " pixels, ground truth " + std::to_string(gt.size()));
  }
  // Validate first so a bad map leaves the counts untouched.
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (ignore && gt[i] == *ignore) continue;
    if (gt[i] >= n_ || pred[i] >= n_) {
      throw DataError("label out of range at pixel " + std::to_string(i) +
                      ": gt " + std::to_string(gt[i]) + ", pred " +
                      std::to_string(pred[i]) + ", classes " +
                      std::to_string(n_));
    }
  }
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (ignore && gt[i] == *ignore) continue;
    ++counts_[gt[i] * n_ + pred[i]];
  }
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
  if (other.n_ != n_) throw DimensionError("confusion matrices differ in size");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
}

SegScores scores(const ConfusionMatrix& cm) {
  const std::size_t n = cm.n_classes();
  const std::uint64_t total = cm.total();
  if (total == 0) throw NumericError("scores are undefined for an empty confusion matrix");
  const double nan = std::numeric_limits<double>::quiet_NaN();
  SegScores s;
  s.class_accuracy.assign(n, nan);
  s.class_iou.assign(n, nan);
  std::uint64_t diag = 0;
  double acc_sum = 0, iou_sum = 0;
  std::size_t acc_n = 0, iou_n = 0;
  for (std::size_t k = 0; k < n; ++k) {
    std::uint64_t row = 0, col = 0;
    for (std::size_t j = 0; j < n; ++j) {
      row += cm.at(k, j);
      col += cm.at(j, k);
    }
    const std::uint64_t tp = cm.at(k, k);
    diag += tp;
    if (row > 0) {
      s.class_accuracy[k] = static_cast<double>(tp) / static_cast<double>(row);
      acc_sum += s.class_accuracy[k];
      ++acc_n;
    }
    const std::uint64_t uni = row + col - tp;
    if (uni > 0) {
      s.class_iou[k] = static_cast<double>(tp) / static_cast<double>(uni);
      iou_sum += s.class_iou[k];
      ++iou_n;
    }
  }
  s.pixel_acc = static_cast<double>(diag) / static_cast<double>(total);
  s.class_acc = acc_sum / static_cast<double>(acc_n);
  s.miou = iou_sum / static_cast<double>(iou_n);
  return s;
}

}  // namespace kpn
