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
#include <optional>
#include <span>
#include <vector>

namespace kpn {

// n x n pixel counts; rows are ground truth, columns predictions.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t n_classes);

  std::size_t n_classes() const { return n_; }
  std::uint64_t at(std::size_t gt, std::size_t pred) const {
    return counts_[gt * n_ + pred];
  }
  std::uint64_t total() const;

  // DataError naming the pixel for labels >= n_classes (other than
  // `ignore`); DimensionError when the maps differ in size.
  void accumulate(std::span<const std::uint8_t> pred,
                  std::span<const std::uint8_t> gt,
                  std::optional<std::uint8_t> ignore = std::nullopt);
  void merge(const ConfusionMatrix& other);

 private:
  std::size_t n_;
  std::vector<std::uint64_t> counts_;
};

struct SegScores {
  double pixel_acc = 0;
  double class_acc = 0;
  double miou = 0;
  // Per-class values; NaN where the class is excluded.
  std::vector<double> class_accuracy;
  std::vector<double> class_iou;
};

// Classes with an empty ground-truth row are left out of class_acc; classes
// with a zero union are left out of miou. NumericError for an empty matrix.
SegScores scores(const ConfusionMatrix& cm);

}  // namespace kpn
