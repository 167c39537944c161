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
#include <map>
#include <string>
#include <vector>

#include "kpn/networks.hpp"

namespace kpn {

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected Adam. Moments are keyed by "<group>/<tensor name>" and each
// group keeps its own step count.
class Adam {
 public:
  explicit Adam(AdamConfig config = {});

  const AdamConfig& config() const { return config_; }
  // One update of every tensor in `params`. NumericError naming the tensor if
  // a gradient is not finite; nothing is modified in that case.
  void step(const std::string& group, ParamList& params,
            const std::vector<Tensor>& grads);

  std::uint64_t steps(const std::string& group) const;

  // Flat view for checkpointing: "<key>.m", "<key>.v" and "<group>.step".
  ParamList export_state() const;
  void import_state(const ParamList& state);

 private:
  struct Slot {
    Tensor m;
    Tensor v;
  };
  AdamConfig config_;
  std::map<std::string, Slot> slots_;
  std::map<std::string, std::uint64_t> steps_;
};

}  // namespace kpn
