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

#include "kpn/adam.hpp"

#include <cmath>
#include <string>

namespace kpn {

Adam::Adam(AdamConfig config) : config_(config) {
  if (!(config_.lr > 0)) throw ConfigError("learning rate must be positive");
  if (!(config_.beta1 >= 0 && config_.beta1 < 1) ||
      !(config_.beta2 >= 0 && config_.beta2 < 1)) {
    throw ConfigError("adam betas must lie in [0, 1)");
  }
  if (!(config_.eps > 0)) throw ConfigError("adam epsilon must be positive");
}

void Adam::step(const std::string& group, ParamList& params,
                const std::vector<Tensor>& grads) {
  if (grads.size() != params.size()) {
    throw ContractError("adam: " + std::to_string(grads.size()) +
                        " gradients for " + std::to_string(params.size()) +
                        " tensors");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    require_same_shape(params[i].value, grads[i], "adam gradient");
    for (std::size_t j = 0; j < grads[i].numel(); ++j) {
      if (!std::isfinite(static_cast<double>(grads[i][j]))) {
        throw NumericError("non-finite gradient in " + group + "/" +
                           params[i].name + " at element " + std::to_string(j));
      }
    }
  }
  const std::uint64_t t = ++steps_[group];
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = params[i].value;
    const Tensor& g = grads[i];
    Slot& s = slots_[group + "/" + params[i].name];
    if (s.m.numel() != p.numel()) {
      s.m = Tensor(p.shape());
      s.v = Tensor(p.shape());
    }
    for (std::size_t j = 0; j < p.numel(); ++j) {
      const double gj = g[j];
      const double m = b1 * s.m[j] + (1.0 - b1) * gj;
      const double v = b2 * s.v[j] + (1.0 - b2) * gj * gj;
      s.m[j] = static_cast<Real>(m);
      s.v[j] = static_cast<Real>(v);
      p[j] -= static_cast<Real>(config_.lr * (m / c1) /
                                (std::sqrt(v / c2) + config_.eps));
    }
  }
}

std::uint64_t Adam::steps(const std::string& group) const {
  auto it = steps_.find(group);
  return it == steps_.end() ? 0 : it->second;
}

ParamList Adam::export_state() const {
  ParamList out;
  for (const auto& [group, t] : steps_) {
    out.push_back({group + ".step", Tensor::scalar(static_cast<Real>(t))});
  }
  for (const auto& [key, slot] : slots_) {
    out.push_back({key + ".m", slot.m});
    out.push_back({key + ".v", slot.v});
  }
  return out;
}

void Adam::import_state(const ParamList& state) {
  slots_.clear();
  steps_.clear();
  auto ends_with = [](const std::string& s, const std::string& suffix) {
    return s.size() > suffix.size() &&
           s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
  };
  for (const NamedTensor& e : state) {
    const std::string& n = e.name;
    if (ends_with(n, ".step")) {
      steps_[n.substr(0, n.size() - 5)] =
          static_cast<std::uint64_t>(std::llround(e.value.item()));
    } else if (ends_with(n, ".m")) {
      slots_[n.substr(0, n.size() - 2)].m = e.value;
    } else if (ends_with(n, ".v")) {
      slots_[n.substr(0, n.size() - 2)].v = e.value;
    } else {
      throw FormatError("adam state: unexpected entry " + n);
    }
  }
}

}  // namespace kpn
