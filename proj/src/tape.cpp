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

#include "kpn/tape.hpp"

namespace kpn {

const Tensor& Var::value() const {
  if (tape == nullptr) throw ContractError("Var is not bound to a tape");
  return tape->value(*this);
}

Var Tape::leaf(Tensor value, bool requires_grad) {
  nodes_.push_back(Node{std::move(value), requires_grad, std::nullopt, {}});
  return Var{this, nodes_.size() - 1};
}

Var Tape::record(Tensor value, std::initializer_list<Var> inputs,
                 BackwardFn fn) {
  bool needs = false;
  for (const Var& in : inputs) {
    if (in.tape != this) throw ContractError("op mixes vars from two tapes");
    needs = needs || nodes_.at(in.id).requires_grad;
  }
  nodes_.push_back(
      Node{std::move(value), needs, std::nullopt, needs ? std::move(fn) : BackwardFn{}});
  return Var{this, nodes_.size() - 1};
}

Tensor& Tape::grad_buffer(Var v) {
  Node& node = nodes_.at(v.id);
  if (!node.grad) node.grad.emplace(node.value.shape());
  return *node.grad;
}

void Tape::accumulate(Var v, const Tensor& g) {
  Node& node = nodes_.at(v.id);
  if (!node.requires_grad) return;
  require_same_shape(node.value, g, "gradient accumulation");
  Tensor& buf = grad_buffer(v);
  for (std::size_t i = 0; i < g.numel(); ++i) buf[i] += g[i];
}

Tensor Tape::grad(Var v) const {
  const Node& node = nodes_.at(v.id);
  if (node.grad) return *node.grad;
  return Tensor(node.value.shape());
}

void Tape::backward(Var loss) {
  if (loss.tape != this) throw ContractError("loss belongs to another tape");
  const Node& root = nodes_.at(loss.id);
  if (root.value.numel() != 1) {
    throw ContractError("backward requires a scalar loss, got " +
                        shape_string(root.value.shape()));
  }
  if (!root.requires_grad) return;
  grad_buffer(loss)[0] += Real(1);
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (!node.backward || !node.grad) continue;
    // Rules only write to earlier nodes, so this reference stays valid.
    node.backward(*this, *node.grad);
  }
}

void Tape::zero_grad() {
  for (Node& node : nodes_) node.grad.reset();
}

}  // namespace kpn
