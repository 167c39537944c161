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
#include <functional>
#include <initializer_list>
#include <optional>
#include <vector>

#include "kpn/tensor.hpp"

namespace kpn {

class Tape;

// Handle to a value recorded on a tape.
struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
};

// Reverse-mode recording of a closed set of operations. Nodes are appended in
// evaluation order, so every operation's inputs precede it, and backward()
// walks the nodes once in reverse.
class Tape {
 public:
  // Receives the gradient of the node's output and accumulates into inputs.
  using BackwardFn = std::function<void(Tape&, const Tensor& grad_out)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var leaf(Tensor value, bool requires_grad = false);
  Var constant(Tensor value) { return leaf(std::move(value), false); }

  // Appends an op output. The backward rule is kept only when some input
  // requires a gradient.
  Var record(Tensor value, std::initializer_list<Var> inputs, BackwardFn fn);

  const Tensor& value(Var v) const { return nodes_.at(v.id).value; }
  bool requires_grad(Var v) const { return nodes_.at(v.id).requires_grad; }

  // Zero-initialized gradient buffer of `v`, allocated on first use.
  Tensor& grad_buffer(Var v);
  void accumulate(Var v, const Tensor& g);

  // Gradient of `v` after backward(); zeros if nothing reached it.
  Tensor grad(Var v) const;
  bool has_grad(Var v) const { return nodes_.at(v.id).grad.has_value(); }

  // Seeds d(loss)/d(loss) = 1 and propagates. `loss` must hold one element.
  void backward(Var loss);

  void zero_grad();
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    bool requires_grad = false;
    std::optional<Tensor> grad;
    BackwardFn backward;
  };
  std::vector<Node> nodes_;
};

}  // namespace kpn
