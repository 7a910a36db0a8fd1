// Copyright 2026 The KernelNN Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#ifndef KERNELNN_AUTODIFF_H_
#define KERNELNN_AUTODIFF_H_

#include <functional>
#include <span>
#include <vector>

#include "kernelnn/activation.h"
#include "kernelnn/tensor.h"

namespace kernelnn {

class Tape;

// Handle to a node on a Tape. Cheap to copy; valid as long as its Tape lives.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  bool valid() const { return tape_ != nullptr; }
  Tape* tape() const { return tape_; }
  int id() const { return id_; }
  const Tensor& value() const;

 private:
  Tape* tape_ = nullptr;
  int id_ = -1;
};

// Adjoint accumulators handed to each node's backward function.
class Adjoints {
 public:
  explicit Adjoints(const Tape& tape);

  void accumulate(int id, const Tensor& delta);
  // Accumulates delta scaled by s without materializing the product.
  void accumulate_scaled(int id, const Tensor& delta, double s);
  const Tensor& get(int id) const { return adjoints_[id]; }

 private:
  friend class Tape;
  const Tape* tape_;
  std::vector<Tensor> adjoints_;
};

// Result of Tape::backward: adjoints of every node reachable from the root.
class Gradients {
 public:
  Gradients(const Tape* tape, std::vector<Tensor> adjoints)
      : tape_(tape), adjoints_(std::move(adjoints)) {}

  // d(root)/d(v); zeros when v does not influence the root.
  Tensor at(const Var& v) const;

 private:
  const Tape* tape_;
  std::vector<Tensor> adjoints_;
};

// Append-only record of forward operations. Nodes are stored in creation
// order, so inputs always precede their consumers; backward sweeps that
// order in reverse. Single-threaded.
class Tape {
 public:
  using BackwardFn = std::function<void(const Tensor& grad, Adjoints& adj)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Differentiable leaf (parameters, inputs under test).
  Var leaf(Tensor value);
  // Leaf excluded from differentiation.
  Var constant(Tensor value);
  // Node computed from `inputs`. `backward` is dropped when no input needs a
  // gradient.
  Var record(Tensor value, std::span<const Var> inputs, BackwardFn backward);

  const Tensor& value(int id) const { return nodes_[id].value; }
  bool requires_grad(int id) const { return nodes_[id].requires_grad; }
  std::size_t size() const { return nodes_.size(); }

  // Reverse sweep from a scalar root.
  Gradients backward(const Var& root) const;

 private:
  struct Node {
    Tensor value;
    bool requires_grad = false;
    BackwardFn backward;
  };
  std::vector<Node> nodes_;
};

// Differentiable operations. All operands must live on the same tape.
namespace ad {

Var matvec(const Var& w, const Var& x);
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double s);
// 1 - a, elementwise.
Var one_minus(const Var& a);
Var activation(const Var& a, Activation act);
Var sigmoid(const Var& a);
// Sum of all entries, as a scalar.
Var sum(const Var& a);
Var dot(const Var& a, const Var& b);
Var concat(const Var& a, const Var& b);
// Elementwise sum of same-shaped operands, accumulated left to right.
Var add_n(std::span<const Var> terms);
// Row `index` of matrix e, as a vector (embedding lookup).
Var row(const Var& e, std::size_t index);
// -log softmax(logits)[target], as a scalar.
Var cross_entropy(const Var& logits, std::size_t target);

}  // namespace ad

}  // namespace kernelnn

#endif  // KERNELNN_AUTODIFF_H_
