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


#ifndef KERNELNN_PARAMS_H_
#define KERNELNN_PARAMS_H_

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "kernelnn/autodiff.h"
#include "kernelnn/tensor.h"

namespace kernelnn {

// Named parameter tensors in insertion order. Iteration order is stable, which
// keeps optimizers and serialized bundles deterministic.
class ParameterSet {
 public:
  void set(const std::string& name, Tensor value);
  bool contains(const std::string& name) const;
  const Tensor& at(const std::string& name) const;
  Tensor& at(const std::string& name);

  const std::vector<std::pair<std::string, Tensor>>& entries() const {
    return entries_;
  }
  std::vector<std::pair<std::string, Tensor>>& entries() { return entries_; }
  std::size_t size() const { return entries_.size(); }
  std::size_t num_values() const;

 private:
  std::vector<std::pair<std::string, Tensor>> entries_;
  std::map<std::string, std::size_t> index_;
};

// Binds a ParameterSet onto a Tape lazily: the first get(name) creates a leaf
// (or a constant when frozen), later calls return the same Var.
class ParamBinder {
 public:
  ParamBinder(Tape& tape, const ParameterSet& params, bool trainable = true)
      : tape_(tape), params_(params), trainable_(trainable) {}

  Var get(const std::string& name);
  bool has(const std::string& name) const { return params_.contains(name); }
  Tape& tape() { return tape_; }

  // Gradient of every parameter in the set; parameters never bound get zeros.
  ParameterSet gradients(const Gradients& grads) const;

 private:
  Tape& tape_;
  const ParameterSet& params_;
  bool trainable_;
  std::map<std::string, Var> bound_;
};

}  // namespace kernelnn

#endif  // KERNELNN_PARAMS_H_
