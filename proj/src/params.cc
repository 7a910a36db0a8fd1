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


#include "kernelnn/params.h"

#include "kernelnn/errors.h"

namespace kernelnn {

void ParameterSet::set(const std::string& name, Tensor value) {
  auto it = index_.find(name);
  if (it != index_.end()) {
    entries_[it->second].second = std::move(value);
    return;
  }
  index_[name] = entries_.size();
  entries_.emplace_back(name, std::move(value));
}

bool ParameterSet::contains(const std::string& name) const {
  return index_.count(name) != 0;
}

const Tensor& ParameterSet::at(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ConfigError("missing parameter '" + name + "'");
  return entries_[it->second].second;
}

Tensor& ParameterSet::at(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw ConfigError("missing parameter '" + name + "'");
  return entries_[it->second].second;
}

std::size_t ParameterSet::num_values() const {
  std::size_t n = 0;
  for (const auto& [name, t] : entries_) n += t.size();
  return n;
}

Var ParamBinder::get(const std::string& name) {
  auto it = bound_.find(name);
  if (it != bound_.end()) return it->second;
  const Tensor& value = params_.at(name);
  Var v = trainable_ ? tape_.leaf(value) : tape_.constant(value);
  bound_.emplace(name, v);
  return v;
}

ParameterSet ParamBinder::gradients(const Gradients& grads) const {
  ParameterSet out;
  for (const auto& [name, value] : params_.entries()) {
    auto it = bound_.find(name);
    out.set(name, it == bound_.end() ? Tensor(value.shape()) : grads.at(it->second));
  }
  return out;
}

}  // namespace kernelnn
