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


#ifndef KERNELNN_SEQUENCE_H_
#define KERNELNN_SEQUENCE_H_

#include <cstddef>
#include <vector>

#include "kernelnn/tensor.h"

namespace kernelnn {

// Ordered token feature vectors x_1 .. x_L, all of the same dimension.
struct FeatureSequence {
  std::vector<Tensor> tokens;

  std::size_t length() const { return tokens.size(); }
  bool empty() const { return tokens.empty(); }
  // Token dimension; 0 for the empty sequence.
  std::size_t dim() const { return tokens.empty() ? 0 : tokens[0].size(); }
  // x_{1:t}.
  FeatureSequence prefix(std::size_t t) const {
    return {std::vector<Tensor>(tokens.begin(), tokens.begin() + t)};
  }
  // Throws ShapeError when tokens disagree in dimension or are not vectors.
  void validate() const;
};

}  // namespace kernelnn

#endif  // KERNELNN_SEQUENCE_H_
