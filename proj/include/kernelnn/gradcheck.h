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


#ifndef KERNELNN_GRADCHECK_H_
#define KERNELNN_GRADCHECK_H_

#include <functional>

#include "kernelnn/tensor.h"

namespace kernelnn {

using ScalarFn = std::function<double(const Tensor&)>;

// Central differences (f(x + eps e_i) - f(x - eps e_i)) / (2 eps), one
// coordinate at a time. Independent of the tape; used as the gradient oracle.
Tensor finite_diff_grad(const ScalarFn& f, const Tensor& x, double eps = 1e-5);

// |a - b| / max(|a|, |b|, floor).
double relative_error(double a, double b, double floor = 0.0);

// Largest entrywise relative_error over two same-shaped tensors.
double max_relative_error(const Tensor& a, const Tensor& b, double floor = 0.0);

// max_i |a_i - b_i| / max_i |b_i|: error relative to the reference's scale.
double normwise_relative_error(const Tensor& actual, const Tensor& reference);

}  // namespace kernelnn

#endif  // KERNELNN_GRADCHECK_H_
