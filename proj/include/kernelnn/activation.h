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


#ifndef KERNELNN_ACTIVATION_H_
#define KERNELNN_ACTIVATION_H_

#include <string>
#include <string_view>

#include "kernelnn/tensor.h"

namespace kernelnn {

enum class Activation { kIdentity, kSigmoid, kTanh, kRelu, kQuadratic };

double activate(Activation act, double x);
// Derivative of activate(act, .) evaluated at the pre-activation x.
double activate_derivative(Activation act, double x);

Tensor activate(Activation act, const Tensor& x);

double sigmoid(double x);
// Inverse of sigmoid on (0, 1).
double logit(double p);

std::string_view to_string(Activation act);
Activation parse_activation(std::string_view name);

}  // namespace kernelnn

#endif  // KERNELNN_ACTIVATION_H_
