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


#include "kernelnn/activation.h"

#include <cmath>

#include "kernelnn/errors.h"

namespace kernelnn {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double logit(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw ContractError("logit: argument must lie in (0, 1)");
  }
  return std::log(p / (1.0 - p));
}

double activate(Activation act, double x) {
  switch (act) {
    case Activation::kIdentity:
      return x;
    case Activation::kSigmoid:
      return sigmoid(x);
    case Activation::kTanh:
      return std::tanh(x);
    case Activation::kRelu:
      return x > 0.0 ? x : 0.0;
    case Activation::kQuadratic:
      return x * x;
  }
  return x;
}

double activate_derivative(Activation act, double x) {
  switch (act) {
    case Activation::kIdentity:
      return 1.0;
    case Activation::kSigmoid: {
      const double s = sigmoid(x);
      return s * (1.0 - s);
    }
    case Activation::kTanh: {
      const double t = std::tanh(x);
      return 1.0 - t * t;
    }
    case Activation::kRelu:
      return x > 0.0 ? 1.0 : 0.0;
    case Activation::kQuadratic:
      return 2.0 * x;
  }
  return 1.0;
}

Tensor activate(Activation act, const Tensor& x) {
  Tensor out = x;
  if (act == Activation::kIdentity) return out;
  for (double& v : out.data()) v = activate(act, v);
  return out;
}

std::string_view to_string(Activation act) {
  switch (act) {
    case Activation::kIdentity:
      return "identity";
    case Activation::kSigmoid:
      return "sigmoid";
    case Activation::kTanh:
      return "tanh";
    case Activation::kRelu:
      return "relu";
    case Activation::kQuadratic:
      return "quadratic";
  }
  return "identity";
}

Activation parse_activation(std::string_view name) {
  if (name == "identity") return Activation::kIdentity;
  if (name == "sigmoid") return Activation::kSigmoid;
  if (name == "tanh") return Activation::kTanh;
  if (name == "relu") return Activation::kRelu;
  if (name == "quadratic") return Activation::kQuadratic;
  throw ConfigError("unknown activation '" + std::string(name) + "'");
}

}  // namespace kernelnn
