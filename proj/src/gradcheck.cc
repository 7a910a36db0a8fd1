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


#include "kernelnn/gradcheck.h"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "kernelnn/errors.h"

namespace kernelnn {

Tensor finite_diff_grad(const ScalarFn& f, const Tensor& x, double eps) {
  if (!(eps > 0.0)) throw ContractError("finite_diff_grad: eps must be > 0");
  Tensor grad(x.shape());
  Tensor probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + eps;
    const double fp = f(probe);
    probe[i] = orig - eps;
    const double fm = f(probe);
    probe[i] = orig;
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      throw NumericalError(fmt::format(
          "finite_diff_grad: non-finite function value at coordinate {}", i));
    }
    grad[i] = (fp - fm) / (2.0 * eps);
  }
  return grad;
}

double relative_error(double a, double b, double floor) {
  const double diff = std::abs(a - b);
  if (diff == 0.0) return 0.0;
  const double denom = std::max({std::abs(a), std::abs(b), floor});
  return diff / denom;
}

double max_relative_error(const Tensor& a, const Tensor& b, double floor) {
  require_same_shape(a, b, "max_relative_error");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, relative_error(a[i], b[i], floor));
  }
  return worst;
}

double normwise_relative_error(const Tensor& actual, const Tensor& reference) {
  require_same_shape(actual, reference, "normwise_relative_error");
  double diff = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    diff = std::max(diff, std::abs(actual[i] - reference[i]));
  }
  if (diff == 0.0) return 0.0;
  const double scale = max_abs(reference);
  return scale > 0.0 ? diff / scale : diff;
}

}  // namespace kernelnn
