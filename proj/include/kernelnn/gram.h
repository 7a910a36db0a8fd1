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


#ifndef KERNELNN_GRAM_H_
#define KERNELNN_GRAM_H_

#include <cstddef>
#include <functional>
#include <vector>

#include "kernelnn/graph.h"
#include "kernelnn/sequence.h"
#include "kernelnn/seq_kernel.h"
#include "kernelnn/tensor.h"

namespace kernelnn {

// k(a, b) for items a, b of some indexed set. Must be safe to call
// concurrently.
using PairKernel = std::function<double(std::size_t, std::size_t)>;

// Evaluates the upper triangle and mirrors it, so the result is exactly
// symmetric. Serial reference implementation.
Tensor gram_matrix_serial(std::size_t count, const PairKernel& kernel);

// Same result as gram_matrix_serial, with the upper-triangle pairs spread
// over OpenMP threads. `threads` <= 0 uses the OpenMP default.
Tensor gram_matrix_parallel(std::size_t count, const PairKernel& kernel,
                            int threads = 0);

// Selects the sequence kernel for gram_matrix over sequences: depth 1 is
// string_kernel, depth > 1 is deep_sequence_kernel with identity activation.
struct SeqKernelSelector {
  SeqKernelConfig config;
  int depth = 1;
};

Tensor gram_matrix(const std::vector<FeatureSequence>& set,
                   const SeqKernelSelector& selector);

struct Spectrum {
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;
  bool symmetric = false;

  // min >= -tol * max (and max >= 0).
  bool positive_semidefinite(double tol) const;
};

Spectrum spectrum(const Tensor& gram);

// Relative residual ||f - P f|| / ||f|| of projecting `values` onto the
// column space of a symmetric PSD Gram matrix. Eigen-directions with
// eigenvalue <= rank_tol * max eigenvalue count as the null space.
double range_residual(const Tensor& gram, const Tensor& values,
                      double rank_tol = 1e-10);

// Numerical rank under the same threshold.
std::size_t numerical_rank(const Tensor& gram, double rank_tol = 1e-10);

}  // namespace kernelnn

#endif  // KERNELNN_GRAM_H_
