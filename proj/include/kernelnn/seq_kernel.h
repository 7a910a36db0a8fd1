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


#ifndef KERNELNN_SEQ_KERNEL_H_
#define KERNELNN_SEQ_KERNEL_H_

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "kernelnn/activation.h"
#include "kernelnn/sequence.h"
#include "kernelnn/tensor.h"

namespace kernelnn {

// Exhaustive string kernels over feature sequences. Everything here
// enumerates index tuples directly and is deliberately slow: these are the
// reference values the recurrent modules are checked against.

enum class Composition { kMultiplicative, kAdditive };
enum class Normalization { kUnnormalized, kNormalized };

// Recurrence variants of the sequence module. The oracle side lives here so
// that unrolled-sum references do not depend on the network code.
enum class SeqVariant {
  kMultUnnorm,  // c_j = l c_j + c_{j-1} * W x
  kMultNorm,    // c_j = l c_j + (1 - l) (c_{j-1} * W x)
  kAddNorm,     // c_j = l c_j + (1 - l) (c_{j-1} + W x)
};

struct SeqKernelConfig {
  int n = 2;
  double lambda = 0.5;
  Composition composition = Composition::kMultiplicative;
  Normalization normalization = Normalization::kUnnormalized;

  void validate() const;
};

// n tokens; token j is row i of W^{(j)}.
using ReferenceSequence = FeatureSequence;

// Per-step decay values lambda_t, t = 1..L, each a vector over hidden units.
struct GateTrace {
  std::vector<Tensor> decay;
};

inline constexpr std::size_t kMaxOracleLength = 16;
inline constexpr int kMaxOracleOrder = 4;
inline constexpr std::size_t kMaxFeatureMapSize = 1000000;

// Sum over all index tuples i_1 < ... < i_n of x and k_1 < ... < k_n of y of
// weight(x, i) * weight(y, k) * score, where weight(x, i) =
// lambda^{|x| - i_1 - n + 1} (0^0 = 1) and the score is the product
// (multiplicative) or sum (additive) of <x_{i_m}, y_{k_m}>. The normalized
// form divides by the sum of the weights alone. Returns 0 when either
// sequence is shorter than n.
double string_kernel(const FeatureSequence& x, const FeatureSequence& y,
                     const SeqKernelConfig& cfg);

// phi_n(x) materialized: d^n entries for the multiplicative kernel (flattened
// outer products, first factor slowest), n*d entries for the additive one
// (weighted concatenations). `dim` gives d when x is empty.
Tensor explicit_feature_map(const FeatureSequence& x, const SeqKernelConfig& cfg,
                            std::size_t dim = 0);

// Row `row` of each of the first `order` matrices.
ReferenceSequence reference_sequence(std::span<const Tensor> weights,
                                     std::size_t row, std::size_t order);

// Closed form of the recurrent state c_n[|x|][i] obtained by unrolling the
// recurrence of `variant` with per-step scalar decays (decay[t-1] is the
// decay applied at step t). `reference` holds w_i^{(1)} .. w_i^{(n)}.
double unrolled_state(const FeatureSequence& x, const ReferenceSequence& reference,
                      std::span<const double> decay, SeqVariant variant);

// Gated string kernel state for hidden coordinate i: unrolled_state with the
// per-step gate values of coordinate i. Gates must lie strictly inside (0,1).
double gated_string_kernel_state(const FeatureSequence& x, const GateTrace& gates,
                                 std::span<const Tensor> weights,
                                 std::size_t coordinate,
                                 SeqVariant variant = SeqVariant::kMultUnnorm);

// Recursive deep kernel: K^(1) = string_kernel and K^(l+1) replaces each
// token inner product <x_i, y_k> by K^(l)(x_{1:i}, y_{1:k}). Exact only for
// the identity activation; others are rejected.
double deep_sequence_kernel(const FeatureSequence& x, const FeatureSequence& y,
                            int depth, const SeqKernelConfig& cfg,
                            Activation act = Activation::kIdentity);

// Calls fn(indices) for every strictly increasing tuple of `order` indices in
// [0, length), in lexicographic order.
void for_each_combination(std::size_t length, std::size_t order,
                          const std::function<void(std::span<const std::size_t>)>& fn);

}  // namespace kernelnn

#endif  // KERNELNN_SEQ_KERNEL_H_
