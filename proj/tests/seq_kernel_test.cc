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


#include <cmath>

#include <doctest.h>

#include "kernelnn/errors.h"
#include "kernelnn/gram.h"
#include "kernelnn/random.h"
#include "kernelnn/seq_kernel.h"

namespace kernelnn {
namespace {

const Tensor e1 = Tensor::vector({1, 0});
const Tensor e2 = Tensor::vector({0, 1});

SeqKernelConfig mult(int n, double lambda) {
  return {n, lambda, Composition::kMultiplicative, Normalization::kUnnormalized};
}

TEST_CASE("string kernel examples") {
  const FeatureSequence x{{e1, e2}};
  for (double lambda : {0.0, 0.3, 0.9}) CHECK(string_kernel(x, x, mult(2, lambda)) == 1.0);
  CHECK(string_kernel({{e1, e1}}, {{e2, e2}}, mult(2, 0.5)) == 0.0);
  CHECK(string_kernel({{e1, e2, e1}}, {{e1, e1}}, mult(2, 0.5)) == doctest::Approx(0.5));
}

TEST_CASE("string kernel by hand, additive and normalized") {
  // x = (a, b), y = (c) with n = 1: weights lambda^1 and lambda^0.
  const FeatureSequence x{{Tensor::vector({2.0}), Tensor::vector({3.0})}};
  const FeatureSequence y{{Tensor::vector({5.0})}};
  const double lambda = 0.4;
  CHECK(string_kernel(x, y, mult(1, lambda)) == doctest::Approx(lambda * 10 + 15));
  SeqKernelConfig add{1, lambda, Composition::kAdditive, Normalization::kUnnormalized};
  CHECK(string_kernel(x, y, add) == doctest::Approx(lambda * 10 + 15));
  SeqKernelConfig norm = mult(1, lambda);
  norm.normalization = Normalization::kNormalized;
  // Normalized: divided by the weight mass (lambda + 1) of x and (1) of y.
  CHECK(string_kernel(x, y, norm) == doctest::Approx((lambda * 10 + 15) / (lambda + 1)));
}

TEST_CASE("short sequences give zero") {
  CHECK(string_kernel({{e1}}, {{e1, e2}}, mult(2, 0.5)) == 0.0);
  CHECK(string_kernel({}, {}, mult(1, 0.5)) == 0.0);
}

TEST_CASE("explicit feature map agrees with the kernel") {
  CHECK(explicit_feature_map({{e1}}, mult(1, 0.5)) == e1);
  CHECK(max_abs(explicit_feature_map({}, mult(2, 0.5), 2)) == 0.0);
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const FeatureSequence x = random_sequence(rng, 1 + rng.index(5), 2);
    const FeatureSequence y = random_sequence(rng, 1 + rng.index(5), 2);
    for (Composition comp : {Composition::kMultiplicative, Composition::kAdditive}) {
      for (Normalization norm : {Normalization::kUnnormalized, Normalization::kNormalized}) {
        const SeqKernelConfig cfg{2, rng.uniform(), comp, norm};
        const double k = string_kernel(x, y, cfg);
        const double phi = dot(explicit_feature_map(x, cfg, 2), explicit_feature_map(y, cfg, 2));
        CHECK(std::fabs(k - phi) <= 1e-12 * std::max(1.0, std::fabs(k)));
      }
    }
  }
}

TEST_CASE("string kernel is exactly symmetric") {
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const FeatureSequence x = random_sequence(rng, 1 + rng.index(6), 3);
    const FeatureSequence y = random_sequence(rng, 1 + rng.index(6), 3);
    const SeqKernelConfig cfg = mult(1 + static_cast<int>(rng.index(3)), rng.uniform());
    CHECK(string_kernel(x, y, cfg) == string_kernel(y, x, cfg));
  }
}

TEST_CASE("oracle guards") {
  Rng rng(1);
  const FeatureSequence big = random_sequence(rng, kMaxOracleLength + 1, 1);
  CHECK_THROWS_AS(string_kernel(big, big, mult(1, 0.5)), GuardError);
  const FeatureSequence x = random_sequence(rng, 6, 1);
  CHECK_THROWS_AS(string_kernel(x, x, mult(kMaxOracleOrder + 1, 0.5)), GuardError);
  CHECK_THROWS_AS(string_kernel(x, x, mult(0, 0.5)), ConfigError);
  CHECK_THROWS_AS(string_kernel(x, random_sequence(rng, 2, 2), mult(1, 0.5)), ShapeError);
}

TEST_CASE("gated string kernel state") {
  Rng rng(21);
  const std::vector<Tensor> W = {random_tensor(rng, {3, 2}), random_tensor(rng, {3, 2})};
  const FeatureSequence x = random_sequence(rng, 4, 2);
  const double lambda = 0.35;
  GateTrace constant;
  for (int t = 0; t < 4; ++t) constant.decay.push_back(Tensor({3}, lambda));
  for (std::size_t i = 0; i < 3; ++i) {
    const double gated = gated_string_kernel_state(x, constant, W, i);
    const double plain = string_kernel(x, reference_sequence(W, i, 2), mult(2, lambda));
    CHECK(gated == doctest::Approx(plain).epsilon(1e-12));
  }
  // |x| = n: no skipped steps, so the gate values do not matter.
  GateTrace random;
  for (int t = 0; t < 2; ++t) random.decay.push_back(random_tensor(rng, {3}, 0.1, 0.9));
  const FeatureSequence two = x.prefix(2);
  for (std::size_t i = 0; i < 3; ++i) {
    const double expect = dot(two.tokens[0], W[0].row(i)) * dot(two.tokens[1], W[1].row(i));
    CHECK(gated_string_kernel_state(two, random, W, i) == doctest::Approx(expect));
  }
}

TEST_CASE("unrolled state reduces to the string kernel for constant decay") {
  Rng rng(4);
  for (int n = 1; n <= 3; ++n) {
    const std::vector<Tensor> W = {random_tensor(rng, {2, 2}), random_tensor(rng, {2, 2}),
                                   random_tensor(rng, {2, 2})};
    const FeatureSequence x = random_sequence(rng, 5, 2);
    const std::vector<double> decay(5, 0.6);
    const ReferenceSequence ref = reference_sequence(W, 1, n);
    CHECK(unrolled_state(x, ref, decay, SeqVariant::kMultUnnorm) ==
          doctest::Approx(string_kernel(x, ref, mult(n, 0.6))).epsilon(1e-12));
  }
}

TEST_CASE("deep sequence kernel") {
  Rng rng(8);
  const FeatureSequence x = random_sequence(rng, 3, 2);
  const FeatureSequence y = random_sequence(rng, 3, 2);
  const SeqKernelConfig cfg = mult(2, 0.5);
  CHECK(deep_sequence_kernel(x, y, 1, cfg) == string_kernel(x, y, cfg));
  CHECK(deep_sequence_kernel(x.prefix(1), y, 2, cfg) == 0.0);
  CHECK(std::fabs(deep_sequence_kernel(x, y, 2, cfg) - deep_sequence_kernel(y, x, 2, cfg)) <=
        1e-12);
  CHECK_THROWS_AS(deep_sequence_kernel(x, y, 2, cfg, Activation::kTanh),
                  UnsupportedActivationError);
}

TEST_CASE("combinations are lexicographic") {
  std::vector<std::vector<std::size_t>> seen;
  for_each_combination(4, 2, [&](std::span<const std::size_t> idx) {
    seen.emplace_back(idx.begin(), idx.end());
  });
  const std::vector<std::vector<std::size_t>> expect = {{0, 1}, {0, 2}, {0, 3},
                                                        {1, 2}, {1, 3}, {2, 3}};
  CHECK(seen == expect);
}

TEST_CASE("gram matrix properties") {
  Rng rng(12);
  const FeatureSequence x = random_sequence(rng, 3, 2);
  const Tensor single = gram_matrix({x}, {mult(2, 0.5), 1});
  CHECK(single.shape() == Shape{1, 1});
  CHECK(single[0] >= 0.0);

  const FeatureSequence y = random_sequence(rng, 4, 2);
  const Tensor dup = gram_matrix({x, y, x}, {mult(2, 0.5), 1});
  for (std::size_t c = 0; c < 3; ++c) CHECK(dup.at(0, c) == dup.at(2, c));

  std::vector<FeatureSequence> set;
  for (int i = 0; i < 8; ++i) set.push_back(random_sequence(rng, 1 + rng.index(5), 2));
  const Spectrum s = spectrum(gram_matrix(set, {mult(2, 0.5), 1}));
  CHECK(s.symmetric);
  CHECK(s.min_eigenvalue >= -1e-8 * s.max_eigenvalue);
  CHECK(s.positive_semidefinite(1e-8));
}

TEST_CASE("serial and parallel gram matrices agree exactly") {
  Rng rng(13);
  std::vector<FeatureSequence> set;
  for (int i = 0; i < 7; ++i) set.push_back(random_sequence(rng, 1 + rng.index(5), 2));
  const PairKernel k = [&](std::size_t a, std::size_t b) {
    return string_kernel(set[a], set[b], mult(2, 0.7));
  };
  CHECK(gram_matrix_serial(set.size(), k) == gram_matrix_parallel(set.size(), k, 3));
}

TEST_CASE("range residual") {
  // Rank-1 Gram: only multiples of (1, 2) lie in the range.
  const Tensor gram = Tensor::matrix({{1, 2}, {2, 4}});
  CHECK(numerical_rank(gram) == 1);
  CHECK(range_residual(gram, Tensor::vector({3, 6})) < 1e-12);
  CHECK(range_residual(gram, Tensor::vector({1, 0})) > 0.5);
}

}  // namespace
}  // namespace kernelnn
