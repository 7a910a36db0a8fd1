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


#ifndef KERNELNN_RANDOM_H_
#define KERNELNN_RANDOM_H_

#include <cstdint>
#include <random>

#include "kernelnn/graph.h"
#include "kernelnn/sequence.h"
#include "kernelnn/tensor.h"

namespace kernelnn {

// Seeded generator with platform-independent draws (std distributions are
// implementation-defined, so uniform values are derived from raw bits).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [0, n).
  std::size_t index(std::size_t n) {
    return static_cast<std::size_t>(uniform() * static_cast<double>(n));
  }
  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

Tensor random_tensor(Rng& rng, Shape shape, double lo = -1.0, double hi = 1.0);

FeatureSequence random_sequence(Rng& rng, std::size_t length, std::size_t dim,
                                double lo = -1.0, double hi = 1.0);

// Undirected graph where each unordered pair is an edge with probability
// edge_prob. No self loops.
FeatureGraph random_graph(Rng& rng, std::size_t nodes, std::size_t dim,
                          double edge_prob, double lo = -1.0, double hi = 1.0);

}  // namespace kernelnn

#endif  // KERNELNN_RANDOM_H_
