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


#include "kernelnn/random.h"

namespace kernelnn {

Tensor random_tensor(Rng& rng, Shape shape, double lo, double hi) {
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = rng.uniform(lo, hi);
  return t;
}

FeatureSequence random_sequence(Rng& rng, std::size_t length, std::size_t dim,
                                double lo, double hi) {
  FeatureSequence x;
  x.tokens.reserve(length);
  for (std::size_t t = 0; t < length; ++t) {
    x.tokens.push_back(random_tensor(rng, {dim}, lo, hi));
  }
  return x;
}

FeatureGraph random_graph(Rng& rng, std::size_t nodes, std::size_t dim,
                          double edge_prob, double lo, double hi) {
  std::vector<Tensor> features;
  for (std::size_t v = 0; v < nodes; ++v) {
    features.push_back(random_tensor(rng, {dim}, lo, hi));
  }
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t u = 0; u < nodes; ++u) {
    for (std::size_t v = u + 1; v < nodes; ++v) {
      if (rng.bernoulli(edge_prob)) edges.emplace_back(u, v);
    }
  }
  return FeatureGraph::from_edges(std::move(features), edges, false);
}

}  // namespace kernelnn
