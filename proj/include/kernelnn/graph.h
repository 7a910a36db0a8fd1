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


#ifndef KERNELNN_GRAPH_H_
#define KERNELNN_GRAPH_H_

#include <cstddef>
#include <utility>
#include <vector>

#include "kernelnn/tensor.h"

namespace kernelnn {

// Node-featured graph with per-node neighbor lists. Undirected graphs store
// each edge in both lists; neighbor lists are kept sorted ascending so that
// aggregation order is reproducible.
struct FeatureGraph {
  std::vector<Tensor> features;
  std::vector<std::vector<std::size_t>> neighbors;
  bool directed = false;

  std::size_t num_nodes() const { return features.size(); }
  std::size_t dim() const { return features.empty() ? 0 : features[0].size(); }
  std::size_t num_arcs() const;

  // Builds a graph from an edge list. Undirected edges are mirrored.
  static FeatureGraph from_edges(
      std::vector<Tensor> features,
      const std::vector<std::pair<std::size_t, std::size_t>>& edges,
      bool directed = false);

  // Throws ShapeError / ContractError on bad dimensions, out-of-range
  // neighbors or asymmetric lists in an undirected graph.
  void validate() const;
};

// Relabels node v as perm[v]; features and adjacency move together.
FeatureGraph permute_nodes(const FeatureGraph& g,
                           const std::vector<std::size_t>& perm);

// has_walk[j-1][v]: some walk of j nodes starts at v following neighbor
// lists. Row 0 is all true.
std::vector<std::vector<bool>> walk_existence(const FeatureGraph& g,
                                              std::size_t max_nodes);

}  // namespace kernelnn

#endif  // KERNELNN_GRAPH_H_
