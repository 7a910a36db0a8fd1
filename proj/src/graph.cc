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


#include "kernelnn/graph.h"

#include <algorithm>

#include <fmt/format.h>

#include "kernelnn/errors.h"

namespace kernelnn {

std::size_t FeatureGraph::num_arcs() const {
  std::size_t n = 0;
  for (const auto& nb : neighbors) n += nb.size();
  return n;
}

FeatureGraph FeatureGraph::from_edges(
    std::vector<Tensor> features,
    const std::vector<std::pair<std::size_t, std::size_t>>& edges,
    bool directed) {
  FeatureGraph g;
  g.directed = directed;
  g.neighbors.resize(features.size());
  g.features = std::move(features);
  for (auto [u, v] : edges) {
    if (u >= g.num_nodes() || v >= g.num_nodes()) {
      throw ContractError(fmt::format("edge ({}, {}) outside {} nodes", u, v,
                                      g.num_nodes()));
    }
    g.neighbors[u].push_back(v);
    if (!directed && u != v) g.neighbors[v].push_back(u);
  }
  for (auto& nb : g.neighbors) std::sort(nb.begin(), nb.end());
  g.validate();
  return g;
}

void FeatureGraph::validate() const {
  if (neighbors.size() != features.size()) {
    throw ContractError(fmt::format("{} neighbor lists for {} nodes",
                                    neighbors.size(), features.size()));
  }
  for (std::size_t v = 0; v < features.size(); ++v) {
    if (features[v].rank() != 1 || features[v].size() != dim()) {
      throw ShapeError(fmt::format("node {} has feature shape {}, expected [{}]",
                                   v, shape_string(features[v].shape()), dim()));
    }
    for (std::size_t u : neighbors[v]) {
      if (u >= features.size()) {
        throw ContractError(
            fmt::format("node {} lists neighbor {} outside the graph", v, u));
      }
      if (!directed) {
        const auto& back = neighbors[u];
        if (std::count(back.begin(), back.end(), v) !=
            std::count(neighbors[v].begin(), neighbors[v].end(), u)) {
          throw ContractError(fmt::format(
              "undirected graph has asymmetric edge {} -> {}", v, u));
        }
      }
    }
  }
}

FeatureGraph permute_nodes(const FeatureGraph& g,
                           const std::vector<std::size_t>& perm) {
  const std::size_t n = g.num_nodes();
  if (perm.size() != n) throw ContractError("permutation size mismatch");
  FeatureGraph out;
  out.directed = g.directed;
  out.features.resize(n);
  out.neighbors.resize(n);
  for (std::size_t v = 0; v < n; ++v) {
    out.features[perm[v]] = g.features[v];
    for (std::size_t u : g.neighbors[v]) out.neighbors[perm[v]].push_back(perm[u]);
  }
  for (auto& nb : out.neighbors) std::sort(nb.begin(), nb.end());
  return out;
}

std::vector<std::vector<bool>> walk_existence(const FeatureGraph& g,
                                              std::size_t max_nodes) {
  std::vector<std::vector<bool>> has(max_nodes,
                                     std::vector<bool>(g.num_nodes(), false));
  if (max_nodes == 0) return has;
  std::fill(has[0].begin(), has[0].end(), true);
  for (std::size_t j = 1; j < max_nodes; ++j) {
    for (std::size_t v = 0; v < g.num_nodes(); ++v) {
      for (std::size_t u : g.neighbors[v]) {
        if (has[j - 1][u]) {
          has[j][v] = true;
          break;
        }
      }
    }
  }
  return has;
}

}  // namespace kernelnn
