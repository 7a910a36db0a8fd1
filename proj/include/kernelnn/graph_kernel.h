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


#ifndef KERNELNN_GRAPH_KERNEL_H_
#define KERNELNN_GRAPH_KERNEL_H_

#include <cstddef>
#include <span>
#include <vector>

#include "kernelnn/activation.h"
#include "kernelnn/graph.h"
#include "kernelnn/seq_kernel.h"
#include "kernelnn/tensor.h"

namespace kernelnn {

// Brute-force graph kernels. Walks have n nodes and carry one decay factor
// per edge. A walk starts at a node and follows its neighbor list.

struct GraphKernelConfig {
  int n = 2;  // nodes per walk
  double lambda = 0.5;
  Composition composition = Composition::kMultiplicative;
  Activation activation = Activation::kIdentity;
  int depth = 1;

  void validate() const;
};

inline constexpr std::size_t kMaxOracleNodes = 8;

using Walk = std::vector<std::size_t>;

// Every walk of n nodes, in lexicographic order of node indices.
std::vector<Walk> enumerate_walks(const FeatureGraph& g, int n);

// lambda^{n-1} * sum over walk pairs of prod_i <f_{x_i}, f_{y_i}>.
double random_walk_kernel(const FeatureGraph& g, const FeatureGraph& h,
                          const GraphKernelConfig& cfg);

// Recursive local kernel of order cfg.n:
//   K^1(v,v') = <f_v, f_v'>
//   K^j(v,v') = <f_v, f_v'> o lambda * sum_{u in N(v), u' in N(v')} K^{j-1}(u,u')
// with o the configured composition, and K^j forced to 0 when v or v' starts
// no walk of j nodes. Identity activation only.
double local_kernel(std::size_t v, std::size_t v2, const FeatureGraph& g,
                    const FeatureGraph& h, const GraphKernelConfig& cfg);

// K^{(L,n)}_loc for all node pairs: entry (v, v') of a |V| x |V'| matrix.
// Layer l > 1 replaces <f_v, f_v'> by K^{(l-1,n)}_loc(v,v'). Identity
// activation only.
Tensor deep_local_kernel_matrix(const FeatureGraph& g, const FeatureGraph& h,
                                const GraphKernelConfig& cfg);

double deep_local_kernel(std::size_t v, std::size_t v2, const FeatureGraph& g,
                         const FeatureGraph& h, const GraphKernelConfig& cfg);

// sum_{v,v'} K^{(L,n)}_loc(v,v').
double deep_graph_kernel(const FeatureGraph& g, const FeatureGraph& h,
                         const GraphKernelConfig& cfg);

// Directed chain of n nodes; node p carries row `row` of weights[n-1-p] and
// has a single arc p -> p+1. Its only n-node walk visits W^(n), ..., W^(1).
FeatureGraph reference_walk(std::span<const Tensor> weights, std::size_t row,
                            std::size_t order);

struct RelabelParams {
  Tensor U1;  // [d' x d]
  Tensor U2;  // [d' x k]
  Tensor V;   // [k x d]
  Activation activation = Activation::kIdentity;
};

// r(v) = act(U1 f_v + U2 sum_{u in N(v)} act(V f_u)); topology unchanged.
FeatureGraph wl_relabel(const FeatureGraph& g, const RelabelParams& p);

// sum_{i=0}^{depth} random_walk_kernel(r^i(G), r^i(G')).
double wl_kernel(const FeatureGraph& g, const FeatureGraph& h,
                 const GraphKernelConfig& base, int depth,
                 const RelabelParams& p);

// sum_{i=0}^{L} random_walk_kernel(r^i(G), references[i]) with L =
// references.size(); the i = L term pairs r^L(G) with no reference and is 0.
// Evaluates the WL kernel against a fixed per-iteration reference graph.
double wl_kernel_reference(const FeatureGraph& g, const GraphKernelConfig& base,
                           std::span<const FeatureGraph> references,
                           const RelabelParams& p);

struct EdgeGateParams {
  Tensor U;  // [m x 2d]
  Tensor b;  // [m]
};

// Per-coordinate gate sigma(U [a, b] + b) for the feature pair (a, b).
Tensor edge_gate(const EdgeGateParams& p, const Tensor& a, const Tensor& b);

// Display form: sum over walk pairs of prod_{i=1}^{n}
// gate(f_{x_i}, f_{y_i}) * <f_{x_i}, f_{y_i}>, per coordinate.
Tensor gated_random_walk_kernel(const FeatureGraph& g, const FeatureGraph& h,
                                const EdgeGateParams& p, int n);

// Form matching the gated graph recurrence: each step x_i -> x_{i+1} of a walk
// in g carries gate(f_{x_{i+1}}, f_{x_i}) computed on g alone, so n = 1 is
// gate-free. Not symmetric in (g, h).
Tensor gated_random_walk_kernel_recurrent(const FeatureGraph& g,
                                          const FeatureGraph& h,
                                          const EdgeGateParams& p, int n);

}  // namespace kernelnn

#endif  // KERNELNN_GRAPH_KERNEL_H_
