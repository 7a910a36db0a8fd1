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


#ifndef KERNELNN_GRAPH_NN_H_
#define KERNELNN_GRAPH_NN_H_

#include <string>
#include <vector>

#include "kernelnn/activation.h"
#include "kernelnn/autodiff.h"
#include "kernelnn/graph.h"
#include "kernelnn/graph_kernel.h"
#include "kernelnn/params.h"
#include "kernelnn/random.h"

namespace kernelnn {

enum class GraphModelKind {
  kRandomWalk,   // c_j[v] = lambda sum_u c_{j-1}[u] * W_j f_v, h_G = act(sum_v c_n[v])
  kGeneralized,  // c_j[v] = W_j f_v o lambda sum_u act(c_{j-1}[u])
  kDeep,         // stacked generalized layers with readout act(U c_n)
  kWl,           // random-walk states over WL-relabeled features
  kGatedRandomWalk,
};

struct GraphModelConfig {
  GraphModelKind kind = GraphModelKind::kRandomWalk;
  int n = 2;  // nodes per walk
  int layers = 1;
  std::size_t input_dim = 1;
  std::size_t hidden = 1;
  double lambda = 0.5;
  Composition composition = Composition::kMultiplicative;
  Activation activation = Activation::kIdentity;
  // Zeroes c_j[v] when v starts no walk of j nodes, as the deep local kernel
  // does. Only changes results for additive composition.
  bool mask_empty_walks = false;

  void validate() const;
  // Input dimension of layer l's W matrices.
  std::size_t layer_input_dim(int layer) const;
};

// Parameter names: g.{l}.W{j} [hidden x layer_input_dim], g.{l}.U [hidden x
// hidden] (deep readout), g.gate_U [hidden x 2 input_dim], g.gate_b [hidden],
// wl.U1 / wl.U2 / wl.V [input_dim x input_dim] (shared by all WL layers).
std::string graph_param_name(int layer, const std::string& what);

ParameterSet init_graph_params(const GraphModelConfig& cfg, Rng& rng);

// Matrices W^{(l,1)} .. W^{(l,n)} of one layer.
std::vector<Tensor> graph_layer_weights(const ParameterSet& params,
                                        const GraphModelConfig& cfg, int layer);

RelabelParams wl_relabel_params(const ParameterSet& params,
                                const GraphModelConfig& cfg);

struct GraphStateTrace {
  std::vector<std::vector<std::vector<Tensor>>> c;  // [layer][j][node]
  std::vector<std::vector<Tensor>> h_node;          // [layer][node]
  std::vector<Tensor> h_graph_layer;                // [layer]
  Tensor h_graph;
};

struct GraphForwardVars {
  std::vector<std::vector<std::vector<Var>>> c;
  std::vector<std::vector<Var>> h_node;
  std::vector<Var> h_graph_layer;
  Var h_graph;
};

// Builds the configured model on the binder's tape. `features` holds one Var
// per node.
GraphForwardVars graph_forward_vars(ParamBinder& params, const FeatureGraph& g,
                                    std::span<const Var> features,
                                    const GraphModelConfig& cfg);

GraphStateTrace to_trace(const GraphForwardVars& vars);

// Value-level entry points; each forces cfg.kind.
GraphStateTrace graph_forward(const FeatureGraph& g, const ParameterSet& params,
                              const GraphModelConfig& cfg);
GraphStateTrace rw_forward(const FeatureGraph& g, const ParameterSet& params,
                           GraphModelConfig cfg);
GraphStateTrace generalized_forward(const FeatureGraph& g, const ParameterSet& params,
                                    GraphModelConfig cfg);
GraphStateTrace deep_forward(const FeatureGraph& g, const ParameterSet& params,
                             GraphModelConfig cfg);
GraphStateTrace wl_forward(const FeatureGraph& g, const ParameterSet& params,
                           GraphModelConfig cfg);
GraphStateTrace gated_rw_forward(const FeatureGraph& g, const ParameterSet& params,
                                 GraphModelConfig cfg);

// h_v = act(U1 h_v o U2 sum_{u in N(v)} act(V h_u)), one application per
// entry of `layers`; each entry is (U1, U2, V).
std::vector<Tensor> reparameterized_iterate(
    const FeatureGraph& g, const std::vector<RelabelParams>& layers,
    Composition composition);

}  // namespace kernelnn

#endif  // KERNELNN_GRAPH_NN_H_
