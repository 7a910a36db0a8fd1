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
#include "kernelnn/graph_kernel.h"
#include "kernelnn/graph_nn.h"
#include "kernelnn/random.h"

namespace kernelnn {
namespace {

GraphModelConfig config(GraphModelKind kind, int n) {
  GraphModelConfig cfg;
  cfg.kind = kind;
  cfg.n = n;
  cfg.input_dim = 2;
  cfg.hidden = 3;
  cfg.lambda = 0.6;
  cfg.activation = Activation::kTanh;
  return cfg;
}

void randomize_w(ParameterSet& params, Rng& rng) {
  for (auto& [name, value] : params.entries()) {
    if (name.find(".W") != std::string::npos) value = random_tensor(rng, value.shape());
  }
}

Tensor node_sum(const std::vector<Tensor>& states) {
  Tensor s(states.at(0).shape());
  for (const Tensor& t : states) add_scaled_into(s, t);
  return s;
}

TEST_CASE("random-walk layer with one node per walk") {
  Rng rng(1);
  const GraphModelConfig cfg = config(GraphModelKind::kRandomWalk, 1);
  const ParameterSet params = init_graph_params(cfg, rng);
  const FeatureGraph g = random_graph(rng, 4, 2, 0.5);
  const GraphStateTrace trace = rw_forward(g, params, cfg);
  const Tensor& W = params.at("g.0.W1");
  Tensor pre({3});
  for (std::size_t v = 0; v < 4; ++v) {
    CHECK(trace.c[0][0][v] == matvec(W, g.features[v]));
    add_scaled_into(pre, matvec(W, g.features[v]));
  }
  CHECK(max_abs(sub(trace.h_graph, activate(Activation::kTanh, pre))) <= 1e-15);
}

TEST_CASE("edgeless graph has no longer walks") {
  Rng rng(2);
  const GraphModelConfig cfg = config(GraphModelKind::kRandomWalk, 2);
  const ParameterSet params = init_graph_params(cfg, rng);
  const FeatureGraph g = random_graph(rng, 3, 2, 0.0);
  const GraphStateTrace trace = rw_forward(g, params, cfg);
  for (const Tensor& c : trace.c[0][1]) CHECK(max_abs(c) == 0.0);
  CHECK(trace.h_graph == Tensor({3}));

  GraphModelConfig gated = cfg;
  gated.kind = GraphModelKind::kGatedRandomWalk;
  const GraphStateTrace gt = gated_rw_forward(g, init_graph_params(gated, rng), gated);
  for (const Tensor& c : gt.c[0][1]) CHECK(max_abs(c) == 0.0);
}

TEST_CASE("readout equals the random walk kernel against the reference walk") {
  Rng rng(3);
  for (int n = 1; n <= 3; ++n) {
    GraphModelConfig cfg = config(GraphModelKind::kRandomWalk, n);
    ParameterSet params = init_graph_params(cfg, rng);
    randomize_w(params, rng);
    const FeatureGraph g = random_graph(rng, 5, 2, 0.5);
    const GraphStateTrace trace = rw_forward(g, params, cfg);
    const std::vector<Tensor> W = graph_layer_weights(params, cfg, 0);
    for (std::size_t k = 0; k < 3; ++k) {
      const double ref = random_walk_kernel(g, reference_walk(W, k, n), {n, cfg.lambda});
      CHECK(trace.h_graph_layer[0][k] == doctest::Approx(ref).epsilon(1e-10));
    }
  }
}

TEST_CASE("generalized layer with identity and product matches the random-walk layer") {
  Rng rng(4);
  GraphModelConfig cfg = config(GraphModelKind::kGeneralized, 3);
  cfg.activation = Activation::kIdentity;
  const ParameterSet params = init_graph_params(cfg, rng);
  const FeatureGraph g = random_graph(rng, 5, 2, 0.5);
  const GraphStateTrace a = generalized_forward(g, params, cfg);
  const GraphStateTrace b = rw_forward(g, params, cfg);
  CHECK(max_abs(sub(a.h_graph, b.h_graph)) <= 1e-14);
}

TEST_CASE("additive composition on an edgeless graph keeps the node terms") {
  Rng rng(5);
  GraphModelConfig cfg = config(GraphModelKind::kGeneralized, 3);
  cfg.composition = Composition::kAdditive;
  const ParameterSet params = init_graph_params(cfg, rng);
  const FeatureGraph g = random_graph(rng, 3, 2, 0.0);
  const GraphStateTrace trace = generalized_forward(g, params, cfg);
  const std::vector<Tensor> W = graph_layer_weights(params, cfg, 0);
  for (int j = 0; j < 3; ++j) {
    for (std::size_t v = 0; v < 3; ++v) {
      CHECK(trace.c[0][j][v] == matvec(W[j], g.features[v]));
    }
  }
}

TEST_CASE("single deep layer with identity readout matches the generalized layer") {
  Rng rng(6);
  GraphModelConfig cfg = config(GraphModelKind::kDeep, 2);
  cfg.activation = Activation::kIdentity;
  ParameterSet params = init_graph_params(cfg, rng);
  params.set("g.0.U", Tensor::identity(3));
  const FeatureGraph g = random_graph(rng, 5, 2, 0.5);
  const GraphStateTrace deep = deep_forward(g, params, cfg);
  GraphModelConfig gen = cfg;
  gen.kind = GraphModelKind::kGeneralized;
  const GraphStateTrace flat = generalized_forward(g, params, gen);
  CHECK(max_abs(sub(deep.h_graph, flat.h_graph)) <= 1e-14);
}

TEST_CASE("two-node deep stack equals the reparameterized iteration") {
  Rng rng(7);
  for (Composition comp : {Composition::kMultiplicative, Composition::kAdditive}) {
    GraphModelConfig cfg = config(GraphModelKind::kDeep, 2);
    cfg.input_dim = 3;
    cfg.layers = 3;
    cfg.composition = comp;
    ParameterSet params = init_graph_params(cfg, rng);
    std::vector<RelabelParams> layers;
    for (int l = 0; l < cfg.layers; ++l) {
      params.set(graph_param_name(l, "U"), Tensor::identity(3));
      const std::vector<Tensor> W = graph_layer_weights(params, cfg, l);
      layers.push_back({W[1], scale(Tensor::identity(3), cfg.lambda), W[0], cfg.activation});
    }
    const FeatureGraph g = random_graph(rng, 5, 3, 0.5);
    const GraphStateTrace trace = deep_forward(g, params, cfg);
    const std::vector<Tensor> h = reparameterized_iterate(g, layers, comp);
    for (std::size_t v = 0; v < 5; ++v) {
      CHECK(max_abs(sub(trace.h_node.back()[v], h[v])) <= 1e-13);
    }
  }
}

TEST_CASE("WL network") {
  Rng rng(8);
  SUBCASE("one iteration is the random-walk readout before the activation") {
    GraphModelConfig cfg = config(GraphModelKind::kWl, 2);
    const ParameterSet params = init_graph_params(cfg, rng);
    const FeatureGraph g = random_graph(rng, 5, 2, 0.5);
    const GraphStateTrace wl = wl_forward(g, params, cfg);
    GraphModelConfig rw = cfg;
    rw.kind = GraphModelKind::kRandomWalk;
    const GraphStateTrace plain = rw_forward(g, params, rw);
    CHECK(max_abs(sub(wl.h_graph, node_sum(plain.c[0][1]))) <= 1e-14);
  }
  SUBCASE("identity relabeling repeats the readout") {
    GraphModelConfig cfg = config(GraphModelKind::kWl, 2);
    cfg.layers = 3;
    cfg.activation = Activation::kIdentity;
    ParameterSet params = init_graph_params(cfg, rng);
    params.set("wl.U1", Tensor::identity(2));
    params.set("wl.U2", Tensor({2, 2}));
    for (int l = 1; l < 3; ++l) {
      for (int j = 1; j <= 2; ++j) {
        params.set(graph_param_name(l, "W" + std::to_string(j)),
                   params.at(graph_param_name(0, "W" + std::to_string(j))));
      }
    }
    const FeatureGraph g = random_graph(rng, 4, 2, 0.6);
    const GraphStateTrace trace = wl_forward(g, params, cfg);
    CHECK(max_abs(sub(trace.h_graph, scale(trace.h_graph_layer[0], 3.0))) <= 1e-13);
  }
  SUBCASE("identity activation matches the chain construction") {
    GraphModelConfig cfg = config(GraphModelKind::kWl, 2);
    cfg.layers = 2;
    cfg.activation = Activation::kIdentity;
    ParameterSet params = init_graph_params(cfg, rng);
    randomize_w(params, rng);
    const FeatureGraph g = random_graph(rng, 5, 2, 0.5);
    const GraphStateTrace trace = wl_forward(g, params, cfg);
    const RelabelParams relabel = wl_relabel_params(params, cfg);
    for (std::size_t i = 0; i < 3; ++i) {
      const std::vector<FeatureGraph> refs = {
          reference_walk(graph_layer_weights(params, cfg, 0), i, 2),
          reference_walk(graph_layer_weights(params, cfg, 1), i, 2)};
      CHECK(trace.h_graph[i] ==
            doctest::Approx(wl_kernel_reference(g, {2, cfg.lambda}, refs, relabel))
                .epsilon(1e-8));
    }
  }
}

TEST_CASE("gated walk network") {
  Rng rng(9);
  GraphModelConfig cfg = config(GraphModelKind::kGatedRandomWalk, 3);
  ParameterSet params = init_graph_params(cfg, rng);
  randomize_w(params, rng);
  params.set("g.gate_U", random_tensor(rng, {3, 4}));
  const FeatureGraph g = random_graph(rng, 5, 2, 0.5);
  const GraphStateTrace trace = gated_rw_forward(g, params, cfg);
  const EdgeGateParams gate{params.at("g.gate_U"), params.at("g.gate_b")};
  const std::vector<Tensor> W = graph_layer_weights(params, cfg, 0);
  for (std::size_t k = 0; k < 3; ++k) {
    const Tensor ref = gated_random_walk_kernel_recurrent(g, reference_walk(W, k, 3), gate, 3);
    CHECK(trace.h_graph_layer[0][k] == doctest::Approx(ref[k]).epsilon(1e-10));
  }
  ParameterSet constant = params;
  constant.set("g.gate_U", Tensor({3, 4}));
  constant.set("g.gate_b", Tensor({3}, logit(cfg.lambda)));
  GraphModelConfig rw = cfg;
  rw.kind = GraphModelKind::kRandomWalk;
  CHECK(max_abs(sub(gated_rw_forward(g, constant, cfg).h_graph, rw_forward(g, params, rw).h_graph)) <=
        1e-12);
}

TEST_CASE("readouts are invariant to node order") {
  Rng rng(10);
  for (GraphModelKind kind : {GraphModelKind::kRandomWalk, GraphModelKind::kGeneralized,
                              GraphModelKind::kDeep, GraphModelKind::kWl,
                              GraphModelKind::kGatedRandomWalk}) {
    GraphModelConfig cfg = config(kind, 2);
    if (kind == GraphModelKind::kDeep || kind == GraphModelKind::kWl) cfg.layers = 2;
    const ParameterSet params = init_graph_params(cfg, rng);
    const FeatureGraph g = random_graph(rng, 5, 2, 0.5);
    const FeatureGraph p = permute_nodes(g, {4, 2, 0, 3, 1});
    CHECK(max_abs(sub(graph_forward(g, params, cfg).h_graph, graph_forward(p, params, cfg).h_graph)) <=
          1e-12);
  }
}

TEST_CASE("graph config validation") {
  GraphModelConfig cfg = config(GraphModelKind::kRandomWalk, 2);
  cfg.layers = 2;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.layers = 1;
  cfg.n = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

}  // namespace
}  // namespace kernelnn
