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


#include "kernelnn/graph_nn.h"

#include <cmath>

#include <fmt/format.h>

#include "kernelnn/errors.h"

namespace kernelnn {

namespace {

Tensor uniform_init(Rng& rng, Shape shape, std::size_t fan_in) {
  const double a = 1.0 / std::sqrt(static_cast<double>(fan_in));
  return random_tensor(rng, std::move(shape), -a, a);
}

Var checked(ParamBinder& params, const std::string& name, const Shape& shape) {
  Var v = params.get(name);
  if (v.value().shape() != shape) {
    throw ShapeError(fmt::format("parameter {} has shape {}, expected {}", name,
                                 shape_string(v.value().shape()),
                                 shape_string(shape)));
  }
  return v;
}

Var maybe_activate(const Var& x, Activation act) {
  return act == Activation::kIdentity ? x : ad::activation(x, act);
}

Var sum_in_order(Tape& tape, const std::vector<Var>& terms, std::size_t m) {
  if (terms.empty()) return tape.constant(Tensor({m}));
  if (terms.size() == 1) return terms[0];
  return ad::add_n(terms);
}

struct WalkLayerSpec {
  bool gated = false;
  bool aggregate_activation = false;  // act() on neighbor states
  Composition composition = Composition::kMultiplicative;
};

// States c_1..c_n of one walk layer over `inputs` (one Var per node).
std::vector<std::vector<Var>> walk_states(ParamBinder& params, int layer,
                                          const FeatureGraph& g,
                                          std::span<const Var> inputs,
                                          const GraphModelConfig& cfg,
                                          const WalkLayerSpec& spec) {
  Tape& tape = params.tape();
  const std::size_t m = cfg.hidden;
  const std::size_t d = cfg.layer_input_dim(layer);
  const auto n = static_cast<std::size_t>(cfg.n);
  const std::size_t nodes = g.num_nodes();
  for (const Var& x : inputs) {
    if (x.value().shape() != Shape{d}) {
      throw ShapeError(fmt::format("layer {} expects node inputs of shape [{}], got {}",
                                   layer, d, shape_string(x.value().shape())));
    }
  }

  std::vector<Var> W;
  for (std::size_t j = 1; j <= n; ++j) {
    W.push_back(checked(params, graph_param_name(layer, fmt::format("W{}", j)), {m, d}));
  }
  Var gate_U, gate_b;
  std::vector<std::vector<Var>> gates;  // gates[v][k] for neighbors[v][k]
  if (spec.gated) {
    if (!params.has("g.gate_U") || !params.has("g.gate_b")) {
      throw ConfigError("gated graph model needs parameters g.gate_U and g.gate_b");
    }
    gate_U = checked(params, "g.gate_U", {m, 2 * d});
    gate_b = checked(params, "g.gate_b", {m});
    gates.resize(nodes);
    for (std::size_t v = 0; v < nodes; ++v) {
      for (std::size_t u : g.neighbors[v]) {
        gates[v].push_back(ad::sigmoid(
            ad::add(ad::matvec(gate_U, ad::concat(inputs[u], inputs[v])), gate_b)));
      }
    }
  }
  const auto has = walk_existence(g, n);

  std::vector<std::vector<Var>> c(n, std::vector<Var>(nodes));
  for (std::size_t v = 0; v < nodes; ++v) c[0][v] = ad::matvec(W[0], inputs[v]);
  for (std::size_t j = 1; j < n; ++j) {
    for (std::size_t v = 0; v < nodes; ++v) {
      if (cfg.mask_empty_walks && !has[j][v]) {
        c[j][v] = tape.constant(Tensor({m}));
        continue;
      }
      const Var wx = ad::matvec(W[j], inputs[v]);
      std::vector<Var> terms;
      const auto& nb = g.neighbors[v];
      for (std::size_t k = 0; k < nb.size(); ++k) {
        Var s = c[j - 1][nb[k]];
        if (spec.aggregate_activation) s = maybe_activate(s, cfg.activation);
        if (spec.gated) s = ad::mul(gates[v][k], s);
        terms.push_back(s);
      }
      Var agg = sum_in_order(tape, terms, m);
      if (!spec.gated) agg = ad::scale(agg, cfg.lambda);
      c[j][v] = spec.composition == Composition::kMultiplicative
                    ? ad::mul(agg, wx)
                    : ad::add(wx, agg);
    }
  }
  return c;
}

Var sum_nodes(Tape& tape, const std::vector<Var>& values, std::size_t m) {
  return sum_in_order(tape, values, m);
}

}  // namespace

void GraphModelConfig::validate() const {
  if (n < 1) throw ConfigError(fmt::format("walk order n must be >= 1, got {}", n));
  if (layers < 1) throw ConfigError(fmt::format("layers must be >= 1, got {}", layers));
  if (input_dim == 0 || hidden == 0) {
    throw ConfigError("input_dim and hidden must be positive");
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ConfigError(fmt::format("lambda must be >= 0, got {}", lambda));
  }
  const bool single = kind == GraphModelKind::kRandomWalk ||
                      kind == GraphModelKind::kGeneralized ||
                      kind == GraphModelKind::kGatedRandomWalk;
  if (single && layers != 1) {
    throw ConfigError("random-walk, generalized and gated graph models have one layer");
  }
}

std::size_t GraphModelConfig::layer_input_dim(int layer) const {
  if (kind == GraphModelKind::kDeep && layer > 0) return hidden;
  return input_dim;
}

std::string graph_param_name(int layer, const std::string& what) {
  return fmt::format("g.{}.{}", layer, what);
}

ParameterSet init_graph_params(const GraphModelConfig& cfg, Rng& rng) {
  cfg.validate();
  ParameterSet params;
  const std::size_t m = cfg.hidden;
  const std::size_t d = cfg.input_dim;
  for (int l = 0; l < cfg.layers; ++l) {
    const std::size_t in = cfg.layer_input_dim(l);
    for (int j = 1; j <= cfg.n; ++j) {
      params.set(graph_param_name(l, fmt::format("W{}", j)),
                 uniform_init(rng, {m, in}, in));
    }
    if (cfg.kind == GraphModelKind::kDeep) {
      params.set(graph_param_name(l, "U"), uniform_init(rng, {m, m}, m));
    }
  }
  if (cfg.kind == GraphModelKind::kGatedRandomWalk) {
    params.set("g.gate_U", uniform_init(rng, {m, 2 * d}, 2 * d));
    const double b = cfg.lambda > 0.0 && cfg.lambda < 1.0 ? logit(cfg.lambda) : 0.0;
    params.set("g.gate_b", Tensor({m}, b));
  }
  if (cfg.kind == GraphModelKind::kWl) {
    params.set("wl.U1", uniform_init(rng, {d, d}, d));
    params.set("wl.U2", uniform_init(rng, {d, d}, d));
    params.set("wl.V", uniform_init(rng, {d, d}, d));
  }
  return params;
}

std::vector<Tensor> graph_layer_weights(const ParameterSet& params,
                                        const GraphModelConfig& cfg, int layer) {
  std::vector<Tensor> w;
  for (int j = 1; j <= cfg.n; ++j) {
    w.push_back(params.at(graph_param_name(layer, fmt::format("W{}", j))));
  }
  return w;
}

RelabelParams wl_relabel_params(const ParameterSet& params,
                                const GraphModelConfig& cfg) {
  return {params.at("wl.U1"), params.at("wl.U2"), params.at("wl.V"),
          cfg.activation};
}

GraphForwardVars graph_forward_vars(ParamBinder& params, const FeatureGraph& g,
                                    std::span<const Var> features,
                                    const GraphModelConfig& cfg) {
  cfg.validate();
  g.validate();
  if (features.size() != g.num_nodes()) {
    throw ContractError(fmt::format("{} feature vars for {} nodes", features.size(),
                                    g.num_nodes()));
  }
  Tape& tape = params.tape();
  const std::size_t m = cfg.hidden;
  const auto n = static_cast<std::size_t>(cfg.n);
  GraphForwardVars out;

  switch (cfg.kind) {
    case GraphModelKind::kRandomWalk:
    case GraphModelKind::kGeneralized:
    case GraphModelKind::kGatedRandomWalk: {
      WalkLayerSpec spec;
      if (cfg.kind == GraphModelKind::kGeneralized) {
        spec.aggregate_activation = true;
        spec.composition = cfg.composition;
      }
      spec.gated = cfg.kind == GraphModelKind::kGatedRandomWalk;
      out.c.push_back(walk_states(params, 0, g, features, cfg, spec));
      out.h_node.push_back(out.c[0][n - 1]);
      out.h_graph_layer.push_back(sum_nodes(tape, out.c[0][n - 1], m));
      out.h_graph = maybe_activate(out.h_graph_layer[0], cfg.activation);
      break;
    }
    case GraphModelKind::kDeep: {
      WalkLayerSpec spec;
      spec.aggregate_activation = true;
      spec.composition = cfg.composition;
      std::vector<Var> inputs(features.begin(), features.end());
      for (int l = 0; l < cfg.layers; ++l) {
        out.c.push_back(walk_states(params, l, g, inputs, cfg, spec));
        const Var U = checked(params, graph_param_name(l, "U"), {m, m});
        std::vector<Var> h;
        for (const Var& cn : out.c.back()[n - 1]) {
          h.push_back(maybe_activate(ad::matvec(U, cn), cfg.activation));
        }
        out.h_graph_layer.push_back(sum_nodes(tape, h, m));
        out.h_node.push_back(h);
        inputs = std::move(h);
      }
      out.h_graph = out.h_graph_layer.back();
      break;
    }
    case GraphModelKind::kWl: {
      const std::size_t d = cfg.input_dim;
      const Var U1 = checked(params, "wl.U1", {d, d});
      const Var U2 = checked(params, "wl.U2", {d, d});
      const Var V = checked(params, "wl.V", {d, d});
      std::vector<Var> h(features.begin(), features.end());
      for (int l = 0; l < cfg.layers; ++l) {
        out.c.push_back(walk_states(params, l, g, h, cfg, WalkLayerSpec{}));
        out.h_graph_layer.push_back(sum_nodes(tape, out.c.back()[n - 1], m));
        std::vector<Var> messages;
        for (const Var& x : h) {
          messages.push_back(maybe_activate(ad::matvec(V, x), cfg.activation));
        }
        std::vector<Var> next;
        for (std::size_t v = 0; v < g.num_nodes(); ++v) {
          std::vector<Var> terms;
          for (std::size_t u : g.neighbors[v]) terms.push_back(messages[u]);
          const Var agg = sum_in_order(tape, terms, d);
          next.push_back(maybe_activate(
              ad::add(ad::matvec(U1, h[v]), ad::matvec(U2, agg)), cfg.activation));
        }
        out.h_node.push_back(next);
        h = std::move(next);
      }
      out.h_graph = sum_in_order(tape, out.h_graph_layer, m);
      break;
    }
  }
  return out;
}

GraphStateTrace to_trace(const GraphForwardVars& vars) {
  GraphStateTrace trace;
  for (const auto& layer : vars.c) {
    auto& cl = trace.c.emplace_back();
    for (const auto& cj : layer) {
      auto& values = cl.emplace_back();
      for (const Var& v : cj) values.push_back(v.value());
    }
  }
  for (const auto& layer : vars.h_node) {
    auto& hl = trace.h_node.emplace_back();
    for (const Var& v : layer) hl.push_back(v.value());
  }
  for (const Var& v : vars.h_graph_layer) trace.h_graph_layer.push_back(v.value());
  trace.h_graph = vars.h_graph.value();
  return trace;
}

GraphStateTrace graph_forward(const FeatureGraph& g, const ParameterSet& params,
                              const GraphModelConfig& cfg) {
  Tape tape;
  ParamBinder binder(tape, params, false);
  std::vector<Var> features;
  for (const Tensor& f : g.features) features.push_back(tape.constant(f));
  return to_trace(graph_forward_vars(binder, g, features, cfg));
}

GraphStateTrace rw_forward(const FeatureGraph& g, const ParameterSet& params,
                           GraphModelConfig cfg) {
  cfg.kind = GraphModelKind::kRandomWalk;
  return graph_forward(g, params, cfg);
}

GraphStateTrace generalized_forward(const FeatureGraph& g, const ParameterSet& params,
                                    GraphModelConfig cfg) {
  cfg.kind = GraphModelKind::kGeneralized;
  return graph_forward(g, params, cfg);
}

GraphStateTrace deep_forward(const FeatureGraph& g, const ParameterSet& params,
                             GraphModelConfig cfg) {
  cfg.kind = GraphModelKind::kDeep;
  return graph_forward(g, params, cfg);
}

GraphStateTrace wl_forward(const FeatureGraph& g, const ParameterSet& params,
                           GraphModelConfig cfg) {
  cfg.kind = GraphModelKind::kWl;
  return graph_forward(g, params, cfg);
}

GraphStateTrace gated_rw_forward(const FeatureGraph& g, const ParameterSet& params,
                                 GraphModelConfig cfg) {
  cfg.kind = GraphModelKind::kGatedRandomWalk;
  return graph_forward(g, params, cfg);
}

std::vector<Tensor> reparameterized_iterate(const FeatureGraph& g,
                                            const std::vector<RelabelParams>& layers,
                                            Composition composition) {
  g.validate();
  std::vector<Tensor> h = g.features;
  for (const RelabelParams& p : layers) {
    std::vector<Tensor> messages;
    for (const Tensor& x : h) messages.push_back(activate(p.activation, matvec(p.V, x)));
    std::vector<Tensor> next;
    for (std::size_t v = 0; v < g.num_nodes(); ++v) {
      Tensor agg({p.V.rows()});
      for (std::size_t u : g.neighbors[v]) add_scaled_into(agg, messages[u]);
      const Tensor own = matvec(p.U1, h[v]);
      const Tensor nb = matvec(p.U2, agg);
      next.push_back(activate(p.activation, composition == Composition::kMultiplicative
                                                 ? hadamard(own, nb)
                                                 : add(own, nb)));
    }
    h = std::move(next);
  }
  return h;
}

}  // namespace kernelnn
