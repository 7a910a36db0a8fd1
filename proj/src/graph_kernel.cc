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


#include "kernelnn/graph_kernel.h"

#include <algorithm>
#include <cmath>
#include <functional>

#include <fmt/format.h>

#include "kernelnn/errors.h"

namespace kernelnn {

namespace {

void check_pair(const FeatureGraph& g, const FeatureGraph& h) {
  g.validate();
  h.validate();
  if (g.num_nodes() > 0 && h.num_nodes() > 0 && g.dim() != h.dim()) {
    throw ShapeError(fmt::format("graph feature dimensions differ: {} vs {}",
                                 g.dim(), h.dim()));
  }
}

void guard_graph(const FeatureGraph& g, int n) {
  if (g.num_nodes() > kMaxOracleNodes) {
    throw GuardError(fmt::format("oracle refuses graphs with more than {} nodes (got {})",
                                 kMaxOracleNodes, g.num_nodes()));
  }
  if (n > kMaxOracleOrder) {
    throw GuardError(fmt::format("oracle refuses walk order n > {} (got {})",
                                 kMaxOracleOrder, n));
  }
}

void require_identity(Activation act) {
  if (act != Activation::kIdentity) {
    throw UnsupportedActivationError(fmt::format(
        "exact graph kernel oracle needs the identity activation, got {}",
        to_string(act)));
  }
}

// Total order on graphs used to evaluate symmetric kernels in one fixed
// argument order.
bool canonical_less(const FeatureGraph& a, const FeatureGraph& b) {
  if (a.num_nodes() != b.num_nodes()) return a.num_nodes() < b.num_nodes();
  for (std::size_t v = 0; v < a.num_nodes(); ++v) {
    const auto fa = a.features[v].data();
    const auto fb = b.features[v].data();
    if (!std::equal(fa.begin(), fa.end(), fb.begin(), fb.end())) {
      return std::lexicographical_compare(fa.begin(), fa.end(), fb.begin(),
                                          fb.end());
    }
  }
  if (a.neighbors != b.neighbors) return a.neighbors < b.neighbors;
  return a.directed < b.directed;
}

Tensor node_inner_products(const FeatureGraph& g, const FeatureGraph& h) {
  Tensor k({g.num_nodes(), h.num_nodes()});
  for (std::size_t v = 0; v < g.num_nodes(); ++v) {
    for (std::size_t w = 0; w < h.num_nodes(); ++w) {
      k.at(v, w) = dot(g.features[v], h.features[w]);
    }
  }
  return k;
}

double compose(Composition c, double a, double b) {
  return c == Composition::kMultiplicative ? a * b : a + b;
}

// sum over walk pairs of weight(x) * prod_i <f_{x_i}, f_{y_i}>, per
// coordinate; weight(x) has one entry per coordinate.
Tensor weighted_walk_sum(const std::vector<Walk>& gw, const std::vector<Walk>& hw,
                         const FeatureGraph& h, const FeatureGraph& g,
                         const std::vector<Tensor>& walk_weights,
                         std::size_t coords) {
  Tensor out({coords});
  for (std::size_t a = 0; a < gw.size(); ++a) {
    for (const Walk& y : hw) {
      double score = 1.0;
      for (std::size_t i = 0; i < y.size(); ++i) {
        score *= dot(g.features[gw[a][i]], h.features[y[i]]);
      }
      for (std::size_t k = 0; k < coords; ++k) {
        out[k] += walk_weights[a][k] * score;
      }
    }
  }
  return out;
}

void check_gate(const EdgeGateParams& p, std::size_t d) {
  if (p.U.rank() != 2 || p.U.cols() != 2 * d) {
    throw ShapeError(fmt::format("gate U has shape {}, expected [m, {}]",
                                 shape_string(p.U.shape()), 2 * d));
  }
  if (p.b.shape() != Shape{p.U.rows()}) {
    throw ShapeError(fmt::format("gate b has shape {}, expected [{}]",
                                 shape_string(p.b.shape()), p.U.rows()));
  }
}

}  // namespace

void GraphKernelConfig::validate() const {
  if (n < 1) throw ConfigError(fmt::format("walk order n must be >= 1, got {}", n));
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ConfigError(fmt::format("lambda must be >= 0, got {}", lambda));
  }
  if (depth < 1) throw ConfigError(fmt::format("depth must be >= 1, got {}", depth));
}

std::vector<Walk> enumerate_walks(const FeatureGraph& g, int n) {
  if (n < 1) throw ContractError(fmt::format("walk order must be >= 1, got {}", n));
  std::vector<Walk> walks;
  Walk current;
  std::function<void()> extend = [&]() {
    if (current.size() == static_cast<std::size_t>(n)) {
      walks.push_back(current);
      return;
    }
    for (std::size_t u : g.neighbors[current.back()]) {
      current.push_back(u);
      extend();
      current.pop_back();
    }
  };
  for (std::size_t v = 0; v < g.num_nodes(); ++v) {
    current.assign(1, v);
    extend();
  }
  return walks;
}

double random_walk_kernel(const FeatureGraph& g, const FeatureGraph& h,
                          const GraphKernelConfig& cfg) {
  cfg.validate();
  check_pair(g, h);
  guard_graph(g, cfg.n);
  guard_graph(h, cfg.n);
  if (canonical_less(h, g)) return random_walk_kernel(h, g, cfg);

  const std::vector<Walk> gw = enumerate_walks(g, cfg.n);
  const std::vector<Walk> hw = enumerate_walks(h, cfg.n);
  const Tensor base = node_inner_products(g, h);
  double total = 0.0;
  for (const Walk& x : gw) {
    for (const Walk& y : hw) {
      double score = 1.0;
      for (std::size_t i = 0; i < x.size(); ++i) score *= base.at(x[i], y[i]);
      total += score;
    }
  }
  return std::pow(cfg.lambda, cfg.n - 1) * total;
}

double local_kernel(std::size_t v, std::size_t v2, const FeatureGraph& g,
                    const FeatureGraph& h, const GraphKernelConfig& cfg) {
  cfg.validate();
  check_pair(g, h);
  guard_graph(g, cfg.n);
  guard_graph(h, cfg.n);
  require_identity(cfg.activation);
  if (v >= g.num_nodes() || v2 >= h.num_nodes()) {
    throw ContractError(fmt::format("node pair ({}, {}) out of range", v, v2));
  }
  const auto n = static_cast<std::size_t>(cfg.n);
  const auto has_g = walk_existence(g, n);
  const auto has_h = walk_existence(h, n);

  std::function<double(std::size_t, std::size_t, std::size_t)> rec =
      [&](std::size_t j, std::size_t a, std::size_t b) -> double {
    if (!has_g[j - 1][a] || !has_h[j - 1][b]) return 0.0;
    const double own = dot(g.features[a], h.features[b]);
    if (j == 1) return own;
    double agg = 0.0;
    for (std::size_t u : g.neighbors[a]) {
      for (std::size_t u2 : h.neighbors[b]) agg += rec(j - 1, u, u2);
    }
    return compose(cfg.composition, own, cfg.lambda * agg);
  };
  return rec(n, v, v2);
}

Tensor deep_local_kernel_matrix(const FeatureGraph& g, const FeatureGraph& h,
                                const GraphKernelConfig& cfg) {
  cfg.validate();
  check_pair(g, h);
  guard_graph(g, cfg.n);
  guard_graph(h, cfg.n);
  require_identity(cfg.activation);
  const auto n = static_cast<std::size_t>(cfg.n);
  const auto has_g = walk_existence(g, n);
  const auto has_h = walk_existence(h, n);
  const std::size_t rows = g.num_nodes();
  const std::size_t cols = h.num_nodes();

  Tensor below = node_inner_products(g, h);
  for (int layer = 1; layer <= cfg.depth; ++layer) {
    Tensor prev = below;
    for (std::size_t j = 2; j <= n; ++j) {
      Tensor next({rows, cols});
      for (std::size_t a = 0; a < rows; ++a) {
        for (std::size_t b = 0; b < cols; ++b) {
          if (!has_g[j - 1][a] || !has_h[j - 1][b]) continue;
          double agg = 0.0;
          for (std::size_t u : g.neighbors[a]) {
            for (std::size_t u2 : h.neighbors[b]) agg += prev.at(u, u2);
          }
          next.at(a, b) = compose(cfg.composition, below.at(a, b), cfg.lambda * agg);
        }
      }
      prev = std::move(next);
    }
    below = std::move(prev);
  }
  return below;
}

double deep_local_kernel(std::size_t v, std::size_t v2, const FeatureGraph& g,
                         const FeatureGraph& h, const GraphKernelConfig& cfg) {
  if (v >= g.num_nodes() || v2 >= h.num_nodes()) {
    throw ContractError(fmt::format("node pair ({}, {}) out of range", v, v2));
  }
  return deep_local_kernel_matrix(g, h, cfg).at(v, v2);
}

double deep_graph_kernel(const FeatureGraph& g, const FeatureGraph& h,
                         const GraphKernelConfig& cfg) {
  if (canonical_less(h, g)) return deep_graph_kernel(h, g, cfg);
  return sum(deep_local_kernel_matrix(g, h, cfg));
}

FeatureGraph reference_walk(std::span<const Tensor> weights, std::size_t row,
                            std::size_t order) {
  if (order == 0 || order > weights.size()) {
    throw ContractError(fmt::format("reference walk of order {} from {} matrices",
                                    order, weights.size()));
  }
  std::vector<Tensor> features;
  std::vector<std::pair<std::size_t, std::size_t>> arcs;
  for (std::size_t p = 0; p < order; ++p) {
    const Tensor& w = weights[order - 1 - p];
    if (w.rank() != 2 || row >= w.rows()) {
      throw ShapeError(fmt::format("row {} outside matrix of shape {}", row,
                                   shape_string(w.shape())));
    }
    features.push_back(w.row(row));
    if (p + 1 < order) arcs.emplace_back(p, p + 1);
  }
  return FeatureGraph::from_edges(std::move(features), arcs, true);
}

FeatureGraph wl_relabel(const FeatureGraph& g, const RelabelParams& p) {
  g.validate();
  const std::size_t d = g.dim();
  if (p.U1.rank() != 2 || p.U2.rank() != 2 || p.V.rank() != 2 ||
      p.U1.cols() != d || p.V.cols() != d || p.U2.cols() != p.V.rows() ||
      p.U2.rows() != p.U1.rows()) {
    throw ShapeError(fmt::format(
        "relabel shapes U1 {} U2 {} V {} do not fit features of dimension {}",
        shape_string(p.U1.shape()), shape_string(p.U2.shape()),
        shape_string(p.V.shape()), d));
  }
  std::vector<Tensor> messages;
  for (const Tensor& f : g.features) {
    messages.push_back(activate(p.activation, matvec(p.V, f)));
  }
  FeatureGraph out = g;
  for (std::size_t v = 0; v < g.num_nodes(); ++v) {
    Tensor agg({p.V.rows()});
    for (std::size_t u : g.neighbors[v]) add_scaled_into(agg, messages[u]);
    out.features[v] = activate(
        p.activation, add(matvec(p.U1, g.features[v]), matvec(p.U2, agg)));
  }
  return out;
}

double wl_kernel(const FeatureGraph& g, const FeatureGraph& h,
                 const GraphKernelConfig& base, int depth,
                 const RelabelParams& p) {
  if (depth < 0) throw ConfigError(fmt::format("WL depth must be >= 0, got {}", depth));
  FeatureGraph a = g;
  FeatureGraph b = h;
  double total = random_walk_kernel(a, b, base);
  for (int i = 1; i <= depth; ++i) {
    a = wl_relabel(a, p);
    b = wl_relabel(b, p);
    total += random_walk_kernel(a, b, base);
  }
  return total;
}

double wl_kernel_reference(const FeatureGraph& g, const GraphKernelConfig& base,
                           std::span<const FeatureGraph> references,
                           const RelabelParams& p) {
  FeatureGraph a = g;
  double total = 0.0;
  for (std::size_t i = 0; i < references.size(); ++i) {
    if (i > 0) a = wl_relabel(a, p);
    total += random_walk_kernel(a, references[i], base);
  }
  return total;
}

Tensor edge_gate(const EdgeGateParams& p, const Tensor& a, const Tensor& b) {
  Tensor z = add(matvec(p.U, concat(a, b)), p.b);
  for (double& v : z.data()) v = sigmoid(v);
  return z;
}

Tensor gated_random_walk_kernel(const FeatureGraph& g, const FeatureGraph& h,
                                const EdgeGateParams& p, int n) {
  check_pair(g, h);
  guard_graph(g, n);
  guard_graph(h, n);
  check_gate(p, g.dim());
  const std::size_t m = p.U.rows();
  const std::vector<Walk> gw = enumerate_walks(g, n);
  const std::vector<Walk> hw = enumerate_walks(h, n);
  Tensor out({m});
  for (const Walk& x : gw) {
    for (const Walk& y : hw) {
      Tensor term({m}, 1.0);
      for (std::size_t i = 0; i < x.size(); ++i) {
        const Tensor& fx = g.features[x[i]];
        const Tensor& fy = h.features[y[i]];
        const Tensor gate = edge_gate(p, fx, fy);
        const double inner = dot(fx, fy);
        for (std::size_t k = 0; k < m; ++k) term[k] *= gate[k] * inner;
      }
      add_scaled_into(out, term);
    }
  }
  return out;
}

Tensor gated_random_walk_kernel_recurrent(const FeatureGraph& g,
                                          const FeatureGraph& h,
                                          const EdgeGateParams& p, int n) {
  check_pair(g, h);
  guard_graph(g, n);
  guard_graph(h, n);
  check_gate(p, g.dim());
  const std::size_t m = p.U.rows();
  const std::vector<Walk> gw = enumerate_walks(g, n);
  const std::vector<Walk> hw = enumerate_walks(h, n);
  std::vector<Tensor> weights;
  for (const Walk& x : gw) {
    Tensor w({m}, 1.0);
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
      const Tensor gate = edge_gate(p, g.features[x[i + 1]], g.features[x[i]]);
      for (std::size_t k = 0; k < m; ++k) w[k] *= gate[k];
    }
    weights.push_back(std::move(w));
  }
  return weighted_walk_sum(gw, hw, h, g, weights, m);
}

}  // namespace kernelnn
