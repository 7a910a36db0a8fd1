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


#include "kernelnn/verify.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <functional>
#include <limits>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <omp.h>

#include "kernelnn/errors.h"
#include "kernelnn/gradcheck.h"
#include "kernelnn/gram.h"
#include "kernelnn/graph_kernel.h"
#include "kernelnn/graph_nn.h"
#include "kernelnn/random.h"
#include "kernelnn/seq_nn.h"
#include "kernelnn/train.h"

namespace kernelnn {

namespace {

// Tracks max|a - b| and max|b| over a block of comparisons.
class ErrorBlock {
 public:
  void add(double actual, double reference) {
    diff_ = std::max(diff_, std::fabs(actual - reference));
    scale_ = std::max(scale_, std::fabs(reference));
    ++count_;
  }
  void add(const Tensor& actual, const Tensor& reference) {
    require_same_shape(actual, reference, "error block");
    for (std::size_t i = 0; i < actual.size(); ++i) add(actual[i], reference[i]);
  }
  // Normwise relative error; absolute when the reference block is all zero.
  double error() const { return scale_ > 0.0 ? diff_ / scale_ : diff_; }
  std::size_t count() const { return count_; }

 private:
  double diff_ = 0.0;
  double scale_ = 0.0;
  std::size_t count_ = 0;
};

class Accumulator {
 public:
  void merge(const ErrorBlock& b) {
    err_ = std::max(err_, b.error());
    count_ += b.count();
  }
  void merge(double err, std::size_t count) {
    err_ = std::max(err_, err);
    count_ += count;
  }
  CheckRecord finish(const char* suite, std::uint64_t seed, double tol) const {
    CheckRecord r;
    r.suite = suite;
    r.seed = seed;
    r.max_rel_err = err_;
    r.tol = tol;
    r.pass = std::isfinite(err_) && err_ <= tol;
    r.checks = count_;
    return r;
  }

 private:
  double err_ = 0.0;
  std::size_t count_ = 0;
};

std::vector<int> orders(const VerifyOptions& o) {
  if (o.n) return {*o.n};
  return {1, 2, 3};
}

std::vector<SeqVariant> variants(const VerifyOptions& o) {
  if (o.variant) return {*o.variant};
  return {SeqVariant::kMultUnnorm, SeqVariant::kMultNorm, SeqVariant::kAddNorm};
}

std::uint64_t mix(std::uint64_t base, std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = base * 0x9E3779B97F4A7C15ull + seed * 0xBF58476D1CE4E5B9ull + salt;
  z ^= z >> 31;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 29;
  return z;
}

std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) {
  return lo + rng.index(hi - lo + 1);
}

double pick_lambda(Rng& rng, const VerifyOptions& o) {
  return o.lambda ? *o.lambda : rng.uniform(0.05, 0.95);
}

// Replaces every W matrix with uniform(-1, 1) entries so states are O(1).
void randomize_weights(ParameterSet& params, Rng& rng) {
  for (auto& [name, value] : params.entries()) {
    if (name.find(".W") != std::string::npos) value = random_tensor(rng, value.shape());
  }
}

FeatureGraph random_directed_graph(Rng& rng, std::size_t nodes, std::size_t dim,
                                   double arc_prob) {
  std::vector<Tensor> features;
  for (std::size_t v = 0; v < nodes; ++v) features.push_back(random_tensor(rng, {dim}));
  std::vector<std::pair<std::size_t, std::size_t>> arcs;
  for (std::size_t u = 0; u < nodes; ++u) {
    for (std::size_t v = 0; v < nodes; ++v) {
      if (u != v && rng.bernoulli(arc_prob)) arcs.emplace_back(u, v);
    }
  }
  return FeatureGraph::from_edges(std::move(features), arcs, true);
}

FeatureGraph random_test_graph(Rng& rng, std::size_t nodes, std::size_t dim,
                               bool directed) {
  const double p = rng.uniform(0.2, 0.8);
  return directed ? random_directed_graph(rng, nodes, dim, p)
                  : random_graph(rng, nodes, dim, p);
}

double psd_violation(const Tensor& gram) {
  const Spectrum s = spectrum(gram);
  if (!s.symmetric) return std::numeric_limits<double>::infinity();
  if (s.max_eigenvalue <= 0.0) return s.min_eigenvalue < 0.0 ? 1.0 : 0.0;
  return std::max(0.0, -s.min_eigenvalue / s.max_eigenvalue);
}

// ---- gradient checks ------------------------------------------------------

using LossBuilder = std::function<Var(ParamBinder&)>;

// Reverse-mode gradients of `build` against central differences for every
// coordinate of every parameter.
void gradient_block(const ParameterSet& params, const LossBuilder& build,
                    Accumulator& acc) {
  Tape tape;
  ParamBinder binder(tape, params, true);
  const Var loss = build(binder);
  const ParameterSet grads = binder.gradients(tape.backward(loss));
  for (const auto& [name, value] : params.entries()) {
    ParameterSet probe = params;
    const std::string key = name;
    const ScalarFn f = [&](const Tensor& x) {
      probe.at(key) = x;
      Tape t;
      ParamBinder b(t, probe, false);
      return build(b).value().item();
    };
    const Tensor fd = finite_diff_grad(f, value, kGradEps);
    acc.merge(max_relative_error(grads.at(name), fd, kGradFloor), value.size());
  }
}

// sum_t <r_t, h_t> over the top layer, with fixed random r_t.
LossBuilder seq_projection_loss(const SeqModelConfig& cfg, const FeatureSequence& x,
                                Rng& rng) {
  std::vector<Tensor> proj;
  for (std::size_t t = 0; t < x.length(); ++t) proj.push_back(random_tensor(rng, {cfg.hidden}));
  return [cfg, x, proj](ParamBinder& b) {
    std::vector<Var> inputs;
    for (const Tensor& tok : x.tokens) inputs.push_back(b.tape().constant(tok));
    const auto layers = seq_stack_forward(b, inputs, cfg);
    std::vector<Var> terms;
    for (std::size_t t = 0; t < x.length(); ++t) {
      terms.push_back(ad::dot(b.tape().constant(proj[t]), layers.back().h[t + 1]));
    }
    return ad::add_n(terms);
  };
}

LossBuilder graph_projection_loss(const GraphModelConfig& cfg, const FeatureGraph& g,
                                  Rng& rng) {
  const Tensor proj = random_tensor(rng, {cfg.hidden});
  return [cfg, g, proj](ParamBinder& b) {
    std::vector<Var> features;
    for (const Tensor& f : g.features) features.push_back(b.tape().constant(f));
    const GraphForwardVars vars = graph_forward_vars(b, g, features, cfg);
    return ad::dot(b.tape().constant(proj), vars.h_graph);
  };
}

}  // namespace

std::string CheckRecord::to_json() const {
  nlohmann::ordered_json j;
  j["suite"] = suite;
  j["seed"] = seed;
  j["max_rel_err"] = max_rel_err;
  j["tol"] = tol;
  j["checks"] = checks;
  j["pass"] = pass;
  return j.dump();
}

const std::vector<std::string>& verify_suites() {
  static const std::vector<std::string> kSuites = {
      "theorem1", "theorem4", "cnn-degeneration", "gated-degeneration", "variants",
      "deep-rkhs", "wl",      "gradcheck",        "psd"};
  return kSuites;
}

CheckRecord verify_theorem1(std::uint64_t seed, const VerifyOptions& o) {
  Rng rng(mix(o.base_seed, seed, 1));
  Accumulator acc;
  for (int n : orders(o)) {
    SeqModelConfig cfg;
    cfg.n = n;
    cfg.input_dim = pick(rng, 1, 4);
    cfg.hidden = pick(rng, 1, 4);
    cfg.lambda = pick_lambda(rng, o);
    cfg.variant = SeqVariant::kMultUnnorm;
    cfg.activation = Activation::kIdentity;
    if (o.gated) cfg.decay = DecayMode::kGatedInputState;
    ParameterSet params = init_seq_params(cfg, rng);
    randomize_weights(params, rng);
    const FeatureSequence x = random_sequence(rng, pick(rng, 1, 6), cfg.input_dim);
    const StateTrace trace = forward_layer(x, params, cfg);
    const SeqLayerParams p = seq_layer_params(params, cfg, 0);
    const SeqKernelConfig kc{n, cfg.lambda, Composition::kMultiplicative,
                             Normalization::kUnnormalized};
    ErrorBlock block;
    for (std::size_t t = 1; t <= x.length(); ++t) {
      for (std::size_t i = 0; i < cfg.hidden; ++i) {
        double ref;
        if (o.gated) {
          GateTrace gates{std::vector<Tensor>(trace.decay[0].begin(),
                                              trace.decay[0].begin() + t)};
          ref = gated_string_kernel_state(x.prefix(t), gates, p.W, i);
        } else {
          ref = string_kernel(x.prefix(t), reference_sequence(p.W, i, n), kc);
        }
        block.add(trace.c[0][n - 1][t][i], ref);
      }
    }
    acc.merge(block);
  }
  return acc.finish("theorem1", seed, o.tol.value_or(kIdentityTol));
}

CheckRecord verify_theorem4(std::uint64_t seed, const VerifyOptions& o) {
  Rng rng(mix(o.base_seed, seed, 2));
  Accumulator acc;
  for (int n : orders(o)) {
    GraphModelConfig cfg;
    cfg.kind = o.gated ? GraphModelKind::kGatedRandomWalk : GraphModelKind::kRandomWalk;
    cfg.n = n;
    cfg.input_dim = pick(rng, 1, 4);
    cfg.hidden = pick(rng, 1, 4);
    cfg.lambda = o.lambda ? *o.lambda : rng.uniform(0.1, 1.0);
    ParameterSet params = init_graph_params(cfg, rng);
    randomize_weights(params, rng);
    const bool directed = seed % 2 == 1;
    const FeatureGraph g = random_test_graph(rng, pick(rng, 1, 6), cfg.input_dim, directed);
    const GraphStateTrace trace = graph_forward(g, params, cfg);
    const std::vector<Tensor> W = graph_layer_weights(params, cfg, 0);
    const GraphKernelConfig kc{n, cfg.lambda};
    ErrorBlock block;
    for (std::size_t k = 0; k < cfg.hidden; ++k) {
      const FeatureGraph ref = reference_walk(W, k, static_cast<std::size_t>(n));
      double value;
      if (o.gated) {
        const EdgeGateParams gp{params.at("g.gate_U"), params.at("g.gate_b")};
        value = gated_random_walk_kernel_recurrent(g, ref, gp, n)[k];
      } else {
        value = random_walk_kernel(g, ref, kc);
      }
      block.add(trace.h_graph_layer[0][k], value);
    }
    acc.merge(block);
  }
  return acc.finish("theorem4", seed, o.tol.value_or(kIdentityTol));
}

CheckRecord verify_cnn_degeneration(std::uint64_t seed, const VerifyOptions& o) {
  Rng rng(mix(o.base_seed, seed, 3));
  Accumulator acc;
  for (int n : orders(o)) {
    SeqModelConfig cfg;
    cfg.n = n;
    cfg.input_dim = pick(rng, 1, 4);
    cfg.hidden = pick(rng, 1, 4);
    cfg.lambda = 0.0;
    cfg.variant = SeqVariant::kAddNorm;
    cfg.activation = Activation::kTanh;
    ParameterSet params = init_seq_params(cfg, rng);
    randomize_weights(params, rng);
    const FeatureSequence x = random_sequence(rng, pick(rng, 1, 8), cfg.input_dim);
    const StateTrace trace = forward_layer(x, params, cfg);
    const SeqLayerParams p = seq_layer_params(params, cfg, 0);
    ErrorBlock block;
    for (std::size_t t = 1; t <= x.length(); ++t) {
      Tensor conv({cfg.hidden});
      for (int j = 1; j <= n; ++j) {
        // W^{(j)} reads x_{t-n+j}; positions before the start are zero.
        const long pos = static_cast<long>(t) - n + j;
        if (pos < 1) continue;
        add_scaled_into(conv, matvec(p.W[j - 1], x.tokens[pos - 1]));
      }
      block.add(trace.h[0][t], activate(cfg.activation, conv));
    }
    acc.merge(block);
  }
  return acc.finish("cnn-degeneration", seed, o.tol.value_or(kDegenerationTol));
}

CheckRecord verify_gated_degeneration(std::uint64_t seed, const VerifyOptions& o) {
  Rng rng(mix(o.base_seed, seed, 4));
  Accumulator acc;
  for (SeqVariant variant : variants(o)) {
    for (DecayMode mode : {DecayMode::kGatedInput, DecayMode::kGatedInputState}) {
      SeqModelConfig cfg;
      cfg.n = o.n.value_or(static_cast<int>(pick(rng, 1, 3)));
      cfg.input_dim = pick(rng, 1, 4);
      cfg.hidden = pick(rng, 1, 4);
      cfg.lambda = o.lambda.value_or(rng.uniform(0.05, 0.95));
      cfg.variant = variant;
      cfg.activation = Activation::kTanh;
      ParameterSet constant = init_seq_params(cfg, rng);
      randomize_weights(constant, rng);
      SeqModelConfig gated_cfg = cfg;
      gated_cfg.decay = mode;
      ParameterSet gated = constant;
      const std::size_t in = mode == DecayMode::kGatedInput
                                 ? cfg.input_dim
                                 : cfg.input_dim + cfg.hidden;
      gated.set(seq_param_name(0, "gate_U"), Tensor({cfg.hidden, in}));
      gated.set(seq_param_name(0, "gate_b"), Tensor({cfg.hidden}, logit(cfg.lambda)));
      const FeatureSequence x = random_sequence(rng, pick(rng, 1, 6), cfg.input_dim);
      const StateTrace a = forward_layer(x, gated, gated_cfg);
      const StateTrace b = forward_layer(x, constant, cfg);
      ErrorBlock block;
      for (std::size_t j = 0; j < a.c[0].size(); ++j) {
        for (std::size_t t = 0; t < a.c[0][j].size(); ++t) {
          block.add(a.c[0][j][t], b.c[0][j][t]);
        }
      }
      for (std::size_t t = 0; t < a.h[0].size(); ++t) block.add(a.h[0][t], b.h[0][t]);
      acc.merge(block);
    }
  }
  {
    GraphModelConfig cfg;
    cfg.n = o.n.value_or(static_cast<int>(pick(rng, 1, 3)));
    cfg.input_dim = pick(rng, 1, 4);
    cfg.hidden = pick(rng, 1, 4);
    cfg.lambda = o.lambda.value_or(rng.uniform(0.05, 0.95));
    cfg.activation = Activation::kTanh;
    ParameterSet params = init_graph_params(cfg, rng);
    randomize_weights(params, rng);
    ParameterSet gated = params;
    gated.set("g.gate_U", Tensor({cfg.hidden, 2 * cfg.input_dim}));
    gated.set("g.gate_b", Tensor({cfg.hidden}, logit(cfg.lambda)));
    const FeatureGraph g = random_test_graph(rng, pick(rng, 1, 6), cfg.input_dim, seed % 2);
    const GraphStateTrace a = gated_rw_forward(g, gated, cfg);
    const GraphStateTrace b = rw_forward(g, params, cfg);
    ErrorBlock block;
    for (std::size_t j = 0; j < a.c[0].size(); ++j) {
      for (std::size_t v = 0; v < a.c[0][j].size(); ++v) block.add(a.c[0][j][v], b.c[0][j][v]);
    }
    block.add(a.h_graph, b.h_graph);
    acc.merge(block);
  }
  return acc.finish("gated-degeneration", seed, o.tol.value_or(kDegenerationTol));
}

CheckRecord verify_variants(std::uint64_t seed, const VerifyOptions& o) {
  Rng rng(mix(o.base_seed, seed, 5));
  Accumulator acc;
  for (SeqVariant variant : variants(o)) {
    for (bool gated : {false, true}) {
      if (o.gated && !gated) continue;
      SeqModelConfig cfg;
      cfg.n = o.n.value_or(static_cast<int>(pick(rng, 1, 3)));
      cfg.input_dim = pick(rng, 1, 4);
      cfg.hidden = pick(rng, 1, 4);
      cfg.lambda = pick_lambda(rng, o);
      cfg.variant = variant;
      cfg.activation = Activation::kIdentity;
      if (gated) cfg.decay = DecayMode::kGatedInputState;
      ParameterSet params = init_seq_params(cfg, rng);
      randomize_weights(params, rng);
      const FeatureSequence x = random_sequence(rng, pick(rng, 1, 6), cfg.input_dim);
      const StateTrace trace = forward_layer(x, params, cfg);
      const SeqLayerParams p = seq_layer_params(params, cfg, 0);
      ErrorBlock block;
      for (std::size_t t = 1; t <= x.length(); ++t) {
        const GateTrace gates{std::vector<Tensor>(trace.decay[0].begin(),
                                                  trace.decay[0].begin() + t)};
        for (std::size_t i = 0; i < cfg.hidden; ++i) {
          double ref;
          if (gated) {
            ref = gated_string_kernel_state(x.prefix(t), gates, p.W, i, variant);
          } else {
            const std::vector<double> decay(t, cfg.lambda);
            ref = unrolled_state(x.prefix(t),
                                 reference_sequence(p.W, i, static_cast<std::size_t>(cfg.n)),
                                 decay, variant);
          }
          block.add(trace.c[0][cfg.n - 1][t][i], ref);
        }
      }
      acc.merge(block);
    }
  }
  return acc.finish("variants", seed, o.tol.value_or(kIdentityTol));
}

namespace {

// Residual of each coordinate's values over the sample, plus a random
// control vector that must stay outside the range.
void range_block(const Tensor& gram, const std::vector<Tensor>& values, Rng& rng,
                 Accumulator& acc, bool& control_ok) {
  const std::size_t count = values.size();
  const std::size_t coords = values.at(0).size();
  double worst = 0.0;
  for (std::size_t i = 0; i < coords; ++i) {
    Tensor f({count});
    for (std::size_t s = 0; s < count; ++s) f[s] = values[s][i];
    worst = std::max(worst, range_residual(gram, f));
  }
  acc.merge(worst, count * coords);
  const double control = range_residual(gram, random_tensor(rng, {count}));
  if (!(control >= kRkhsControlMin)) control_ok = false;
}

}  // namespace

CheckRecord verify_deep_rkhs(std::uint64_t seed, const VerifyOptions& o) {
  Rng rng(mix(o.base_seed, seed, 6));
  Accumulator acc;
  bool control_ok = true;
  const int depth = o.depth.value_or(2);

  // Sequences: (d, n) pairs whose deep feature maps are smaller than the sample.
  for (auto [d, n] : {std::pair<std::size_t, int>{1, 2}, {2, 1}}) {
    SeqModelConfig cfg;
    cfg.n = n;
    cfg.layers = depth;
    cfg.input_dim = d;
    cfg.hidden = pick(rng, 2, 3);
    cfg.lambda = pick_lambda(rng, o);
    cfg.activation = Activation::kIdentity;
    ParameterSet params = init_seq_params(cfg, rng);
    randomize_weights(params, rng);
    std::vector<FeatureSequence> sample;
    std::vector<Tensor> values;
    for (int s = 0; s < 5; ++s) {
      const FeatureSequence x = random_sequence(rng, pick(rng, 2, 4), d);
      const StateTrace trace = forward_stack(x, params, cfg);
      for (std::size_t t = 1; t <= x.length(); ++t) {
        sample.push_back(x.prefix(t));
        values.push_back(trace.c[depth - 1][n - 1][t]);
      }
    }
    const Tensor gram = gram_matrix(
        sample, SeqKernelSelector{{n, cfg.lambda, Composition::kMultiplicative,
                                   Normalization::kUnnormalized},
                                  depth});
    range_block(gram, values, rng, acc, control_ok);
  }

  // Graphs: node-level readouts of a deep stack over 6 graphs.
  for (Composition comp : {Composition::kAdditive, Composition::kMultiplicative}) {
    GraphModelConfig cfg;
    cfg.kind = GraphModelKind::kDeep;
    cfg.n = 2;
    cfg.layers = depth;
    cfg.input_dim = 1;
    cfg.hidden = 2;
    cfg.lambda = o.lambda ? *o.lambda : rng.uniform(0.1, 1.0);
    cfg.composition = comp;
    cfg.activation = Activation::kIdentity;
    cfg.mask_empty_walks = true;
    ParameterSet params = init_graph_params(cfg, rng);
    randomize_weights(params, rng);
    std::vector<FeatureGraph> graphs;
    std::vector<Tensor> values;
    for (int s = 0; s < 6; ++s) {
      graphs.push_back(random_graph(rng, pick(rng, 3, 6), 1, rng.uniform(0.2, 0.7)));
      const GraphStateTrace trace = graph_forward(graphs.back(), params, cfg);
      for (const Tensor& h : trace.h_node[depth - 1]) values.push_back(h);
    }
    const GraphKernelConfig kc{2, cfg.lambda, comp, Activation::kIdentity, depth};
    std::vector<std::size_t> offset;
    std::size_t total = 0;
    for (const FeatureGraph& g : graphs) {
      offset.push_back(total);
      total += g.num_nodes();
    }
    Tensor gram({total, total});
    for (std::size_t a = 0; a < graphs.size(); ++a) {
      for (std::size_t b = a; b < graphs.size(); ++b) {
        const Tensor block = deep_local_kernel_matrix(graphs[a], graphs[b], kc);
        for (std::size_t v = 0; v < graphs[a].num_nodes(); ++v) {
          for (std::size_t w = 0; w < graphs[b].num_nodes(); ++w) {
            if (a == b && w < v) continue;
            gram.at(offset[a] + v, offset[b] + w) = block.at(v, w);
            gram.at(offset[b] + w, offset[a] + v) = block.at(v, w);
          }
        }
      }
    }
    range_block(gram, values, rng, acc, control_ok);
  }
  CheckRecord r = acc.finish("deep-rkhs", seed, o.tol.value_or(kRkhsResidualTol));
  if (!control_ok) r.pass = false;
  return r;
}

CheckRecord verify_wl(std::uint64_t seed, const VerifyOptions& o) {
  Rng rng(mix(o.base_seed, seed, 7));
  Accumulator acc;
  const std::vector<int> depths = o.depth ? std::vector<int>{*o.depth} : std::vector<int>{1, 2};
  for (int n : orders(o)) {
    for (int depth : depths) {
      GraphModelConfig cfg;
      cfg.kind = GraphModelKind::kWl;
      cfg.n = n;
      cfg.layers = depth;
      cfg.input_dim = pick(rng, 1, 3);
      cfg.hidden = pick(rng, 1, 3);
      cfg.lambda = o.lambda ? *o.lambda : rng.uniform(0.1, 1.0);
      cfg.activation = Activation::kIdentity;
      ParameterSet params = init_graph_params(cfg, rng);
      randomize_weights(params, rng);
      const FeatureGraph g = random_test_graph(rng, pick(rng, 1, 5), cfg.input_dim, seed % 2);
      const GraphStateTrace trace = wl_forward(g, params, cfg);
      const RelabelParams relabel = wl_relabel_params(params, cfg);
      ErrorBlock block;
      for (std::size_t i = 0; i < cfg.hidden; ++i) {
        std::vector<FeatureGraph> refs;
        for (int l = 0; l < depth; ++l) {
          refs.push_back(reference_walk(graph_layer_weights(params, cfg, l), i,
                                        static_cast<std::size_t>(n)));
        }
        block.add(trace.h_graph[i],
                  wl_kernel_reference(g, GraphKernelConfig{n, cfg.lambda}, refs, relabel));
      }
      acc.merge(block);
    }
  }
  return acc.finish("wl", seed, o.tol.value_or(kWlTol));
}

CheckRecord verify_gradcheck(std::uint64_t seed, const VerifyOptions& o) {
  Rng rng(mix(o.base_seed, seed, 8));
  Accumulator acc;
  const std::vector<DecayMode> modes =
      o.gated ? std::vector<DecayMode>{DecayMode::kGatedInput, DecayMode::kGatedInputState}
              : std::vector<DecayMode>{DecayMode::kConstant, DecayMode::kLearned,
                                       DecayMode::kGatedInput, DecayMode::kGatedInputState};
  // Sequence layers: every variant and decay mode.
  int combo = 0;
  for (SeqVariant variant : variants(o)) {
    for (DecayMode mode : modes) {
      SeqModelConfig cfg;
      cfg.n = o.n.value_or(1 + combo % 3);
      cfg.input_dim = pick(rng, 1, 3);
      cfg.hidden = pick(rng, 1, 3);
      cfg.lambda = o.lambda.value_or(rng.uniform(0.2, 0.8));
      cfg.variant = variant;
      cfg.decay = mode;
      cfg.activation = combo % 2 == 0 ? Activation::kTanh : Activation::kSigmoid;
      if (combo % 3 == 1) cfg.output = OutputMode::kLinearCombination;
      ++combo;
      const ParameterSet params = init_seq_params(cfg, rng);
      const FeatureSequence x = random_sequence(rng, 4, cfg.input_dim);
      gradient_block(params, seq_projection_loss(cfg, x, rng), acc);
    }
  }
  // Two-layer highway stack and a language-model loss through embeddings.
  {
    SeqModelConfig cfg;
    cfg.n = 1;
    cfg.layers = 2;
    cfg.input_dim = 3;
    cfg.hidden = 3;
    cfg.decay = DecayMode::kGatedInputState;
    cfg.variant = SeqVariant::kMultNorm;
    cfg.activation = Activation::kIdentity;
    cfg.highway = true;
    const ParameterSet params = init_seq_params(cfg, rng);
    const FeatureSequence x = random_sequence(rng, 4, cfg.input_dim);
    gradient_block(params, seq_projection_loss(cfg, x, rng), acc);
  }
  {
    SeqModelConfig cfg;
    cfg.n = 2;
    cfg.layers = 2;
    cfg.input_dim = 2;
    cfg.hidden = 3;
    cfg.decay = DecayMode::kGatedInput;
    cfg.variant = SeqVariant::kMultNorm;
    cfg.activation = Activation::kTanh;
    const std::size_t vocab = 4;
    const ParameterSet params = init_lm_params(cfg, vocab, rng);
    std::vector<std::size_t> tokens;
    for (int t = 0; t < 5; ++t) tokens.push_back(rng.index(vocab));
    gradient_block(params, [cfg, tokens](ParamBinder& b) {
      const Var table = b.get("lm.embed");
      std::vector<Var> inputs;
      for (std::size_t t = 0; t + 1 < tokens.size(); ++t) inputs.push_back(ad::row(table, tokens[t]));
      const auto layers = seq_stack_forward(b, inputs, cfg);
      const std::vector<Var> top(layers.back().h.begin() + 1, layers.back().h.end());
      return lm_loss(b, top, std::span<const std::size_t>(tokens).subspan(1));
    }, acc);
  }

  // Graph models.
  struct GraphCase {
    GraphModelKind kind;
    Composition composition;
    Activation activation;
    int layers;
    bool mask;
  };
  const GraphCase cases[] = {
      {GraphModelKind::kRandomWalk, Composition::kMultiplicative, Activation::kSigmoid, 1, false},
      {GraphModelKind::kGeneralized, Composition::kMultiplicative, Activation::kTanh, 1, false},
      {GraphModelKind::kGeneralized, Composition::kAdditive, Activation::kTanh, 1, true},
      {GraphModelKind::kDeep, Composition::kAdditive, Activation::kSigmoid, 2, false},
      {GraphModelKind::kDeep, Composition::kMultiplicative, Activation::kTanh, 2, true},
      {GraphModelKind::kWl, Composition::kMultiplicative, Activation::kTanh, 2, false},
      {GraphModelKind::kGatedRandomWalk, Composition::kMultiplicative, Activation::kTanh, 1, false},
  };
  for (const GraphCase& c : cases) {
    GraphModelConfig cfg;
    cfg.kind = c.kind;
    cfg.n = o.n.value_or(static_cast<int>(pick(rng, 2, 3)));
    cfg.layers = c.layers;
    cfg.input_dim = pick(rng, 1, 3);
    cfg.hidden = pick(rng, 1, 3);
    cfg.lambda = o.lambda.value_or(rng.uniform(0.2, 0.8));
    cfg.composition = c.composition;
    cfg.activation = c.activation;
    cfg.mask_empty_walks = c.mask;
    const ParameterSet params = init_graph_params(cfg, rng);
    const FeatureGraph g = random_graph(rng, pick(rng, 2, 5), cfg.input_dim, 0.5);
    gradient_block(params, graph_projection_loss(cfg, g, rng), acc);
  }
  // Regression head on a WL model.
  {
    GraphModelConfig cfg;
    cfg.kind = GraphModelKind::kWl;
    cfg.n = 2;
    cfg.layers = 2;
    cfg.input_dim = 2;
    cfg.hidden = 2;
    cfg.activation = Activation::kTanh;
    ParameterSet params = init_graph_params(cfg, rng);
    add_regression_head(params, cfg.hidden, rng);
    const FeatureGraph g = random_graph(rng, 4, cfg.input_dim, 0.5);
    const double target = rng.uniform(-1.0, 1.0);
    gradient_block(params, [cfg, g, target](ParamBinder& b) {
      std::vector<Var> features;
      for (const Tensor& f : g.features) features.push_back(b.tape().constant(f));
      return regression_loss(b, graph_forward_vars(b, g, features, cfg).h_graph, target);
    }, acc);
  }
  return acc.finish("gradcheck", seed, o.tol.value_or(kGradTol));
}

CheckRecord verify_psd(std::uint64_t seed, const VerifyOptions& o) {
  Rng rng(mix(o.base_seed, seed, 9));
  Accumulator acc;
  const std::size_t count = 8;
  std::vector<FeatureSequence> seqs;
  for (std::size_t s = 0; s < count; ++s) seqs.push_back(random_sequence(rng, pick(rng, 0, 5), 2));
  for (int n : orders(o)) {
    for (Composition comp : {Composition::kMultiplicative, Composition::kAdditive}) {
      for (Normalization norm : {Normalization::kUnnormalized, Normalization::kNormalized}) {
        const SeqKernelConfig kc{n, pick_lambda(rng, o), comp, norm};
        acc.merge(psd_violation(gram_matrix(seqs, SeqKernelSelector{kc, 1})), count * count);
      }
    }
    const SeqKernelConfig kc{n, pick_lambda(rng, o), Composition::kMultiplicative,
                             Normalization::kUnnormalized};
    acc.merge(psd_violation(gram_matrix(seqs, SeqKernelSelector{kc, o.depth.value_or(2)})),
              count * count);
  }

  std::vector<FeatureGraph> graphs;
  for (std::size_t s = 0; s < count; ++s) {
    graphs.push_back(random_test_graph(rng, pick(rng, 1, 6), 2, seed % 2));
  }
  auto graph_gram = [&](const PairKernel& k) {
    return gram_matrix_parallel(graphs.size(), k, 1);
  };
  for (int n : orders(o)) {
    const GraphKernelConfig kc{n, o.lambda ? *o.lambda : rng.uniform(0.1, 1.0)};
    acc.merge(psd_violation(graph_gram([&](std::size_t a, std::size_t b) {
                return random_walk_kernel(graphs[a], graphs[b], kc);
              })),
              count * count);
  }
  for (Composition comp : {Composition::kMultiplicative, Composition::kAdditive}) {
    const GraphKernelConfig kc{2, rng.uniform(0.1, 1.0), comp, Activation::kIdentity,
                               o.depth.value_or(2)};
    acc.merge(psd_violation(graph_gram([&](std::size_t a, std::size_t b) {
                return deep_graph_kernel(graphs[a], graphs[b], kc);
              })),
              count * count);
  }
  {
    RelabelParams relabel{random_tensor(rng, {2, 2}), random_tensor(rng, {2, 2}),
                          random_tensor(rng, {2, 2}), Activation::kTanh};
    const GraphKernelConfig kc{2, rng.uniform(0.1, 1.0)};
    acc.merge(psd_violation(graph_gram([&](std::size_t a, std::size_t b) {
                return wl_kernel(graphs[a], graphs[b], kc, 2, relabel);
              })),
              count * count);
  }
  return acc.finish("psd", seed, o.tol.value_or(kPsdTol));
}

int verify_thread_count(int requested) {
  int threads = requested > 0 ? requested : omp_get_max_threads();
  if (const char* env = std::getenv("KERNELNN_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || cap < 1) {
      throw ConfigError(fmt::format("KERNELNN_THREADS must be a positive integer, got '{}'", env));
    }
    threads = std::min<int>(threads, static_cast<int>(cap));
  }
  return std::max(threads, 1);
}

std::vector<CheckRecord> run_verify(const VerifyOptions& options) {
  using Check = CheckRecord (*)(std::uint64_t, const VerifyOptions&);
  const std::vector<std::pair<std::string, Check>> table = {
      {"theorem1", verify_theorem1},
      {"theorem4", verify_theorem4},
      {"cnn-degeneration", verify_cnn_degeneration},
      {"gated-degeneration", verify_gated_degeneration},
      {"variants", verify_variants},
      {"deep-rkhs", verify_deep_rkhs},
      {"wl", verify_wl},
      {"gradcheck", verify_gradcheck},
      {"psd", verify_psd},
  };
  std::vector<std::pair<std::string, Check>> selected;
  for (const auto& entry : table) {
    if (options.suite == "all" || options.suite == entry.first) selected.push_back(entry);
  }
  if (selected.empty()) {
    throw ConfigError(fmt::format("unknown suite '{}' (expected all, {})", options.suite,
                                  fmt::join(verify_suites(), ", ")));
  }
  if (options.seeds < 1) throw ConfigError("--seeds must be >= 1");

  const auto seeds = static_cast<std::size_t>(options.seeds);
  const std::size_t jobs = selected.size() * seeds;
  std::vector<CheckRecord> records(jobs);
  std::exception_ptr failure;
  const int threads = verify_thread_count(options.threads);

#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::ptrdiff_t job = 0; job < static_cast<std::ptrdiff_t>(jobs); ++job) {
    const std::size_t s = static_cast<std::size_t>(job) / seeds;
    const std::uint64_t seed = options.base_seed + static_cast<std::size_t>(job) % seeds;
    try {
      records[job] = selected[s].second(seed, options);
    } catch (...) {
#pragma omp critical(kernelnn_verify_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return records;
}

}  // namespace kernelnn
