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


#include "kernelnn/seq_nn.h"

#include <cmath>
#include <string>

#include <fmt/format.h>

#include "kernelnn/errors.h"

namespace kernelnn {

namespace {

void require_shape(const Tensor& t, const Shape& shape, const std::string& name) {
  if (t.shape() != shape) {
    throw ShapeError(fmt::format("parameter {} has shape {}, expected {}", name,
                                 shape_string(t.shape()), shape_string(shape)));
  }
}

Tensor uniform_init(Rng& rng, Shape shape, std::size_t fan_in) {
  const double a = 1.0 / std::sqrt(static_cast<double>(fan_in));
  return random_tensor(rng, std::move(shape), -a, a);
}

// Checks that every parameter the layer needs exists with the right shape.
void check_layer_params(const ParameterSet& params, const SeqModelConfig& cfg,
                        int layer) {
  const std::size_t m = cfg.hidden;
  const std::size_t d = cfg.layer_input_dim(layer);
  for (int j = 1; j <= cfg.n; ++j) {
    const auto name = seq_param_name(layer, fmt::format("W{}", j));
    require_shape(params.at(name), {m, d}, name);
  }
  if (cfg.gated()) {
    const auto u = seq_param_name(layer, "gate_U");
    const auto b = seq_param_name(layer, "gate_b");
    if (!params.contains(u) || !params.contains(b)) {
      throw ConfigError(fmt::format(
          "gated decay needs parameters {} and {}", u, b));
    }
    const std::size_t in =
        cfg.decay == DecayMode::kGatedInputState ? d + m : d;
    require_shape(params.at(u), {m, in}, u);
    require_shape(params.at(b), {m}, b);
  }
  if (cfg.decay == DecayMode::kLearned) {
    const auto name = seq_param_name(layer, "lambda");
    require_shape(params.at(name), {m}, name);
  }
  if (cfg.highway) {
    const auto u = seq_param_name(layer, "hw_U");
    const auto b = seq_param_name(layer, "hw_b");
    require_shape(params.at(u), {m, d}, u);
    require_shape(params.at(b), {m}, b);
  }
}

Tensor zeros(std::size_t m) { return Tensor({m}); }

}  // namespace

void SeqModelConfig::validate() const {
  if (n < 1) throw ConfigError(fmt::format("n must be >= 1, got {}", n));
  if (layers < 1) {
    throw ConfigError(fmt::format("layers must be >= 1, got {}", layers));
  }
  if (input_dim == 0 || hidden == 0) {
    throw ConfigError("input_dim and hidden must be positive");
  }
  if (decay == DecayMode::kConstant && !(lambda >= 0.0 && lambda < 1.0)) {
    throw ConfigError(fmt::format("constant lambda must be in [0,1), got {}", lambda));
  }
  if (decay == DecayMode::kLearned && !(lambda > 0.0 && lambda < 1.0)) {
    throw ConfigError(
        fmt::format("initial learned lambda must be in (0,1), got {}", lambda));
  }
  if (output == OutputMode::kLinearCombination && !output_weights.empty() &&
      output_weights.size() != static_cast<std::size_t>(n)) {
    throw ConfigError(fmt::format("output_weights needs {} entries, got {}", n,
                                  output_weights.size()));
  }
  if (highway && input_dim != hidden) {
    throw ConfigError(fmt::format(
        "highway needs input_dim == hidden, got {} and {}", input_dim, hidden));
  }
}

std::string seq_param_name(int layer, const std::string& what) {
  return fmt::format("seq.{}.{}", layer, what);
}

SeqLayerParams seq_layer_params(const ParameterSet& params,
                                const SeqModelConfig& cfg, int layer) {
  check_layer_params(params, cfg, layer);
  SeqLayerParams p;
  for (int j = 1; j <= cfg.n; ++j) {
    p.W.push_back(params.at(seq_param_name(layer, fmt::format("W{}", j))));
  }
  if (cfg.gated()) {
    p.gate_U = params.at(seq_param_name(layer, "gate_U"));
    p.gate_b = params.at(seq_param_name(layer, "gate_b"));
  }
  if (cfg.decay == DecayMode::kLearned) {
    p.lambda_logit = params.at(seq_param_name(layer, "lambda"));
  }
  if (cfg.highway) {
    p.highway_U = params.at(seq_param_name(layer, "hw_U"));
    p.highway_b = params.at(seq_param_name(layer, "hw_b"));
  }
  return p;
}

ParameterSet init_seq_params(const SeqModelConfig& cfg, Rng& rng) {
  cfg.validate();
  ParameterSet params;
  const std::size_t m = cfg.hidden;
  for (int l = 0; l < cfg.layers; ++l) {
    const std::size_t d = cfg.layer_input_dim(l);
    for (int j = 1; j <= cfg.n; ++j) {
      params.set(seq_param_name(l, fmt::format("W{}", j)),
                 uniform_init(rng, {m, d}, d));
    }
    if (cfg.gated()) {
      const std::size_t in =
          cfg.decay == DecayMode::kGatedInputState ? d + m : d;
      params.set(seq_param_name(l, "gate_U"), uniform_init(rng, {m, in}, in));
      params.set(seq_param_name(l, "gate_b"), Tensor({m}));
    }
    if (cfg.decay == DecayMode::kLearned) {
      params.set(seq_param_name(l, "lambda"), Tensor({m}, logit(cfg.lambda)));
    }
    if (cfg.highway) {
      params.set(seq_param_name(l, "hw_U"), uniform_init(rng, {m, d}, d));
      params.set(seq_param_name(l, "hw_b"), Tensor({m}));
    }
  }
  return params;
}

SeqLayerVars seq_layer_forward(ParamBinder& params, int layer,
                               std::span<const Var> inputs,
                               const SeqModelConfig& cfg,
                               const SeqCarry* carry) {
  if (inputs.empty()) throw ContractError("sequence forward: empty input");
  Tape& tape = params.tape();
  const std::size_t m = cfg.hidden;
  const std::size_t d = cfg.layer_input_dim(layer);
  const auto n = static_cast<std::size_t>(cfg.n);
  for (const Var& x : inputs) {
    if (x.value().shape() != Shape{d}) {
      throw ShapeError(fmt::format("layer {} expects inputs of shape [{}], got {}",
                                   layer, d, shape_string(x.value().shape())));
    }
  }

  std::vector<Var> W;
  for (std::size_t j = 1; j <= n; ++j) {
    W.push_back(params.get(seq_param_name(layer, fmt::format("W{}", j))));
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (W[j].value().shape() != Shape{m, d}) {
      throw ShapeError(fmt::format("parameter {} has shape {}, expected [{}, {}]",
                                   seq_param_name(layer, fmt::format("W{}", j + 1)),
                                   shape_string(W[j].value().shape()), m, d));
    }
  }

  Var gate_U, gate_b, hw_U, hw_b;
  if (cfg.gated()) {
    const auto u = seq_param_name(layer, "gate_U");
    const auto b = seq_param_name(layer, "gate_b");
    if (!params.has(u) || !params.has(b)) {
      throw ConfigError(fmt::format("gated decay needs parameters {} and {}", u, b));
    }
    gate_U = params.get(u);
    gate_b = params.get(b);
    const std::size_t in = cfg.decay == DecayMode::kGatedInputState ? d + m : d;
    require_shape(gate_U.value(), {m, in}, u);
    require_shape(gate_b.value(), {m}, b);
  }
  if (cfg.highway) {
    if (d != m) {
      throw ShapeError(fmt::format(
          "highway layer {} needs input dim {} == hidden {}", layer, d, m));
    }
    hw_U = params.get(seq_param_name(layer, "hw_U"));
    hw_b = params.get(seq_param_name(layer, "hw_b"));
    require_shape(hw_U.value(), {m, d}, seq_param_name(layer, "hw_U"));
    require_shape(hw_b.value(), {m}, seq_param_name(layer, "hw_b"));
  }

  // Decay shared by all steps for the non-gated modes.
  Var fixed_decay;
  if (cfg.decay == DecayMode::kConstant) {
    fixed_decay = tape.constant(Tensor({m}, cfg.lambda));
  } else if (cfg.decay == DecayMode::kLearned) {
    Var theta = params.get(seq_param_name(layer, "lambda"));
    require_shape(theta.value(), {m}, seq_param_name(layer, "lambda"));
    fixed_decay = ad::sigmoid(theta);
  }
  const bool normalized = cfg.variant != SeqVariant::kMultUnnorm;
  const bool additive = cfg.variant == SeqVariant::kAddNorm;
  Var fixed_input_gate;
  if (normalized && fixed_decay.valid()) fixed_input_gate = ad::one_minus(fixed_decay);

  std::vector<Var> output_coeffs;
  if (cfg.output == OutputMode::kLinearCombination) {
    for (std::size_t j = 0; j < n; ++j) {
      const double a = cfg.output_weights.empty() ? 1.0 : cfg.output_weights[j];
      output_coeffs.push_back(tape.constant(Tensor({m}, a)));
    }
  }

  SeqLayerVars out;
  out.c.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    Tensor init = zeros(m);
    if (carry != nullptr) {
      const Tensor& c0 = carry->c.at(static_cast<std::size_t>(layer)).at(j);
      require_shape(c0, {m}, "carried state");
      init = c0;
    }
    out.c[j].push_back(tape.constant(std::move(init)));
  }
  {
    Tensor h0 = zeros(m);
    if (carry != nullptr) {
      h0 = carry->h.at(static_cast<std::size_t>(layer));
      require_shape(h0, {m}, "carried output");
    }
    out.h.push_back(tape.constant(std::move(h0)));
  }

  for (std::size_t t = 1; t <= inputs.size(); ++t) {
    const Var& x = inputs[t - 1];
    Var decay = fixed_decay;
    Var input_gate = fixed_input_gate;
    if (cfg.decay == DecayMode::kGatedInput) {
      decay = ad::sigmoid(ad::add(ad::matvec(gate_U, x), gate_b));
    } else if (cfg.decay == DecayMode::kGatedInputState) {
      decay = ad::sigmoid(
          ad::add(ad::matvec(gate_U, ad::concat(x, out.h[t - 1])), gate_b));
    }
    if (normalized && !input_gate.valid()) input_gate = ad::one_minus(decay);
    out.decay.push_back(decay);

    for (std::size_t j = 0; j < n; ++j) {
      Var term = ad::matvec(W[j], x);
      if (j > 0) {
        term = additive ? ad::add(out.c[j - 1][t - 1], term)
                        : ad::mul(out.c[j - 1][t - 1], term);
      }
      if (normalized) term = ad::mul(input_gate, term);
      out.c[j].push_back(ad::add(ad::mul(decay, out.c[j][t - 1]), term));
    }

    Var pre;
    if (cfg.output == OutputMode::kLastState) {
      pre = out.c[n - 1][t];
    } else {
      std::vector<Var> terms;
      for (std::size_t j = 0; j < n; ++j) {
        terms.push_back(ad::mul(output_coeffs[j], out.c[j][t]));
      }
      pre = ad::add_n(terms);
    }
    Var h = ad::activation(pre, cfg.activation);
    if (cfg.highway) {
      Var f = ad::sigmoid(ad::add(ad::matvec(hw_U, x), hw_b));
      out.transform.push_back(f);
      h = ad::add(ad::mul(f, h), ad::mul(ad::one_minus(f), x));
    }
    out.h.push_back(h);
  }
  return out;
}

std::vector<SeqLayerVars> seq_stack_forward(ParamBinder& params,
                                            std::span<const Var> inputs,
                                            const SeqModelConfig& cfg,
                                            const SeqCarry* carry,
                                            const InputTransform& input_transform) {
  cfg.validate();
  std::vector<SeqLayerVars> layers;
  std::vector<Var> current(inputs.begin(), inputs.end());
  for (int l = 0; l < cfg.layers; ++l) {
    if (input_transform) {
      for (Var& v : current) v = input_transform(v);
    }
    layers.push_back(seq_layer_forward(params, l, current, cfg, carry));
    current.assign(layers.back().h.begin() + 1, layers.back().h.end());
  }
  return layers;
}

StateTrace to_trace(std::span<const SeqLayerVars> layers) {
  StateTrace trace;
  for (const SeqLayerVars& layer : layers) {
    auto& c = trace.c.emplace_back();
    for (const auto& cj : layer.c) {
      auto& values = c.emplace_back();
      for (const Var& v : cj) values.push_back(v.value());
    }
    auto& h = trace.h.emplace_back();
    for (const Var& v : layer.h) h.push_back(v.value());
    auto& decay = trace.decay.emplace_back();
    for (const Var& v : layer.decay) decay.push_back(v.value());
    auto& transform = trace.transform.emplace_back();
    for (const Var& v : layer.transform) transform.push_back(v.value());
  }
  return trace;
}

SeqCarry final_carry(std::span<const SeqLayerVars> layers) {
  SeqCarry carry;
  for (const SeqLayerVars& layer : layers) {
    auto& c = carry.c.emplace_back();
    for (const auto& cj : layer.c) c.push_back(cj.back().value());
    carry.h.push_back(layer.h.back().value());
  }
  return carry;
}

StateTrace forward_layer(const FeatureSequence& x, const ParameterSet& params,
                         const SeqModelConfig& cfg, int layer) {
  cfg.validate();
  x.validate();
  if (layer < 0 || layer >= cfg.layers) {
    throw ConfigError(fmt::format("layer {} out of range [0, {})", layer, cfg.layers));
  }
  Tape tape;
  ParamBinder binder(tape, params, false);
  std::vector<Var> inputs;
  for (const Tensor& token : x.tokens) inputs.push_back(tape.constant(token));
  const SeqLayerVars vars = seq_layer_forward(binder, layer, inputs, cfg);
  return to_trace(std::span<const SeqLayerVars>(&vars, 1));
}

StateTrace forward_stack(const FeatureSequence& x, const ParameterSet& params,
                         const SeqModelConfig& cfg) {
  cfg.validate();
  x.validate();
  Tape tape;
  ParamBinder binder(tape, params, false);
  std::vector<Var> inputs;
  for (const Tensor& token : x.tokens) inputs.push_back(tape.constant(token));
  return to_trace(seq_stack_forward(binder, inputs, cfg));
}

StateTrace lstm_like_instance(const FeatureSequence& x, const ParameterSet& params,
                              const SeqModelConfig& cfg, InputGate input_gate) {
  cfg.validate();
  x.validate();
  if (cfg.n != 1) {
    throw ConfigError(fmt::format("lstm_like_instance needs n = 1, got {}", cfg.n));
  }
  if (x.empty()) throw ContractError("sequence forward: empty input");
  const SeqLayerParams p = seq_layer_params(params, cfg, 0);
  const std::size_t m = cfg.hidden;
  if (x.dim() != cfg.input_dim) {
    throw ShapeError(fmt::format("expected tokens of dimension {}, got {}",
                                 cfg.input_dim, x.dim()));
  }

  StateTrace trace;
  trace.c.assign(1, std::vector<std::vector<Tensor>>(1));
  trace.h.resize(1);
  trace.decay.resize(1);
  trace.transform.resize(1);
  std::vector<Tensor>& c = trace.c[0][0];
  std::vector<Tensor>& h = trace.h[0];
  c.push_back(zeros(m));
  h.push_back(zeros(m));

  for (std::size_t t = 1; t <= x.length(); ++t) {
    const Tensor& xt = x.tokens[t - 1];
    Tensor forget({m});
    switch (cfg.decay) {
      case DecayMode::kConstant:
        forget = Tensor({m}, cfg.lambda);
        break;
      case DecayMode::kLearned:
        for (std::size_t i = 0; i < m; ++i) forget[i] = sigmoid(p.lambda_logit[i]);
        break;
      case DecayMode::kGatedInput:
      case DecayMode::kGatedInputState: {
        const Tensor in = cfg.decay == DecayMode::kGatedInput
                              ? xt
                              : concat(xt, h[t - 1]);
        const Tensor z = add(matvec(p.gate_U, in), p.gate_b);
        for (std::size_t i = 0; i < m; ++i) forget[i] = sigmoid(z[i]);
        break;
      }
    }
    const Tensor wx = matvec(p.W[0], xt);
    Tensor ct({m});
    for (std::size_t i = 0; i < m; ++i) {
      const double in_gate =
          input_gate == InputGate::kOne ? 1.0 : 1.0 - forget[i];
      ct[i] = forget[i] * c[t - 1][i] + in_gate * wx[i];
    }
    Tensor ht = activate(cfg.activation, ct);
    if (cfg.highway) {
      const Tensor z = add(matvec(p.highway_U, xt), p.highway_b);
      Tensor f({m});
      for (std::size_t i = 0; i < m; ++i) {
        f[i] = sigmoid(z[i]);
        ht[i] = f[i] * ht[i] + (1.0 - f[i]) * xt[i];
      }
      trace.transform[0].push_back(f);
    }
    trace.decay[0].push_back(forget);
    c.push_back(std::move(ct));
    h.push_back(std::move(ht));
  }
  return trace;
}

}  // namespace kernelnn
