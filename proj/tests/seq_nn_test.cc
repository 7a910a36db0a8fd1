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
#include "kernelnn/random.h"
#include "kernelnn/seq_kernel.h"
#include "kernelnn/seq_nn.h"

namespace kernelnn {
namespace {

void randomize_w(ParameterSet& params, Rng& rng) {
  for (auto& [name, value] : params.entries()) {
    if (name.find(".W") != std::string::npos) value = random_tensor(rng, value.shape());
  }
}

double trace_diff(const StateTrace& a, const StateTrace& b) {
  double d = 0.0;
  for (std::size_t l = 0; l < a.h.size(); ++l) {
    for (std::size_t t = 0; t < a.h[l].size(); ++t) {
      d = std::max(d, max_abs(sub(a.h[l][t], b.h[l][t])));
    }
    for (std::size_t j = 0; j < a.c[l].size(); ++j) {
      for (std::size_t t = 0; t < a.c[l][j].size(); ++t) {
        d = std::max(d, max_abs(sub(a.c[l][j][t], b.c[l][j][t])));
      }
    }
  }
  return d;
}

SeqModelConfig small_config(int n, SeqVariant variant) {
  SeqModelConfig cfg;
  cfg.n = n;
  cfg.input_dim = 3;
  cfg.hidden = 4;
  cfg.variant = variant;
  cfg.lambda = 0.45;
  return cfg;
}

TEST_CASE("lambda zero additive layer is a convolution") {
  Rng rng(1);
  SeqModelConfig cfg = small_config(3, SeqVariant::kAddNorm);
  cfg.lambda = 0.0;
  cfg.activation = Activation::kSigmoid;
  ParameterSet params = init_seq_params(cfg, rng);
  randomize_w(params, rng);
  const FeatureSequence x = random_sequence(rng, 6, 3);
  const StateTrace trace = forward_layer(x, params, cfg);
  const SeqLayerParams p = seq_layer_params(params, cfg, 0);
  for (std::size_t t = 1; t <= 6; ++t) {
    Tensor pre({4});
    for (int j = 1; j <= 3; ++j) {
      const long pos = static_cast<long>(t) - 3 + j;
      if (pos >= 1) add_scaled_into(pre, matvec(p.W[j - 1], x.tokens[pos - 1]));
    }
    CHECK(max_abs(sub(trace.h[0][t], activate(Activation::kSigmoid, pre))) <= 1e-12);
  }
}

TEST_CASE("zero input gives zero states") {
  Rng rng(2);
  for (SeqVariant v : {SeqVariant::kMultUnnorm, SeqVariant::kMultNorm, SeqVariant::kAddNorm}) {
    SeqModelConfig cfg = small_config(2, v);
    cfg.activation = Activation::kSigmoid;
    const ParameterSet params = init_seq_params(cfg, rng);
    FeatureSequence x;
    for (int t = 0; t < 4; ++t) x.tokens.push_back(Tensor({3}));
    const StateTrace trace = forward_layer(x, params, cfg);
    for (std::size_t t = 1; t <= 4; ++t) {
      for (const auto& cj : trace.c[0]) CHECK(max_abs(cj[t]) == 0.0);
      CHECK(trace.h[0][t] == Tensor({4}, 0.5));
    }
  }
}

TEST_CASE("state equals the string kernel against the reference sequence") {
  Rng rng(3);
  for (int n = 1; n <= 3; ++n) {
    SeqModelConfig cfg = small_config(n, SeqVariant::kMultUnnorm);
    ParameterSet params = init_seq_params(cfg, rng);
    randomize_w(params, rng);
    const FeatureSequence x = random_sequence(rng, 6, 3);
    const StateTrace trace = forward_layer(x, params, cfg);
    const SeqLayerParams p = seq_layer_params(params, cfg, 0);
    for (std::size_t t = 1; t <= 6; ++t) {
      for (std::size_t i = 0; i < 4; ++i) {
        const double k = string_kernel(x.prefix(t), reference_sequence(p.W, i, n),
                                       {n, cfg.lambda});
        CHECK(trace.c[0][n - 1][t][i] == doctest::Approx(k).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("one-layer stack equals forward_layer") {
  Rng rng(4);
  const SeqModelConfig cfg = small_config(2, SeqVariant::kMultNorm);
  const ParameterSet params = init_seq_params(cfg, rng);
  const FeatureSequence x = random_sequence(rng, 5, 3);
  CHECK(trace_diff(forward_stack(x, params, cfg), forward_layer(x, params, cfg)) == 0.0);
}

TEST_CASE("closed highway gate passes the input through") {
  Rng rng(5);
  SeqModelConfig cfg = small_config(1, SeqVariant::kMultNorm);
  cfg.input_dim = 4;
  cfg.layers = 2;
  cfg.highway = true;
  ParameterSet params = init_seq_params(cfg, rng);
  params.set(seq_param_name(1, "hw_U"), Tensor({4, 4}));
  params.set(seq_param_name(1, "hw_b"), Tensor({4}, -1e4));
  const StateTrace trace = forward_stack(random_sequence(rng, 5, 4), params, cfg);
  for (std::size_t t = 1; t <= 5; ++t) CHECK(trace.h[1][t] == trace.h[0][t]);
}

TEST_CASE("lstm-like instance") {
  Rng rng(6);
  SUBCASE("input gate one with constant forget gate is the unnormalized layer") {
    SeqModelConfig cfg = small_config(1, SeqVariant::kMultUnnorm);
    const ParameterSet params = init_seq_params(cfg, rng);
    const FeatureSequence x = random_sequence(rng, 6, 3);
    CHECK(trace_diff(lstm_like_instance(x, params, cfg, InputGate::kOne),
                     forward_layer(x, params, cfg)) <= 1e-15);
  }
  SUBCASE("input gate one minus forget is the normalized gated layer") {
    SeqModelConfig cfg = small_config(1, SeqVariant::kMultNorm);
    cfg.decay = DecayMode::kGatedInputState;
    const ParameterSet params = init_seq_params(cfg, rng);
    const FeatureSequence x = random_sequence(rng, 6, 3);
    CHECK(trace_diff(lstm_like_instance(x, params, cfg, InputGate::kOneMinusForget),
                     forward_layer(x, params, cfg)) <= 1e-15);
  }
  SUBCASE("gated run matches the gated kernel oracle") {
    SeqModelConfig cfg = small_config(1, SeqVariant::kMultUnnorm);
    cfg.decay = DecayMode::kGatedInput;
    cfg.activation = Activation::kIdentity;
    ParameterSet params = init_seq_params(cfg, rng);
    randomize_w(params, rng);
    const FeatureSequence x = random_sequence(rng, 6, 3);
    const StateTrace trace = lstm_like_instance(x, params, cfg, InputGate::kOne);
    const SeqLayerParams p = seq_layer_params(params, cfg, 0);
    for (std::size_t i = 0; i < 4; ++i) {
      const double k = gated_string_kernel_state(x, GateTrace{trace.decay[0]}, p.W, i);
      CHECK(trace.c[0][0][6][i] == doctest::Approx(k).epsilon(1e-10));
    }
  }
}

TEST_CASE("gated forward matches the gated kernel oracle for n = 2") {
  Rng rng(7);
  SeqModelConfig cfg = small_config(2, SeqVariant::kMultUnnorm);
  cfg.decay = DecayMode::kGatedInputState;
  ParameterSet params = init_seq_params(cfg, rng);
  randomize_w(params, rng);
  const FeatureSequence x = random_sequence(rng, 4, 3);
  const StateTrace trace = forward_layer(x, params, cfg);
  const SeqLayerParams p = seq_layer_params(params, cfg, 0);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(trace.c[0][1][4][i] ==
          doctest::Approx(gated_string_kernel_state(x, GateTrace{trace.decay[0]}, p.W, i))
              .epsilon(1e-10));
  }
}

TEST_CASE("carry continues a sequence exactly") {
  Rng rng(8);
  SeqModelConfig cfg = small_config(2, SeqVariant::kAddNorm);
  cfg.layers = 2;
  cfg.decay = DecayMode::kGatedInputState;
  const ParameterSet params = init_seq_params(cfg, rng);
  const FeatureSequence x = random_sequence(rng, 6, 3);
  auto run = [&](std::span<const Tensor> tokens, const SeqCarry* carry) {
    Tape tape;
    ParamBinder b(tape, params, false);
    std::vector<Var> in;
    for (const Tensor& t : tokens) in.push_back(tape.constant(t));
    const auto layers = seq_stack_forward(b, in, cfg, carry);
    return std::make_pair(to_trace(layers), final_carry(layers));
  };
  const auto whole = run(x.tokens, nullptr);
  const auto first = run(std::span<const Tensor>(x.tokens).first(3), nullptr);
  const auto second = run(std::span<const Tensor>(x.tokens).subspan(3), &first.second);
  CHECK(second.first.h[1][3] == whole.first.h[1][6]);
}

TEST_CASE("config validation") {
  SeqModelConfig cfg;
  cfg.lambda = 1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.lambda = 0.5;
  cfg.n = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.n = 2;
  cfg.output = OutputMode::kLinearCombination;
  cfg.output_weights = {1.0};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  Rng rng(1);
  SeqModelConfig ok;
  const ParameterSet params = init_seq_params(ok, rng);
  CHECK_THROWS_AS(forward_layer(random_sequence(rng, 2, 3), params, ok), ShapeError);
}

}  // namespace
}  // namespace kernelnn
