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


#ifndef KERNELNN_SEQ_NN_H_
#define KERNELNN_SEQ_NN_H_

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "kernelnn/activation.h"
#include "kernelnn/autodiff.h"
#include "kernelnn/params.h"
#include "kernelnn/random.h"
#include "kernelnn/seq_kernel.h"
#include "kernelnn/sequence.h"

namespace kernelnn {

enum class DecayMode {
  kConstant,         // fixed lambda
  kLearned,          // lambda = sigmoid(theta), one theta per hidden unit
  kGatedInput,       // lambda_t = sigmoid(U x_t + b)
  kGatedInputState,  // lambda_t = sigmoid(U [x_t, h_{t-1}] + b)
};

enum class OutputMode {
  kLastState,          // h = act(c_n)
  kLinearCombination,  // h = act(sum_j a_j c_j)
};

struct SeqModelConfig {
  int n = 1;
  int layers = 1;
  std::size_t input_dim = 1;
  std::size_t hidden = 1;
  DecayMode decay = DecayMode::kConstant;
  // Constant decay, or the initial decay for kLearned.
  double lambda = 0.5;
  SeqVariant variant = SeqVariant::kMultUnnorm;
  Activation activation = Activation::kTanh;
  OutputMode output = OutputMode::kLastState;
  // Coefficients a_1..a_n for kLinearCombination; empty means all ones.
  std::vector<double> output_weights;
  // h = f * act(out) + (1 - f) * h_below. Needs input_dim == hidden.
  bool highway = false;

  void validate() const;
  std::size_t layer_input_dim(int layer) const {
    return layer == 0 ? input_dim : hidden;
  }
  bool gated() const {
    return decay == DecayMode::kGatedInput || decay == DecayMode::kGatedInputState;
  }
};

std::string seq_param_name(int layer, const std::string& what);

// Parameters of one layer, pulled out of a ParameterSet. Optional entries
// are empty tensors when the configuration does not use them.
struct SeqLayerParams {
  std::vector<Tensor> W;  // W^(1) .. W^(n), each [hidden x input]
  Tensor gate_U;
  Tensor gate_b;
  Tensor lambda_logit;
  Tensor highway_U;
  Tensor highway_b;
};

SeqLayerParams seq_layer_params(const ParameterSet& params,
                                const SeqModelConfig& cfg, int layer);

// Uniform(-a, a) with a = 1/sqrt(fan_in); decay logits start at
// logit(cfg.lambda), gate biases at 0.
ParameterSet init_seq_params(const SeqModelConfig& cfg, Rng& rng);

// Values of every intermediate state of a forward pass.
struct StateTrace {
  // c[layer][j][t] for j = 0..n-1 (state c_{j+1}) and t = 0..T; t = 0 is
  // the initial state.
  std::vector<std::vector<std::vector<Tensor>>> c;
  // h[layer][t], t = 0..T; h[.][0] is the initial hidden state.
  std::vector<std::vector<Tensor>> h;
  // decay[layer][t-1] = lambda_t as a vector (all modes).
  std::vector<std::vector<Tensor>> decay;
  // transform[layer][t-1] = f_t; empty without highway.
  std::vector<std::vector<Tensor>> transform;
};

// State carried across truncated-backprop windows, detached from any tape.
struct SeqCarry {
  std::vector<std::vector<Tensor>> c;  // [layer][j]
  std::vector<Tensor> h;               // [layer]
};

// Tape-level outputs of one layer.
struct SeqLayerVars {
  std::vector<std::vector<Var>> c;  // [j][t], t = 0..T
  std::vector<Var> h;               // [t], t = 0..T
  std::vector<Var> decay;           // [t-1]
  std::vector<Var> transform;       // [t-1]
};

using InputTransform = std::function<Var(const Var&)>;

SeqLayerVars seq_layer_forward(ParamBinder& params, int layer,
                               std::span<const Var> inputs,
                               const SeqModelConfig& cfg,
                               const SeqCarry* carry = nullptr);

// Applies the layers in order; `input_transform` (e.g. dropout) is applied to
// every layer's inputs when set.
std::vector<SeqLayerVars> seq_stack_forward(
    ParamBinder& params, std::span<const Var> inputs, const SeqModelConfig& cfg,
    const SeqCarry* carry = nullptr,
    const InputTransform& input_transform = nullptr);

StateTrace to_trace(std::span<const SeqLayerVars> layers);
SeqCarry final_carry(std::span<const SeqLayerVars> layers);

// One layer (index `layer`) applied to x.
StateTrace forward_layer(const FeatureSequence& x, const ParameterSet& params,
                         const SeqModelConfig& cfg, int layer = 0);

StateTrace forward_stack(const FeatureSequence& x, const ParameterSet& params,
                         const SeqModelConfig& cfg);

enum class InputGate { kOneMinusForget, kOne };

// c[t] = lambda_f * c[t-1] + lambda_i * (W x_t), h[t] = act(c[t]) with
// lambda_f the layer's decay and lambda_i = 1 - lambda_f or 1. Written as a
// plain loop, separate from the tape-based layer. Requires n = 1.
StateTrace lstm_like_instance(const FeatureSequence& x, const ParameterSet& params,
                              const SeqModelConfig& cfg, InputGate input_gate);

}  // namespace kernelnn

#endif  // KERNELNN_SEQ_NN_H_
