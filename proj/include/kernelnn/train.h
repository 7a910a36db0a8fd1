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


#ifndef KERNELNN_TRAIN_H_
#define KERNELNN_TRAIN_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "kernelnn/autodiff.h"
#include "kernelnn/graph.h"
#include "kernelnn/graph_nn.h"
#include "kernelnn/params.h"
#include "kernelnn/random.h"
#include "kernelnn/seq_nn.h"

namespace kernelnn {

enum class OptimizerKind { kSgd, kAdam };

struct OptimizerState {
  OptimizerKind kind = OptimizerKind::kSgd;
  double learning_rate = 1.0;
  // learning_rate *= lr_decay at every epoch boundary from decay_start_epoch on.
  double lr_decay = 1.0;
  int decay_start_epoch = 1;
  // Global-norm clip threshold; <= 0 disables clipping.
  double clip = 0.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  std::int64_t steps = 0;
  ParameterSet first_moment;
  ParameterSet second_moment;

  void validate() const;
};

// Throws NumericalError naming the first parameter with a non-finite entry.
void check_finite(const ParameterSet& grads, const char* what);

double global_norm(const ParameterSet& grads);

// Rescales grads so that their global norm is at most `threshold`. Returns the
// norm before clipping.
double clip_global_norm(ParameterSet& grads, double threshold);

// p <- p - lr * clip(g).
void step_sgd(ParameterSet& params, ParameterSet grads, OptimizerState& state);

// Bias-corrected Adam step on clip(g).
void step_adam(ParameterSet& params, ParameterSet grads, OptimizerState& state);

void optimizer_step(ParameterSet& params, ParameterSet grads, OptimizerState& state);

// Applies the per-epoch decay after finishing `epoch` (1-based).
void end_epoch(OptimizerState& state, int epoch);

// ---- Language model -------------------------------------------------------

// Names: lm.embed [vocab x input_dim], lm.out_W [vocab x hidden], lm.out_b [vocab].
ParameterSet init_lm_params(const SeqModelConfig& cfg, std::size_t vocab, Rng& rng);

// Mean token cross-entropy of softmax(out_W h[t] + out_b) against targets[t-1],
// for the top-layer outputs h[1..T].
Var lm_loss(ParamBinder& params, std::span<const Var> outputs,
            std::span<const std::size_t> targets);

// Value-level lm_loss over the top layer of a trace.
double lm_loss(const StateTrace& trace, std::span<const std::size_t> targets,
               const ParameterSet& params);

// ---- Graph regression -----------------------------------------------------

// Names: head.w [hidden], head.b [1]. prediction = <head.w, h_G> + head.b.
void add_regression_head(ParameterSet& params, std::size_t hidden, Rng& rng);

// (prediction - target)^2.
Var regression_loss(ParamBinder& params, const Var& h_graph, double target);
double regression_loss(const Tensor& h_graph, double target,
                       const ParameterSet& params);
double predict(const Tensor& h_graph, const ParameterSet& params);

// ---- Loops ----------------------------------------------------------------

struct TrainConfig {
  int epochs = 1;
  // Optimizer steps cap across all epochs; 0 means no cap.
  int max_steps = 0;
  std::size_t batch_size = 1;
  std::size_t unroll = 35;
  double dropout = 0.0;
  std::uint64_t seed = 1;
  OptimizerState optimizer;

  void validate() const;
};

struct MetricRecord {
  int epoch = 0;
  std::int64_t step = 0;
  std::string split;
  double loss = 0.0;
  // Perplexity for language models, RMSE for regression.
  double metric = 0.0;
  std::string metric_name;

  std::string to_json() const;
};

using MetricSink = std::function<void(const MetricRecord&)>;

struct LmData {
  std::vector<std::size_t> train;
  std::vector<std::size_t> valid;  // may be empty
  std::size_t vocab = 0;
};

struct LmEvaluation {
  double loss = 0.0;
  double perplexity = 0.0;
  std::size_t tokens = 0;
};

// Predicts stream[i+1] from stream[..i] over the whole stream, in windows of
// `unroll` with state carried between windows. No dropout.
LmEvaluation evaluate_lm(const SeqModelConfig& cfg, const ParameterSet& params,
                         const std::vector<std::size_t>& stream, std::size_t unroll);

// Truncated-backprop training. The training stream is cut into batch_size
// contiguous lanes; each optimizer step consumes one window per lane and
// averages their gradients. Emits train (and valid) metrics per epoch.
std::vector<MetricRecord> train_lm(const SeqModelConfig& cfg, ParameterSet& params,
                                   const LmData& data, TrainConfig tc,
                                   const MetricSink& sink = nullptr);

struct GraphExample {
  FeatureGraph graph;
  double target = 0.0;
};

struct RegressionEvaluation {
  double mse = 0.0;
  double rmse = 0.0;
};

RegressionEvaluation evaluate_regression(const GraphModelConfig& cfg,
                                         const ParameterSet& params,
                                         const std::vector<GraphExample>& data);

// Minibatches drawn from a per-epoch shuffle.
std::vector<MetricRecord> train_graph_regression(
    const GraphModelConfig& cfg, ParameterSet& params,
    const std::vector<GraphExample>& train, const std::vector<GraphExample>& valid,
    TrainConfig tc, const MetricSink& sink = nullptr);

double standard_deviation(const std::vector<double>& values);

}  // namespace kernelnn

#endif  // KERNELNN_TRAIN_H_
