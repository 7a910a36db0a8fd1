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


#include "kernelnn/train.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "kernelnn/errors.h"

namespace kernelnn {

namespace {

void require_matching(const ParameterSet& params, const ParameterSet& grads) {
  for (const auto& [name, value] : params.entries()) {
    if (!grads.contains(name)) continue;
    if (grads.at(name).shape() != value.shape()) {
      throw ShapeError(fmt::format("gradient for {} has shape {}, parameter has {}",
                                   name, shape_string(grads.at(name).shape()),
                                   shape_string(value.shape())));
    }
  }
}

void accumulate(ParameterSet& total, const ParameterSet& part) {
  if (total.size() == 0) {
    total = part;
    return;
  }
  for (const auto& [name, value] : part.entries()) add_scaled_into(total.at(name), value);
}

void scale_all(ParameterSet& set, double s) {
  for (auto& [name, value] : set.entries()) {
    for (double& v : value.data()) v *= s;
  }
}

Var dropout_mask(const Var& x, double p, Rng& rng) {
  Tensor mask(x.value().shape());
  const double keep = 1.0 - p;
  for (double& m : mask.data()) m = rng.bernoulli(keep) ? 1.0 / keep : 0.0;
  return ad::mul(x, x.tape()->constant(std::move(mask)));
}

std::vector<Var> embed(ParamBinder& params, std::span<const std::size_t> tokens) {
  const Var table = params.get("lm.embed");
  const std::size_t vocab = table.value().rows();
  std::vector<Var> out;
  for (std::size_t id : tokens) {
    if (id >= vocab) {
      throw DataError(fmt::format("token id {} outside vocabulary of {}", id, vocab));
    }
    out.push_back(ad::row(table, id));
  }
  return out;
}

void check_loss(double loss, std::int64_t step) {
  if (!std::isfinite(loss)) {
    throw NumericalError(fmt::format("non-finite loss at step {}", step));
  }
}

}  // namespace

void OptimizerState::validate() const {
  if (!(learning_rate > 0.0)) {
    throw ConfigError(fmt::format("learning rate must be > 0, got {}", learning_rate));
  }
  if (!(lr_decay > 0.0)) {
    throw ConfigError(fmt::format("lr_decay must be > 0, got {}", lr_decay));
  }
  if (kind == OptimizerKind::kAdam &&
      !(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0 && epsilon > 0.0)) {
    throw ConfigError("Adam needs beta1, beta2 in [0,1) and epsilon > 0");
  }
}

void check_finite(const ParameterSet& grads, const char* what) {
  for (const auto& [name, value] : grads.entries()) {
    if (!all_finite(value)) {
      throw NumericalError(fmt::format("non-finite {} for parameter {}", what, name));
    }
  }
}

double global_norm(const ParameterSet& grads) {
  double sq = 0.0;
  for (const auto& [name, value] : grads.entries()) {
    for (double v : value.data()) sq += v * v;
  }
  return std::sqrt(sq);
}

double clip_global_norm(ParameterSet& grads, double threshold) {
  const double norm = global_norm(grads);
  if (threshold > 0.0 && norm > threshold) scale_all(grads, threshold / norm);
  return norm;
}

void step_sgd(ParameterSet& params, ParameterSet grads, OptimizerState& state) {
  state.validate();
  require_matching(params, grads);
  check_finite(grads, "gradient");
  clip_global_norm(grads, state.clip);
  for (auto& [name, value] : params.entries()) {
    if (!grads.contains(name)) continue;
    add_scaled_into(value, grads.at(name), -state.learning_rate);
  }
  ++state.steps;
}

void step_adam(ParameterSet& params, ParameterSet grads, OptimizerState& state) {
  state.validate();
  require_matching(params, grads);
  check_finite(grads, "gradient");
  clip_global_norm(grads, state.clip);
  ++state.steps;
  const double t = static_cast<double>(state.steps);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (auto& [name, value] : params.entries()) {
    if (!grads.contains(name)) continue;
    const Tensor& g = grads.at(name);
    if (!state.first_moment.contains(name)) {
      state.first_moment.set(name, Tensor(value.shape()));
      state.second_moment.set(name, Tensor(value.shape()));
    }
    Tensor& m = state.first_moment.at(name);
    Tensor& v = state.second_moment.at(name);
    for (std::size_t i = 0; i < value.size(); ++i) {
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      value[i] -= state.learning_rate * mhat / (std::sqrt(vhat) + state.epsilon);
    }
  }
}

void optimizer_step(ParameterSet& params, ParameterSet grads, OptimizerState& state) {
  if (state.kind == OptimizerKind::kSgd) {
    step_sgd(params, std::move(grads), state);
  } else {
    step_adam(params, std::move(grads), state);
  }
}

void end_epoch(OptimizerState& state, int epoch) {
  if (epoch >= state.decay_start_epoch) state.learning_rate *= state.lr_decay;
}

ParameterSet init_lm_params(const SeqModelConfig& cfg, std::size_t vocab, Rng& rng) {
  if (vocab == 0) throw ConfigError("vocabulary is empty");
  ParameterSet params = init_seq_params(cfg, rng);
  const double ae = 1.0 / std::sqrt(static_cast<double>(cfg.input_dim));
  params.set("lm.embed", random_tensor(rng, {vocab, cfg.input_dim}, -ae, ae));
  const double ao = 1.0 / std::sqrt(static_cast<double>(cfg.hidden));
  params.set("lm.out_W", random_tensor(rng, {vocab, cfg.hidden}, -ao, ao));
  params.set("lm.out_b", Tensor({vocab}));
  return params;
}

Var lm_loss(ParamBinder& params, std::span<const Var> outputs,
            std::span<const std::size_t> targets) {
  if (outputs.size() != targets.size()) {
    throw ContractError(fmt::format("{} outputs for {} targets", outputs.size(),
                                    targets.size()));
  }
  if (outputs.empty()) throw ContractError("lm_loss: no targets");
  const Var W = params.get("lm.out_W");
  const Var b = params.get("lm.out_b");
  std::vector<Var> terms;
  for (std::size_t t = 0; t < outputs.size(); ++t) {
    terms.push_back(ad::cross_entropy(ad::add(ad::matvec(W, outputs[t]), b), targets[t]));
  }
  return ad::scale(ad::add_n(terms), 1.0 / static_cast<double>(terms.size()));
}

double lm_loss(const StateTrace& trace, std::span<const std::size_t> targets,
               const ParameterSet& params) {
  if (trace.h.empty()) throw ContractError("lm_loss: empty trace");
  Tape tape;
  ParamBinder binder(tape, params, false);
  std::vector<Var> outputs;
  const auto& top = trace.h.back();
  for (std::size_t t = 1; t < top.size(); ++t) outputs.push_back(tape.constant(top[t]));
  return lm_loss(binder, outputs, targets).value().item();
}

void add_regression_head(ParameterSet& params, std::size_t hidden, Rng& rng) {
  const double a = 1.0 / std::sqrt(static_cast<double>(hidden));
  params.set("head.w", random_tensor(rng, {hidden}, -a, a));
  params.set("head.b", Tensor({1}));
}

Var regression_loss(ParamBinder& params, const Var& h_graph, double target) {
  const Var w = params.get("head.w");
  const Var b = params.get("head.b");
  if (w.value().shape() != h_graph.value().shape()) {
    throw ShapeError(fmt::format("head.w has shape {}, graph output has {}",
                                 shape_string(w.value().shape()),
                                 shape_string(h_graph.value().shape())));
  }
  const Var pred = ad::add(ad::dot(w, h_graph), b);
  const Var err = ad::sub(pred, params.tape().constant(Tensor::scalar(target)));
  return ad::mul(err, err);
}

double predict(const Tensor& h_graph, const ParameterSet& params) {
  const Tensor& w = params.at("head.w");
  if (w.shape() != h_graph.shape()) {
    throw ShapeError(fmt::format("head.w has shape {}, graph output has {}",
                                 shape_string(w.shape()), shape_string(h_graph.shape())));
  }
  return dot(w, h_graph) + params.at("head.b").item();
}

double regression_loss(const Tensor& h_graph, double target,
                       const ParameterSet& params) {
  const double err = predict(h_graph, params) - target;
  return err * err;
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError(fmt::format("epochs must be >= 1, got {}", epochs));
  if (max_steps < 0) throw ConfigError("max_steps must be >= 0");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (unroll < 1) throw ConfigError("unroll must be >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) {
    throw ConfigError(fmt::format("dropout must be in [0,1), got {}", dropout));
  }
  optimizer.validate();
}

std::string MetricRecord::to_json() const {
  nlohmann::ordered_json j;
  j["epoch"] = epoch;
  j["step"] = step;
  j["split"] = split;
  j["loss"] = loss;
  j[metric_name.empty() ? "metric" : metric_name] = metric;
  return j.dump();
}

LmEvaluation evaluate_lm(const SeqModelConfig& cfg, const ParameterSet& params,
                         const std::vector<std::size_t>& stream, std::size_t unroll) {
  if (stream.size() < 2) throw DataError("evaluation stream needs at least 2 tokens");
  if (unroll < 1) throw ConfigError("unroll must be >= 1");
  SeqCarry carry;
  bool have_carry = false;
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t pos = 0; pos + 1 < stream.size(); pos += unroll) {
    const std::size_t len = std::min(unroll, stream.size() - 1 - pos);
    Tape tape;
    ParamBinder binder(tape, params, false);
    const std::span<const std::size_t> in(stream.data() + pos, len);
    const std::span<const std::size_t> out(stream.data() + pos + 1, len);
    const std::vector<Var> inputs = embed(binder, in);
    const auto layers =
        seq_stack_forward(binder, inputs, cfg, have_carry ? &carry : nullptr);
    const std::vector<Var> top(layers.back().h.begin() + 1, layers.back().h.end());
    total += lm_loss(binder, top, out).value().item() * static_cast<double>(len);
    count += len;
    carry = final_carry(layers);
    have_carry = true;
  }
  LmEvaluation e;
  e.loss = total / static_cast<double>(count);
  e.perplexity = std::exp(e.loss);
  e.tokens = count;
  check_loss(e.loss, 0);
  return e;
}

std::vector<MetricRecord> train_lm(const SeqModelConfig& cfg, ParameterSet& params,
                                   const LmData& data, TrainConfig tc,
                                   const MetricSink& sink) {
  tc.validate();
  cfg.validate();
  if (data.train.size() < 2) throw DataError("training stream needs at least 2 tokens");
  const std::size_t lanes =
      std::min(tc.batch_size, std::max<std::size_t>(1, (data.train.size() - 1) / 2));
  const std::size_t lane_len = (data.train.size() - 1) / lanes;
  Rng rng(tc.seed);
  std::vector<MetricRecord> history;
  auto emit = [&](MetricRecord r) {
    if (sink) sink(r);
    history.push_back(std::move(r));
  };

  bool done = false;
  for (int epoch = 1; epoch <= tc.epochs && !done; ++epoch) {
    std::vector<SeqCarry> carries(lanes);
    std::vector<bool> have(lanes, false);
    for (std::size_t pos = 0; pos < lane_len && !done; pos += tc.unroll) {
      const std::size_t len = std::min(tc.unroll, lane_len - pos);
      ParameterSet grads;
      double batch_loss = 0.0;
      for (std::size_t lane = 0; lane < lanes; ++lane) {
        const std::size_t start = lane * lane_len + pos;
        Tape tape;
        ParamBinder binder(tape, params, true);
        const std::span<const std::size_t> in(data.train.data() + start, len);
        const std::span<const std::size_t> out(data.train.data() + start + 1, len);
        const std::vector<Var> inputs = embed(binder, in);
        InputTransform drop;
        if (tc.dropout > 0.0) {
          drop = [&](const Var& x) { return dropout_mask(x, tc.dropout, rng); };
        }
        const auto layers = seq_stack_forward(
            binder, inputs, cfg, have[lane] ? &carries[lane] : nullptr, drop);
        const std::vector<Var> top(layers.back().h.begin() + 1, layers.back().h.end());
        const Var loss = lm_loss(binder, top, out);
        batch_loss += loss.value().item();
        accumulate(grads, binder.gradients(tape.backward(loss)));
        carries[lane] = final_carry(layers);
        have[lane] = true;
      }
      check_loss(batch_loss, tc.optimizer.steps);
      scale_all(grads, 1.0 / static_cast<double>(lanes));
      optimizer_step(params, std::move(grads), tc.optimizer);
      if (tc.max_steps > 0 && tc.optimizer.steps >= tc.max_steps) done = true;
    }

    const LmEvaluation train_eval = evaluate_lm(cfg, params, data.train, tc.unroll);
    emit({epoch, tc.optimizer.steps, "train", train_eval.loss, train_eval.perplexity,
          "perplexity"});
    if (data.valid.size() >= 2) {
      const LmEvaluation valid_eval = evaluate_lm(cfg, params, data.valid, tc.unroll);
      emit({epoch, tc.optimizer.steps, "valid", valid_eval.loss, valid_eval.perplexity,
            "perplexity"});
    }
    end_epoch(tc.optimizer, epoch);
  }
  return history;
}

RegressionEvaluation evaluate_regression(const GraphModelConfig& cfg,
                                         const ParameterSet& params,
                                         const std::vector<GraphExample>& data) {
  if (data.empty()) throw DataError("no graphs to evaluate");
  double total = 0.0;
  for (const GraphExample& ex : data) {
    const GraphStateTrace trace = graph_forward(ex.graph, params, cfg);
    total += regression_loss(trace.h_graph, ex.target, params);
  }
  RegressionEvaluation e;
  e.mse = total / static_cast<double>(data.size());
  e.rmse = std::sqrt(e.mse);
  check_loss(e.mse, 0);
  return e;
}

std::vector<MetricRecord> train_graph_regression(
    const GraphModelConfig& cfg, ParameterSet& params,
    const std::vector<GraphExample>& train, const std::vector<GraphExample>& valid,
    TrainConfig tc, const MetricSink& sink) {
  tc.validate();
  cfg.validate();
  if (train.empty()) throw DataError("no training graphs");
  Rng rng(tc.seed);
  std::vector<MetricRecord> history;
  auto emit = [&](MetricRecord r) {
    if (sink) sink(r);
    history.push_back(std::move(r));
  };
  std::vector<std::size_t> order(train.size());
  bool done = false;
  for (int epoch = 1; epoch <= tc.epochs && !done; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[rng.index(i)]);
    }
    for (std::size_t start = 0; start < order.size() && !done; start += tc.batch_size) {
      const std::size_t end = std::min(order.size(), start + tc.batch_size);
      ParameterSet grads;
      double batch_loss = 0.0;
      for (std::size_t k = start; k < end; ++k) {
        const GraphExample& ex = train[order[k]];
        Tape tape;
        ParamBinder binder(tape, params, true);
        std::vector<Var> features;
        for (const Tensor& f : ex.graph.features) {
          Var x = tape.constant(f);
          if (tc.dropout > 0.0) x = dropout_mask(x, tc.dropout, rng);
          features.push_back(x);
        }
        const GraphForwardVars vars = graph_forward_vars(binder, ex.graph, features, cfg);
        const Var loss = regression_loss(binder, vars.h_graph, ex.target);
        batch_loss += loss.value().item();
        accumulate(grads, binder.gradients(tape.backward(loss)));
      }
      check_loss(batch_loss, tc.optimizer.steps);
      scale_all(grads, 1.0 / static_cast<double>(end - start));
      optimizer_step(params, std::move(grads), tc.optimizer);
      if (tc.max_steps > 0 && tc.optimizer.steps >= tc.max_steps) done = true;
    }
    const RegressionEvaluation tr = evaluate_regression(cfg, params, train);
    emit({epoch, tc.optimizer.steps, "train", tr.mse, tr.rmse, "rmse"});
    if (!valid.empty()) {
      const RegressionEvaluation va = evaluate_regression(cfg, params, valid);
      emit({epoch, tc.optimizer.steps, "valid", va.mse, va.rmse, "rmse"});
    }
    end_epoch(tc.optimizer, epoch);
  }
  return history;
}

double standard_deviation(const std::vector<double>& values) {
  if (values.empty()) throw DataError("standard deviation of an empty set");
  const double mean =
      std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - mean) * (v - mean);
  return std::sqrt(sq / static_cast<double>(values.size()));
}

}  // namespace kernelnn
