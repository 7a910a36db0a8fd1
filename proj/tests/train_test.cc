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
#include <numeric>

#include <doctest.h>

#include "kernelnn/errors.h"
#include "kernelnn/random.h"
#include "kernelnn/train.h"

namespace kernelnn {
namespace {

ParameterSet single(const Tensor& value) {
  ParameterSet p;
  p.set("p", value);
  return p;
}

double norm(const Tensor& t) { return std::sqrt(dot(t, t)); }

TEST_CASE("sgd examples") {
  OptimizerState s;
  s.learning_rate = 0.3;
  ParameterSet p = single(Tensor::vector({1, -2}));
  step_sgd(p, single(Tensor({2})), s);
  CHECK(p.at("p") == Tensor::vector({1, -2}));

  s.learning_rate = 1.0;
  step_sgd(p, p, s);
  CHECK(p.at("p") == Tensor({2}));

  // f(p) = |p|^2 has gradient 2p, so each step scales p by 1 - 2 lr.
  ParameterSet q = single(Tensor::vector({3, 4}));
  s.learning_rate = 0.1;
  for (int i = 0; i < 100; ++i) step_sgd(q, single(scale(q.at("p"), 2.0)), s);
  CHECK(norm(q.at("p")) == doctest::Approx(5.0 * std::pow(0.8, 100)).epsilon(1e-9));
}

TEST_CASE("global norm clipping") {
  ParameterSet g = single(Tensor::vector({3, 4}));
  CHECK(clip_global_norm(g, 1.0) == doctest::Approx(5.0));
  CHECK(norm(g.at("p")) == doctest::Approx(1.0));
  CHECK(clip_global_norm(g, 10.0) == doctest::Approx(1.0));
  CHECK(norm(g.at("p")) == doctest::Approx(1.0));
}

TEST_CASE("adam examples") {
  OptimizerState s;
  s.kind = OptimizerKind::kAdam;
  s.learning_rate = 0.01;
  ParameterSet p = single(Tensor::vector({1, -2}));
  step_adam(p, single(Tensor({2})), s);
  CHECK(p.at("p") == Tensor::vector({1, -2}));

  for (double g : {1e-3, 1.0, 1e3}) {
    OptimizerState t;
    t.kind = OptimizerKind::kAdam;
    t.learning_rate = 0.01;
    ParameterSet q = single(Tensor::vector({0.0}));
    step_adam(q, single(Tensor::vector({g})), t);
    CHECK(q.at("p")[0] == doctest::Approx(-0.01).epsilon(1e-4));
  }

  // Convex quadratic 0.5 sum a_i p_i^2: loss decreases after warm-up until it
  // reaches the noise floor of the oscillating iterate.
  Rng rng(3);
  const Tensor a = random_tensor(rng, {6}, 0.5, 3.0);
  ParameterSet q = single(random_tensor(rng, {6}));
  OptimizerState t;
  t.kind = OptimizerKind::kAdam;
  t.learning_rate = 0.01;
  auto loss = [&] { return 0.5 * dot(hadamard(a, q.at("p")), q.at("p")); };
  const double initial = loss();
  double prev = initial;
  int increases = 0;
  for (int i = 0; i < 500; ++i) {
    step_adam(q, single(hadamard(a, q.at("p"))), t);
    const double now = loss();
    if (i >= 10 && prev > 1e-6 * initial && now > prev) ++increases;
    prev = now;
  }
  CHECK(increases == 0);
  CHECK(prev < 1e-3);
}

TEST_CASE("non-finite gradients abort") {
  ParameterSet p = single(Tensor::vector({1.0}));
  OptimizerState s;
  CHECK_THROWS_AS(step_sgd(p, single(Tensor::vector({std::nan("")})), s), NumericalError);
}

TEST_CASE("learning rate decay per epoch") {
  OptimizerState s;
  s.learning_rate = 1.0;
  s.lr_decay = 0.5;
  s.decay_start_epoch = 2;
  end_epoch(s, 1);
  CHECK(s.learning_rate == 1.0);
  end_epoch(s, 2);
  CHECK(s.learning_rate == 0.5);
}

TEST_CASE("language model loss") {
  SeqModelConfig cfg;
  cfg.input_dim = 2;
  cfg.hidden = 3;
  Rng rng(1);
  ParameterSet params = init_lm_params(cfg, 5, rng);
  params.set("lm.out_W", Tensor({5, 3}));
  params.set("lm.out_b", Tensor({5}));
  Tape tape;
  ParamBinder b(tape, params);
  const Var h = tape.constant(random_tensor(rng, {3}));
  const std::vector<Var> outs = {h, h};
  const std::vector<std::size_t> targets = {1, 4};
  CHECK(lm_loss(b, outs, targets).value().item() == doctest::Approx(std::log(5.0)));

  ParameterSet sharp = params;
  Tensor bias({5}, -50.0);
  bias[2] = 50.0;
  sharp.set("lm.out_b", bias);
  Tape t2;
  ParamBinder b2(t2, sharp);
  const std::vector<Var> o2 = {t2.constant(Tensor({3}))};
  const std::vector<std::size_t> y2 = {2};
  CHECK(lm_loss(b2, o2, y2).value().item() < 1e-20);
}

TEST_CASE("regression loss and the mean predictor") {
  ParameterSet params;
  params.set("head.w", Tensor::vector({2.0, -1.0}));
  params.set("head.b", Tensor::vector({0.5}));
  const Tensor h = Tensor::vector({1.0, 3.0});
  CHECK(predict(h, params) == doctest::Approx(-0.5));
  CHECK(regression_loss(h, -0.5, params) == 0.0);

  const std::vector<double> targets = {1.0, 4.0, -2.0, 0.5};
  const double mean = std::accumulate(targets.begin(), targets.end(), 0.0) / 4;
  ParameterSet m;
  m.set("head.w", Tensor({2}));
  m.set("head.b", Tensor::vector({mean}));
  double mse = 0.0;
  for (double t : targets) mse += regression_loss(h, t, m) / 4;
  CHECK(std::sqrt(mse) == doctest::Approx(standard_deviation(targets)));
}

TEST_CASE("language model training memorizes a two-token corpus") {
  SeqModelConfig cfg;
  cfg.input_dim = 4;
  cfg.hidden = 8;
  cfg.variant = SeqVariant::kMultNorm;
  std::vector<std::size_t> stream;
  for (int i = 0; i < 200; ++i) stream.push_back(2 + i % 2);
  TrainConfig tc;
  tc.epochs = 100;
  tc.max_steps = 150;
  tc.batch_size = 4;
  tc.unroll = 10;
  tc.optimizer.kind = OptimizerKind::kAdam;
  tc.optimizer.learning_rate = 0.05;
  Rng rng(tc.seed);
  ParameterSet params = init_lm_params(cfg, 4, rng);
  const ParameterSet start = params;
  const auto history = train_lm(cfg, params, {stream, {}, 4}, tc);
  CHECK(history.back().metric < 1.5);
  CHECK(evaluate_lm(cfg, params, stream, 35).perplexity < 1.5);

  ParameterSet again = start;
  const auto rerun = train_lm(cfg, again, {stream, {}, 4}, tc);
  CHECK(rerun.back().loss == history.back().loss);
}

TEST_CASE("training config validation") {
  TrainConfig tc;
  tc.batch_size = 0;
  CHECK_THROWS_AS(tc.validate(), ConfigError);
  tc.batch_size = 1;
  tc.dropout = 1.0;
  CHECK_THROWS_AS(tc.validate(), ConfigError);
}

}  // namespace
}  // namespace kernelnn
