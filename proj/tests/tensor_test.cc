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

#include "kernelnn/autodiff.h"
#include "kernelnn/errors.h"
#include "kernelnn/gradcheck.h"
#include "kernelnn/params.h"
#include "kernelnn/random.h"
#include "kernelnn/seq_nn.h"

namespace kernelnn {
namespace {

TEST_CASE("matvec examples") {
  CHECK(matvec(Tensor::identity(2), Tensor::vector({3, 4})) == Tensor::vector({3, 4}));
  CHECK(matvec(Tensor({3, 2}), Tensor::vector({5, -2})) == Tensor({3}));
  CHECK(matvec(Tensor::matrix({{1, 2}, {3, 4}}), Tensor::vector({1, 1})) ==
        Tensor::vector({3, 7}));
}

TEST_CASE("shape mismatches throw") {
  CHECK_THROWS_AS(matvec(Tensor({2, 3}), Tensor({2})), ShapeError);
  CHECK_THROWS_AS(add(Tensor({2}), Tensor({3})), ShapeError);
  CHECK_THROWS_AS(hadamard(Tensor({2}), Tensor({2, 1})), ShapeError);
  CHECK_THROWS_AS(Tensor({2, 2}, std::vector<double>{1, 2, 3}), ShapeError);
}

TEST_CASE("elementwise helpers") {
  const Tensor a = Tensor::vector({1, -2, 3});
  const Tensor b = Tensor::vector({2, 2, 2});
  CHECK(hadamard(a, b) == Tensor::vector({2, -4, 6}));
  CHECK(dot(a, b) == doctest::Approx(4.0));
  CHECK(sum(a) == doctest::Approx(2.0));
  CHECK(max_abs(a) == 3.0);
  CHECK(concat(a, b).size() == 6);
  Tensor c = a;
  c[1] = std::nan("");
  CHECK_FALSE(all_finite(c));
}

TEST_CASE("backward of sum is all ones") {
  Tape tape;
  Var x = tape.leaf(Tensor::vector({0.3, -1.0, 2.0}));
  const Gradients g = tape.backward(ad::sum(x));
  CHECK(g.at(x) == Tensor::vector({1, 1, 1}));
}

TEST_CASE("backward of dot gives the other argument") {
  Tape tape;
  const Tensor xv = Tensor::vector({0.5, -1.5, 4.0});
  Var w = tape.leaf(Tensor::vector({1, 2, 3}));
  Var x = tape.constant(xv);
  CHECK(tape.backward(ad::dot(w, x)).at(w) == xv);
}

TEST_CASE("backward requires a scalar root") {
  Tape tape;
  Var x = tape.leaf(Tensor::vector({1, 2}));
  CHECK_THROWS_AS(tape.backward(x), ContractError);
}

TEST_CASE("shared subexpressions accumulate gradients") {
  Tape tape;
  Var x = tape.leaf(Tensor::vector({2.0}));
  Var y = ad::mul(x, x);  // x^2
  Var z = ad::add(y, x);  // x^2 + x
  CHECK(tape.backward(ad::sum(z)).at(x)[0] == doctest::Approx(5.0));
}

TEST_CASE("every op matches finite differences") {
  Rng rng(11);
  const Tensor w0 = random_tensor(rng, {3, 3});
  const Tensor x0 = random_tensor(rng, {3});
  auto build = [](Tape& tape, const Var& w, const Var& x) {
    Var a = ad::matvec(w, x);
    Var b = ad::activation(a, Activation::kTanh);
    Var c = ad::mul(ad::sigmoid(a), ad::one_minus(b));
    Var d = ad::sub(ad::scale(c, 1.7), ad::activation(x, Activation::kQuadratic));
    Var e = ad::concat(d, ad::row(w, 1));
    Var terms[] = {ad::dot(e, e), ad::cross_entropy(a, 2),
                   ad::sum(ad::activation(x, Activation::kSigmoid))};
    (void)tape;
    return ad::add_n(terms);
  };
  Tape tape;
  Var w = tape.leaf(w0);
  Var x = tape.leaf(x0);
  const Gradients g = tape.backward(build(tape, w, x));
  const Tensor fd_w = finite_diff_grad(
      [&](const Tensor& wv) {
        Tape t;
        return build(t, t.leaf(wv), t.leaf(x0)).value().item();
      },
      w0);
  const Tensor fd_x = finite_diff_grad(
      [&](const Tensor& xv) {
        Tape t;
        return build(t, t.leaf(w0), t.leaf(xv)).value().item();
      },
      x0);
  CHECK(max_relative_error(g.at(w), fd_w, 1e-4) < 1e-6);
  CHECK(max_relative_error(g.at(x), fd_x, 1e-4) < 1e-6);
}

TEST_CASE("sequence loss on a 4-token input matches finite differences") {
  Rng rng(5);
  SeqModelConfig cfg;
  cfg.n = 2;
  cfg.input_dim = 3;
  cfg.hidden = 3;
  cfg.decay = DecayMode::kGatedInputState;
  cfg.variant = SeqVariant::kMultNorm;
  const ParameterSet params = init_seq_params(cfg, rng);
  const FeatureSequence x = random_sequence(rng, 4, 3);
  auto loss = [&](ParamBinder& b) {
    std::vector<Var> in;
    for (const Tensor& t : x.tokens) in.push_back(b.tape().constant(t));
    const auto layers = seq_stack_forward(b, in, cfg);
    return ad::sum(layers.back().h.back());
  };
  Tape tape;
  ParamBinder binder(tape, params);
  const ParameterSet grads = binder.gradients(tape.backward(loss(binder)));
  for (const auto& [name, value] : params.entries()) {
    ParameterSet probe = params;
    const Tensor fd = finite_diff_grad(
        [&](const Tensor& v) {
          probe.at(name) = v;
          Tape t;
          ParamBinder b(t, probe, false);
          return loss(b).value().item();
        },
        value);
    CAPTURE(name);
    CHECK(max_relative_error(grads.at(name), fd, 1e-4) < 1e-5);
  }
}

TEST_CASE("finite_diff_grad examples") {
  const Tensor g = finite_diff_grad([](const Tensor& x) { return x[0] * x[0]; },
                                    Tensor::vector({3.0}), 1e-5);
  CHECK(std::fabs(g[0] - 6.0) < 1e-6);
  CHECK(finite_diff_grad([](const Tensor&) { return 2.5; }, Tensor::vector({1, 2})) ==
        Tensor({2}));
  const Tensor s = finite_diff_grad([](const Tensor& x) { return sigmoid(x[0]); },
                                    Tensor::vector({0.0}));
  CHECK(s[0] == doctest::Approx(0.25).epsilon(1e-9));
}

TEST_CASE("relative error floor") {
  CHECK(relative_error(1.0, 1.0) == 0.0);
  CHECK(relative_error(2.0, 1.0) == doctest::Approx(0.5));
  CHECK(relative_error(1e-9, 0.0, 1e-4) == doctest::Approx(1e-5));
}

TEST_CASE("parameter binder reports zero gradients for unused parameters") {
  ParameterSet params;
  params.set("a", Tensor::vector({1, 2}));
  params.set("b", Tensor::vector({3}));
  Tape tape;
  ParamBinder binder(tape, params);
  const ParameterSet grads = binder.gradients(tape.backward(ad::sum(binder.get("a"))));
  CHECK(grads.at("a") == Tensor::vector({1, 1}));
  CHECK(grads.at("b") == Tensor({1}));
  CHECK_THROWS(binder.get("missing"));
}

TEST_CASE("activations and their derivatives") {
  for (Activation act : {Activation::kIdentity, Activation::kSigmoid, Activation::kTanh,
                         Activation::kQuadratic}) {
    for (double x : {-1.3, 0.2, 2.0}) {
      const double h = 1e-6;
      const double fd = (activate(act, x + h) - activate(act, x - h)) / (2 * h);
      CHECK(activate_derivative(act, x) == doctest::Approx(fd).epsilon(1e-6));
    }
    CHECK(parse_activation(to_string(act)) == act);
  }
  CHECK(sigmoid(logit(0.3)) == doctest::Approx(0.3));
  CHECK_THROWS_AS(parse_activation("softsign"), ConfigError);
}

}  // namespace
}  // namespace kernelnn
