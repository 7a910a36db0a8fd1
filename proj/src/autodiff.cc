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


#include "kernelnn/autodiff.h"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "kernelnn/errors.h"

namespace kernelnn {

const Tensor& Var::value() const {
  if (!tape_) throw ContractError("value() on an unbound Var");
  return tape_->value(id_);
}

Adjoints::Adjoints(const Tape& tape)
    : tape_(&tape), adjoints_(tape.size()) {}

void Adjoints::accumulate(int id, const Tensor& delta) {
  accumulate_scaled(id, delta, 1.0);
}

void Adjoints::accumulate_scaled(int id, const Tensor& delta, double s) {
  if (!tape_->requires_grad(id)) return;
  Tensor& slot = adjoints_[id];
  if (slot.empty()) {
    slot = s == 1.0 ? delta : scale(delta, s);
  } else {
    add_scaled_into(slot, delta, s);
  }
}

Tensor Gradients::at(const Var& v) const {
  if (v.tape() != tape_) {
    throw ContractError("Gradients::at: Var belongs to a different tape");
  }
  const Tensor& g = adjoints_[v.id()];
  if (g.empty()) return Tensor(v.value().shape());
  return g;
}

Var Tape::leaf(Tensor value) {
  nodes_.push_back({std::move(value), true, nullptr});
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::constant(Tensor value) {
  nodes_.push_back({std::move(value), false, nullptr});
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::record(Tensor value, std::span<const Var> inputs,
                 BackwardFn backward) {
  bool needs = false;
  for (const Var& in : inputs) {
    if (in.tape() != this) {
      throw ContractError("operation mixes Vars from different tapes");
    }
    needs = needs || nodes_[in.id()].requires_grad;
  }
  nodes_.push_back({std::move(value), needs,
                    needs ? std::move(backward) : BackwardFn()});
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Gradients Tape::backward(const Var& root) const {
  if (root.tape() != this) {
    throw ContractError("backward: root belongs to a different tape");
  }
  const Tensor& rv = value(root.id());
  if (!rv.is_scalar()) {
    throw ContractError("backward: root must be scalar, got shape " +
                        shape_string(rv.shape()));
  }
  Adjoints adj(*this);
  if (nodes_[root.id()].requires_grad) {
    adj.adjoints_[root.id()] = Tensor(rv.shape(), 1.0);
  }
  for (int i = root.id(); i >= 0; --i) {
    const Node& node = nodes_[i];
    if (!node.backward || adj.adjoints_[i].empty()) continue;
    // Inputs always have smaller ids, so slot i is not written below.
    node.backward(adj.adjoints_[i], adj);
  }
  return Gradients(this, std::move(adj.adjoints_));
}

namespace ad {

namespace {

Tape& tape_of(const Var& a) {
  if (!a.valid()) throw ContractError("operation on an unbound Var");
  return *a.tape();
}

}  // namespace

Var matvec(const Var& w, const Var& x) {
  Tape& tape = tape_of(w);
  Tensor y = kernelnn::matvec(w.value(), x.value());
  const int wi = w.id();
  const int xi = x.id();
  const Var ins[] = {w, x};
  return tape.record(std::move(y), ins,
                     [wi, xi, &tape](const Tensor& g, Adjoints& adj) {
    const Tensor& wv = tape.value(wi);
    const Tensor& xv = tape.value(xi);
    const std::size_t m = wv.rows();
    const std::size_t d = wv.cols();
    if (tape.requires_grad(wi)) {
      Tensor gw(wv.shape());
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t k = 0; k < d; ++k) gw[i * d + k] = g[i] * xv[k];
      }
      adj.accumulate(wi, gw);
    }
    if (tape.requires_grad(xi)) {
      Tensor gx(xv.shape());
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t k = 0; k < d; ++k) gx[k] += wv[i * d + k] * g[i];
      }
      adj.accumulate(xi, gx);
    }
  });
}

Var add(const Var& a, const Var& b) {
  Tape& tape = tape_of(a);
  const int ai = a.id();
  const int bi = b.id();
  const Var ins[] = {a, b};
  return tape.record(kernelnn::add(a.value(), b.value()), ins,
                     [ai, bi](const Tensor& g, Adjoints& adj) {
                       adj.accumulate(ai, g);
                       adj.accumulate(bi, g);
                     });
}

Var sub(const Var& a, const Var& b) {
  Tape& tape = tape_of(a);
  const int ai = a.id();
  const int bi = b.id();
  const Var ins[] = {a, b};
  return tape.record(kernelnn::sub(a.value(), b.value()), ins,
                     [ai, bi](const Tensor& g, Adjoints& adj) {
                       adj.accumulate(ai, g);
                       adj.accumulate_scaled(bi, g, -1.0);
                     });
}

Var mul(const Var& a, const Var& b) {
  Tape& tape = tape_of(a);
  const int ai = a.id();
  const int bi = b.id();
  const Var ins[] = {a, b};
  return tape.record(hadamard(a.value(), b.value()), ins,
                     [ai, bi, &tape](const Tensor& g, Adjoints& adj) {
                       if (tape.requires_grad(ai)) {
                         adj.accumulate(ai, hadamard(g, tape.value(bi)));
                       }
                       if (tape.requires_grad(bi)) {
                         adj.accumulate(bi, hadamard(g, tape.value(ai)));
                       }
                     });
}

Var scale(const Var& a, double s) {
  Tape& tape = tape_of(a);
  const int ai = a.id();
  const Var ins[] = {a};
  return tape.record(kernelnn::scale(a.value(), s), ins,
                     [ai, s](const Tensor& g, Adjoints& adj) {
                       adj.accumulate_scaled(ai, g, s);
                     });
}

Var one_minus(const Var& a) {
  Tape& tape = tape_of(a);
  Tensor out = a.value();
  for (double& v : out.data()) v = 1.0 - v;
  const int ai = a.id();
  const Var ins[] = {a};
  return tape.record(std::move(out), ins,
                     [ai](const Tensor& g, Adjoints& adj) {
                       adj.accumulate_scaled(ai, g, -1.0);
                     });
}

Var activation(const Var& a, Activation act) {
  if (act == Activation::kIdentity) return a;
  Tape& tape = tape_of(a);
  const int ai = a.id();
  const Var ins[] = {a};
  return tape.record(activate(act, a.value()), ins,
                     [ai, act, &tape](const Tensor& g, Adjoints& adj) {
                       const Tensor& x = tape.value(ai);
                       Tensor gx = g;
                       for (std::size_t i = 0; i < gx.size(); ++i) {
                         gx[i] *= activate_derivative(act, x[i]);
                       }
                       adj.accumulate(ai, gx);
                     });
}

Var sigmoid(const Var& a) { return activation(a, Activation::kSigmoid); }

Var sum(const Var& a) {
  Tape& tape = tape_of(a);
  const int ai = a.id();
  const Var ins[] = {a};
  return tape.record(Tensor::scalar(kernelnn::sum(a.value())), ins,
                     [ai, &tape](const Tensor& g, Adjoints& adj) {
                       adj.accumulate(ai,
                                      Tensor(tape.value(ai).shape(), g[0]));
                     });
}

Var dot(const Var& a, const Var& b) {
  Tape& tape = tape_of(a);
  const int ai = a.id();
  const int bi = b.id();
  const Var ins[] = {a, b};
  return tape.record(Tensor::scalar(kernelnn::dot(a.value(), b.value())), ins,
                     [ai, bi, &tape](const Tensor& g, Adjoints& adj) {
                       adj.accumulate_scaled(ai, tape.value(bi), g[0]);
                       adj.accumulate_scaled(bi, tape.value(ai), g[0]);
                     });
}

Var concat(const Var& a, const Var& b) {
  Tape& tape = tape_of(a);
  const int ai = a.id();
  const int bi = b.id();
  const std::size_t na = a.value().size();
  const std::size_t nb = b.value().size();
  const Var ins[] = {a, b};
  return tape.record(kernelnn::concat(a.value(), b.value()), ins,
                     [ai, bi, na, nb](const Tensor& g, Adjoints& adj) {
                       std::vector<double> ga(g.data().begin(),
                                              g.data().begin() + na);
                       std::vector<double> gb(g.data().begin() + na,
                                              g.data().begin() + na + nb);
                       adj.accumulate(ai, Tensor::vector(std::move(ga)));
                       adj.accumulate(bi, Tensor::vector(std::move(gb)));
                     });
}

Var add_n(std::span<const Var> terms) {
  if (terms.empty()) throw ContractError("add_n: no operands");
  Tape& tape = tape_of(terms[0]);
  Tensor acc = terms[0].value();
  for (std::size_t i = 1; i < terms.size(); ++i) {
    add_scaled_into(acc, terms[i].value());
  }
  std::vector<int> ids;
  ids.reserve(terms.size());
  for (const Var& t : terms) ids.push_back(t.id());
  return tape.record(std::move(acc), terms,
                     [ids = std::move(ids)](const Tensor& g, Adjoints& adj) {
                       for (int id : ids) adj.accumulate(id, g);
                     });
}

Var row(const Var& e, std::size_t index) {
  Tape& tape = tape_of(e);
  const int ei = e.id();
  const Var ins[] = {e};
  return tape.record(e.value().row(index), ins,
                     [ei, index, &tape](const Tensor& g, Adjoints& adj) {
                       Tensor ge(tape.value(ei).shape());
                       const std::size_t cols = ge.cols();
                       for (std::size_t k = 0; k < cols; ++k) {
                         ge[index * cols + k] = g[k];
                       }
                       adj.accumulate(ei, ge);
                     });
}

Var cross_entropy(const Var& logits, std::size_t target) {
  Tape& tape = tape_of(logits);
  const Tensor& z = logits.value();
  if (target >= z.size()) {
    throw DataError(fmt::format("cross_entropy: target {} outside {} classes",
                                target, z.size()));
  }
  double zmax = z[0];
  for (double v : z.data()) zmax = std::max(zmax, v);
  double total = 0.0;
  for (double v : z.data()) total += std::exp(v - zmax);
  const double log_norm = zmax + std::log(total);
  const int li = logits.id();
  const Var ins[] = {logits};
  return tape.record(
      Tensor::scalar(log_norm - z[target]), ins,
      [li, target, log_norm, &tape](const Tensor& g, Adjoints& adj) {
        const Tensor& zv = tape.value(li);
        Tensor gz(zv.shape());
        for (std::size_t i = 0; i < zv.size(); ++i) {
          gz[i] = std::exp(zv[i] - log_norm) * g[0];
        }
        gz[target] -= g[0];
        adj.accumulate(li, gz);
      });
}

}  // namespace ad

}  // namespace kernelnn
