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


#include "kernelnn/tensor.h"

#include <cmath>
#include <functional>
#include <numeric>

#include <fmt/format.h>

#include "kernelnn/errors.h"

namespace kernelnn {

namespace {

std::size_t product(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

void check_extents(const Shape& shape) {
  if (shape.empty()) throw ShapeError("tensor shape must have rank >= 1");
  for (std::size_t e : shape) {
    if (e == 0) throw ShapeError("tensor extents must be positive, got " +
                                 shape_string(shape));
  }
}

}  // namespace

std::string shape_string(const Shape& shape) {
  return fmt::format("[{}]", fmt::join(shape, "x"));
}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)) {
  check_extents(shape_);
  data_.assign(product(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  check_extents(shape_);
  if (data_.size() != product(shape_)) {
    throw ShapeError(fmt::format("shape {} needs {} values, got {}",
                                 shape_string(shape_), product(shape_),
                                 data_.size()));
  }
}

Tensor Tensor::vector(std::vector<double> values) {
  Shape shape{values.size()};
  return Tensor(std::move(shape), std::move(values));
}

Tensor Tensor::vector(std::initializer_list<double> values) {
  return vector(std::vector<double>(values));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols,
                      std::vector<double> values) {
  return Tensor({rows, cols}, std::move(values));
}

Tensor Tensor::matrix(
    std::initializer_list<std::initializer_list<double>> rows) {
  std::vector<double> values;
  std::size_t cols = rows.size() ? rows.begin()->size() : 0;
  for (const auto& r : rows) {
    if (r.size() != cols) throw ShapeError("ragged matrix literal");
    values.insert(values.end(), r.begin(), r.end());
  }
  return matrix(rows.size(), cols, std::move(values));
}

Tensor Tensor::scalar(double value) { return Tensor({1}, {value}); }

Tensor Tensor::identity(std::size_t n) {
  Tensor t({n, n});
  for (std::size_t i = 0; i < n; ++i) t.at(i, i) = 1.0;
  return t;
}

double Tensor::item() const {
  if (data_.size() != 1) {
    throw ContractError("item() on non-scalar tensor " + shape_string(shape_));
  }
  return data_[0];
}

Tensor Tensor::row(std::size_t r) const {
  if (rank() != 2 || r >= rows()) {
    throw ShapeError(fmt::format("row {} of tensor {}", r, shape_string(shape_)));
  }
  std::vector<double> values(data_.begin() + r * cols(),
                             data_.begin() + (r + 1) * cols());
  return vector(std::move(values));
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(fmt::format("{}: shape mismatch {} vs {}", op,
                                 shape_string(a.shape()),
                                 shape_string(b.shape())));
  }
}

Tensor matvec(const Tensor& w, const Tensor& x) {
  if (w.rank() != 2 || x.rank() != 1 || w.cols() != x.size()) {
    throw ShapeError(fmt::format("matvec: shape mismatch {} x {}",
                                 shape_string(w.shape()),
                                 shape_string(x.shape())));
  }
  const std::size_t m = w.rows();
  const std::size_t d = w.cols();
  Tensor y({m});
  const double* wd = w.data().data();
  const double* xd = x.data().data();
  for (std::size_t i = 0; i < m; ++i) {
    double acc = 0.0;
    for (std::size_t k = 0; k < d; ++k) acc += wd[i * d + k] * xd[k];
    y[i] = acc;
  }
  return y;
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  Tensor out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
  return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  Tensor out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b[i];
  return out;
}

Tensor hadamard(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "hadamard");
  Tensor out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b[i];
  return out;
}

Tensor scale(const Tensor& a, double s) {
  Tensor out = a;
  for (double& v : out.data()) v *= s;
  return out;
}

Tensor concat(const Tensor& a, const Tensor& b) {
  if (a.rank() != 1 || b.rank() != 1) {
    throw ShapeError(fmt::format("concat: expects vectors, got {} and {}",
                                 shape_string(a.shape()),
                                 shape_string(b.shape())));
  }
  std::vector<double> values(a.data().begin(), a.data().end());
  values.insert(values.end(), b.data().begin(), b.data().end());
  return Tensor::vector(std::move(values));
}

double dot(const Tensor& a, const Tensor& b) {
  if (a.size() != b.size()) {
    throw ShapeError(fmt::format("dot: shape mismatch {} vs {}",
                                 shape_string(a.shape()),
                                 shape_string(b.shape())));
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double sum(const Tensor& a) {
  double acc = 0.0;
  for (double v : a.data()) acc += v;
  return acc;
}

double max_abs(const Tensor& a) {
  double m = 0.0;
  for (double v : a.data()) m = std::max(m, std::abs(v));
  return m;
}

bool all_finite(const Tensor& a) {
  for (double v : a.data()) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void add_scaled_into(Tensor& a, const Tensor& b, double s) {
  require_same_shape(a, b, "add_scaled_into");
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += s * b[i];
}

}  // namespace kernelnn
