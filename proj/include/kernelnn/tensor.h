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


#ifndef KERNELNN_TENSOR_H_
#define KERNELNN_TENSOR_H_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace kernelnn {

using Shape = std::vector<std::size_t>;

std::string shape_string(const Shape& shape);

// Dense row-major tensor of doubles. A default-constructed tensor is the
// empty sentinel (no shape, no data); every other tensor has positive extents
// and exactly product(shape) values.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor vector(std::vector<double> values);
  static Tensor vector(std::initializer_list<double> values);
  static Tensor matrix(std::size_t rows, std::size_t cols,
                       std::vector<double> values);
  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);
  static Tensor scalar(double value);
  static Tensor identity(std::size_t n);

  bool empty() const { return data_.empty(); }
  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  std::size_t rows() const { return shape_.at(0); }
  std::size_t cols() const { return shape_.size() > 1 ? shape_[1] : 1; }
  bool is_scalar() const { return data_.size() == 1; }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }
  double& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  double item() const;

  // Row r of a matrix as a vector.
  Tensor row(std::size_t r) const;

  bool operator==(const Tensor& other) const = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

Tensor matvec(const Tensor& w, const Tensor& x);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor hadamard(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
Tensor concat(const Tensor& a, const Tensor& b);
double dot(const Tensor& a, const Tensor& b);
double sum(const Tensor& a);
double max_abs(const Tensor& a);
bool all_finite(const Tensor& a);

// a += s * b, shapes must match.
void add_scaled_into(Tensor& a, const Tensor& b, double s = 1.0);

void require_same_shape(const Tensor& a, const Tensor& b, const char* op);

}  // namespace kernelnn

#endif  // KERNELNN_TENSOR_H_
