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


#include "kernelnn/gram.h"

#include <cmath>
#include <exception>
#include <utility>

#include <Eigen/Dense>
#include <omp.h>

#include "kernelnn/errors.h"

namespace kernelnn {

namespace {

std::vector<std::pair<std::size_t, std::size_t>> upper_pairs(std::size_t count) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  pairs.reserve(count * (count + 1) / 2);
  for (std::size_t a = 0; a < count; ++a) {
    for (std::size_t b = a; b < count; ++b) pairs.emplace_back(a, b);
  }
  return pairs;
}

Eigen::MatrixXd to_eigen(const Tensor& gram) {
  if (gram.rank() != 2 || gram.rows() != gram.cols()) {
    throw ShapeError("expected a square matrix, got " +
                     shape_string(gram.shape()));
  }
  const auto n = static_cast<Eigen::Index>(gram.rows());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = gram.at(i, j);
  }
  return m;
}

}  // namespace

Tensor gram_matrix_serial(std::size_t count, const PairKernel& kernel) {
  if (count == 0) throw ContractError("gram_matrix: empty input set");
  Tensor g({count, count});
  for (auto [a, b] : upper_pairs(count)) {
    const double k = kernel(a, b);
    g.at(a, b) = k;
    g.at(b, a) = k;
  }
  return g;
}

Tensor gram_matrix_parallel(std::size_t count, const PairKernel& kernel,
                            int threads) {
  if (count == 0) throw ContractError("gram_matrix: empty input set");
  const auto pairs = upper_pairs(count);
  std::vector<double> values(pairs.size());
  std::exception_ptr failure;
  const int nthreads = threads > 0 ? threads : omp_get_max_threads();
  const auto npairs = static_cast<std::ptrdiff_t>(pairs.size());

#pragma omp parallel for schedule(dynamic) num_threads(nthreads)
  for (std::ptrdiff_t p = 0; p < npairs; ++p) {
    try {
      values[p] = kernel(pairs[p].first, pairs[p].second);
    } catch (...) {
#pragma omp critical(kernelnn_gram_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  Tensor g({count, count});
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    g.at(pairs[p].first, pairs[p].second) = values[p];
    g.at(pairs[p].second, pairs[p].first) = values[p];
  }
  return g;
}

Tensor gram_matrix(const std::vector<FeatureSequence>& set,
                   const SeqKernelSelector& selector) {
  return gram_matrix_parallel(set.size(), [&](std::size_t a, std::size_t b) {
    if (selector.depth <= 1) return string_kernel(set[a], set[b], selector.config);
    return deep_sequence_kernel(set[a], set[b], selector.depth, selector.config);
  });
}

bool Spectrum::positive_semidefinite(double tol) const {
  return max_eigenvalue >= 0.0 && min_eigenvalue >= -tol * max_eigenvalue;
}

Spectrum spectrum(const Tensor& gram) {
  const Eigen::MatrixXd m = to_eigen(gram);
  Spectrum s;
  s.symmetric = (m.array() == m.transpose().array()).all();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m,
                                                        Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& ev = solver.eigenvalues();
  s.min_eigenvalue = ev.minCoeff();
  s.max_eigenvalue = ev.maxCoeff();
  return s;
}

double range_residual(const Tensor& gram, const Tensor& values,
                      double rank_tol) {
  const Eigen::MatrixXd m = to_eigen(gram);
  if (values.size() != static_cast<std::size_t>(m.rows())) {
    throw ShapeError("range_residual: value count does not match Gram size");
  }
  Eigen::VectorXd f(m.rows());
  for (Eigen::Index i = 0; i < f.size(); ++i) f(i) = values[i];
  const double fnorm = f.norm();
  if (fnorm == 0.0) return 0.0;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
  const Eigen::VectorXd& ev = solver.eigenvalues();
  const double cutoff = rank_tol * std::max(ev.maxCoeff(), 0.0);
  Eigen::VectorXd projected = Eigen::VectorXd::Zero(f.size());
  for (Eigen::Index k = 0; k < ev.size(); ++k) {
    if (ev(k) > cutoff) {
      const auto u = solver.eigenvectors().col(k);
      projected += u * u.dot(f);
    }
  }
  return (f - projected).norm() / fnorm;
}

std::size_t numerical_rank(const Tensor& gram, double rank_tol) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(to_eigen(gram),
                                                        Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& ev = solver.eigenvalues();
  const double cutoff = rank_tol * std::max(ev.maxCoeff(), 0.0);
  std::size_t rank = 0;
  for (Eigen::Index k = 0; k < ev.size(); ++k) rank += ev(k) > cutoff ? 1 : 0;
  return rank;
}

}  // namespace kernelnn
