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


#include "kernelnn/seq_kernel.h"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "kernelnn/errors.h"

namespace kernelnn {

void FeatureSequence::validate() const {
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    if (tokens[t].rank() != 1 || tokens[t].size() != dim()) {
      throw ShapeError(fmt::format("token {} has shape {}, expected [{}]", t,
                                   shape_string(tokens[t].shape()), dim()));
    }
  }
}

void SeqKernelConfig::validate() const {
  if (n < 1) throw ConfigError(fmt::format("kernel order n={} must be >= 1", n));
  if (!(lambda >= 0.0 && lambda < 1.0)) {
    throw ConfigError(fmt::format("decay lambda={} must lie in [0, 1)", lambda));
  }
}

void for_each_combination(
    std::size_t length, std::size_t order,
    const std::function<void(std::span<const std::size_t>)>& fn) {
  if (order == 0 || order > length) return;
  std::vector<std::size_t> idx(order);
  for (std::size_t m = 0; m < order; ++m) idx[m] = m;
  while (true) {
    fn(idx);
    // Advance the rightmost index that still has room.
    std::size_t m = order;
    while (m > 0 && idx[m - 1] == length - order + (m - 1)) --m;
    if (m == 0) return;
    ++idx[m - 1];
    for (std::size_t k = m; k < order; ++k) idx[k] = idx[k - 1] + 1;
  }
}

namespace {

void check_guards(std::size_t length, int n) {
  if (length > kMaxOracleLength) {
    throw GuardError(fmt::format(
        "oracle refuses sequences longer than {} tokens (got {})",
        kMaxOracleLength, length));
  }
  if (n > kMaxOracleOrder) {
    throw GuardError(fmt::format("oracle refuses order n > {} (got {})",
                                 kMaxOracleOrder, n));
  }
}

void check_dims(const FeatureSequence& x, const FeatureSequence& y) {
  x.validate();
  y.validate();
  if (!x.empty() && !y.empty() && x.dim() != y.dim()) {
    throw ShapeError(fmt::format("token dimensions differ: {} vs {}", x.dim(),
                                 y.dim()));
  }
}

// Weight of the tuple starting at 0-based index i1 in a sequence of length L:
// lambda^{L - (i1 + 1) - n + 1}.
double tuple_weight(double lambda, std::size_t length, std::size_t i1, int n) {
  const int exponent = static_cast<int>(length) - static_cast<int>(i1) - n;
  return std::pow(lambda, exponent);
}

// Total order used to evaluate symmetric kernels with a fixed argument order,
// which makes K(x, y) and K(y, x) bitwise identical.
bool canonical_less(const FeatureSequence& a, const FeatureSequence& b) {
  if (a.length() != b.length()) return a.length() < b.length();
  for (std::size_t t = 0; t < a.length(); ++t) {
    const auto& da = a.tokens[t].data();
    const auto& db = b.tokens[t].data();
    if (std::lexicographical_compare(da.begin(), da.end(), db.begin(), db.end())) {
      return true;
    }
    if (std::lexicographical_compare(db.begin(), db.end(), da.begin(), da.end())) {
      return false;
    }
  }
  return false;
}

struct Tuples {
  std::vector<std::vector<std::size_t>> indices;
  std::vector<double> weights;
};

Tuples enumerate_tuples(std::size_t length, const SeqKernelConfig& cfg) {
  Tuples out;
  for_each_combination(length, cfg.n, [&](std::span<const std::size_t> idx) {
    out.indices.emplace_back(idx.begin(), idx.end());
    out.weights.push_back(tuple_weight(cfg.lambda, length, idx[0], cfg.n));
  });
  return out;
}

// Generic double sum shared by the flat and the deep kernels: `base(a, b)`
// is the similarity of 0-based positions a of x and b of y.
double tuple_kernel(std::size_t len_x, std::size_t len_y,
                    const SeqKernelConfig& cfg,
                    const std::function<double(std::size_t, std::size_t)>& base) {
  if (len_x < static_cast<std::size_t>(cfg.n) ||
      len_y < static_cast<std::size_t>(cfg.n)) {
    return 0.0;
  }
  const Tuples tx = enumerate_tuples(len_x, cfg);
  const Tuples ty = enumerate_tuples(len_y, cfg);
  std::vector<double> table(len_x * len_y);
  for (std::size_t a = 0; a < len_x; ++a) {
    for (std::size_t b = 0; b < len_y; ++b) table[a * len_y + b] = base(a, b);
  }
  const bool additive = cfg.composition == Composition::kAdditive;
  double total = 0.0;
  double z = 0.0;
  for (std::size_t p = 0; p < tx.indices.size(); ++p) {
    const auto& ix = tx.indices[p];
    for (std::size_t q = 0; q < ty.indices.size(); ++q) {
      const auto& iy = ty.indices[q];
      double score = additive ? 0.0 : 1.0;
      for (int m = 0; m < cfg.n; ++m) {
        const double s = table[ix[m] * len_y + iy[m]];
        score = additive ? score + s : score * s;
      }
      const double w = tx.weights[p] * ty.weights[q];
      total += w * score;
      z += w;
    }
  }
  if (cfg.normalization == Normalization::kNormalized) total /= z;
  return total;
}

}  // namespace

double string_kernel(const FeatureSequence& x, const FeatureSequence& y,
                     const SeqKernelConfig& cfg) {
  cfg.validate();
  check_dims(x, y);
  if (canonical_less(y, x)) return string_kernel(y, x, cfg);
  check_guards(std::max(x.length(), y.length()), cfg.n);
  return tuple_kernel(x.length(), y.length(), cfg,
                      [&](std::size_t a, std::size_t b) {
                        return dot(x.tokens[a], y.tokens[b]);
                      });
}

Tensor explicit_feature_map(const FeatureSequence& x, const SeqKernelConfig& cfg,
                            std::size_t dim) {
  cfg.validate();
  x.validate();
  const std::size_t d = x.empty() ? dim : x.dim();
  if (d == 0) {
    throw ContractError("explicit_feature_map: dimension unknown for empty input");
  }
  check_guards(x.length(), cfg.n);
  const bool additive = cfg.composition == Composition::kAdditive;
  std::size_t size = additive ? cfg.n * d : 1;
  if (!additive) {
    for (int m = 0; m < cfg.n; ++m) {
      size *= d;
      if (size > kMaxFeatureMapSize) {
        throw GuardError(fmt::format(
            "feature map of size d^n = {}^{} exceeds capacity {}", d, cfg.n,
            kMaxFeatureMapSize));
      }
    }
  }
  Tensor phi({size});
  double z = 0.0;
  std::vector<double> outer;
  for_each_combination(x.length(), cfg.n, [&](std::span<const std::size_t> idx) {
    const double w = tuple_weight(cfg.lambda, x.length(), idx[0], cfg.n);
    z += w;
    if (additive) {
      for (int m = 0; m < cfg.n; ++m) {
        const Tensor& tok = x.tokens[idx[m]];
        for (std::size_t k = 0; k < d; ++k) phi[m * d + k] += w * tok[k];
      }
      return;
    }
    outer.assign(1, w);
    for (int m = 0; m < cfg.n; ++m) {
      const Tensor& tok = x.tokens[idx[m]];
      std::vector<double> next(outer.size() * d);
      for (std::size_t a = 0; a < outer.size(); ++a) {
        for (std::size_t k = 0; k < d; ++k) next[a * d + k] = outer[a] * tok[k];
      }
      outer.swap(next);
    }
    for (std::size_t a = 0; a < size; ++a) phi[a] += outer[a];
  });
  if (cfg.normalization == Normalization::kNormalized && z > 0.0) {
    phi = scale(phi, 1.0 / z);
  }
  return phi;
}

ReferenceSequence reference_sequence(std::span<const Tensor> weights,
                                     std::size_t row, std::size_t order) {
  if (order > weights.size()) {
    throw ContractError(fmt::format("reference of order {} from {} matrices",
                                    order, weights.size()));
  }
  ReferenceSequence ref;
  for (std::size_t j = 0; j < order; ++j) ref.tokens.push_back(weights[j].row(row));
  return ref;
}

double unrolled_state(const FeatureSequence& x, const ReferenceSequence& reference,
                      std::span<const double> decay, SeqVariant variant) {
  x.validate();
  reference.validate();
  const std::size_t len = x.length();
  const std::size_t n = reference.length();
  if (n == 0) throw ContractError("unrolled_state: empty reference");
  if (decay.size() != len) {
    throw ContractError(fmt::format("{} decay values for {} tokens", decay.size(),
                                    len));
  }
  if (!x.empty() && x.dim() != reference.dim()) {
    throw ShapeError(fmt::format("token dimension {} vs reference dimension {}",
                                 x.dim(), reference.dim()));
  }
  check_guards(len, static_cast<int>(n));

  // Decay product over steps (first, len] that are not absorption steps.
  auto carried = [&](std::span<const std::size_t> idx) {
    double w = 1.0;
    std::size_t next = 1;
    for (std::size_t s = idx[0] + 1; s < len; ++s) {
      if (next < idx.size() && idx[next] == s) {
        ++next;
        continue;
      }
      w *= decay[s];
    }
    return w;
  };

  double total = 0.0;
  if (variant != SeqVariant::kAddNorm) {
    const bool normalized = variant == SeqVariant::kMultNorm;
    for_each_combination(len, n, [&](std::span<const std::size_t> idx) {
      double term = carried(idx);
      for (std::size_t m = 0; m < n; ++m) {
        term *= dot(reference.tokens[m], x.tokens[idx[m]]);
        if (normalized) term *= 1.0 - decay[idx[m]];
      }
      total += term;
    });
    return total;
  }
  // Additive: the level-k token enters once, then rides through levels
  // k+1..n; only the first token of each tuple is scored.
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t span_len = n - k;
    for_each_combination(len, span_len, [&](std::span<const std::size_t> idx) {
      double term = carried(idx) * dot(reference.tokens[k], x.tokens[idx[0]]);
      for (std::size_t m = 0; m < span_len; ++m) term *= 1.0 - decay[idx[m]];
      total += term;
    });
  }
  return total;
}

double gated_string_kernel_state(const FeatureSequence& x, const GateTrace& gates,
                                 std::span<const Tensor> weights,
                                 std::size_t coordinate, SeqVariant variant) {
  if (gates.decay.size() != x.length()) {
    throw ContractError(fmt::format("gate trace has {} steps for {} tokens",
                                    gates.decay.size(), x.length()));
  }
  std::vector<double> decay(x.length());
  for (std::size_t t = 0; t < x.length(); ++t) {
    const double g = gates.decay[t][coordinate];
    if (!(g > 0.0 && g < 1.0)) {
      throw ContractError(
          fmt::format("gate value {} at step {} outside (0, 1)", g, t + 1));
    }
    decay[t] = g;
  }
  const ReferenceSequence ref =
      reference_sequence(weights, coordinate, weights.size());
  return unrolled_state(x, ref, decay, variant);
}

double deep_sequence_kernel(const FeatureSequence& x, const FeatureSequence& y,
                            int depth, const SeqKernelConfig& cfg,
                            Activation act) {
  if (act != Activation::kIdentity) {
    throw UnsupportedActivationError(fmt::format(
        "deep_sequence_kernel: activation '{}' has no finite feature map; only "
        "identity is exact",
        to_string(act)));
  }
  if (depth < 1) throw ConfigError("deep_sequence_kernel: depth must be >= 1");
  cfg.validate();
  check_dims(x, y);
  if (canonical_less(y, x)) return deep_sequence_kernel(y, x, depth, cfg, act);
  check_guards(std::max(x.length(), y.length()), cfg.n);
  const std::size_t lx = x.length();
  const std::size_t ly = y.length();
  if (lx == 0 || ly == 0) return 0.0;

  // prefix[a][b] = K^(l)(x_{1:a+1}, y_{1:b+1}).
  std::vector<double> prefix(lx * ly);
  for (std::size_t a = 0; a < lx; ++a) {
    for (std::size_t b = 0; b < ly; ++b) {
      prefix[a * ly + b] = tuple_kernel(a + 1, b + 1, cfg,
                                        [&](std::size_t p, std::size_t q) {
                                          return dot(x.tokens[p], y.tokens[q]);
                                        });
    }
  }
  for (int level = 2; level <= depth; ++level) {
    std::vector<double> next(lx * ly);
    for (std::size_t a = 0; a < lx; ++a) {
      for (std::size_t b = 0; b < ly; ++b) {
        next[a * ly + b] = tuple_kernel(a + 1, b + 1, cfg,
                                        [&](std::size_t p, std::size_t q) {
                                          return prefix[p * ly + q];
                                        });
      }
    }
    prefix.swap(next);
  }
  return prefix[lx * ly - 1];
}

}  // namespace kernelnn
