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


// Serial reference against the OpenMP paths.

#include <benchmark/benchmark.h>

#include "kernelnn/gram.h"
#include "kernelnn/graph_kernel.h"
#include "kernelnn/random.h"
#include "kernelnn/verify.h"

namespace kernelnn {
namespace {

std::vector<FeatureSequence> sequences(std::size_t count) {
  Rng rng(1);
  std::vector<FeatureSequence> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(random_sequence(rng, 8, 4));
  return out;
}

std::vector<FeatureGraph> graphs(std::size_t count) {
  Rng rng(2);
  std::vector<FeatureGraph> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(random_graph(rng, 6, 3, 0.5));
  return out;
}

void BM_StringGramSerial(benchmark::State& state) {
  const auto set = sequences(static_cast<std::size_t>(state.range(0)));
  const SeqKernelConfig cfg{3, 0.5};
  const PairKernel k = [&](std::size_t a, std::size_t b) {
    return string_kernel(set[a], set[b], cfg);
  };
  for (auto _ : state) benchmark::DoNotOptimize(gram_matrix_serial(set.size(), k));
}

void BM_StringGramParallel(benchmark::State& state) {
  const auto set = sequences(static_cast<std::size_t>(state.range(0)));
  const SeqKernelConfig cfg{3, 0.5};
  const PairKernel k = [&](std::size_t a, std::size_t b) {
    return string_kernel(set[a], set[b], cfg);
  };
  for (auto _ : state) benchmark::DoNotOptimize(gram_matrix_parallel(set.size(), k));
}

void BM_WalkGramSerial(benchmark::State& state) {
  const auto set = graphs(static_cast<std::size_t>(state.range(0)));
  const GraphKernelConfig cfg{3, 0.5};
  const PairKernel k = [&](std::size_t a, std::size_t b) {
    return random_walk_kernel(set[a], set[b], cfg);
  };
  for (auto _ : state) benchmark::DoNotOptimize(gram_matrix_serial(set.size(), k));
}

void BM_WalkGramParallel(benchmark::State& state) {
  const auto set = graphs(static_cast<std::size_t>(state.range(0)));
  const GraphKernelConfig cfg{3, 0.5};
  const PairKernel k = [&](std::size_t a, std::size_t b) {
    return random_walk_kernel(set[a], set[b], cfg);
  };
  for (auto _ : state) benchmark::DoNotOptimize(gram_matrix_parallel(set.size(), k));
}

void BM_VerifySweep(benchmark::State& state) {
  VerifyOptions o;
  o.suite = "theorem1";
  o.seeds = 20;
  o.threads = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_verify(o));
}

BENCHMARK(BM_StringGramSerial)->Arg(16)->Arg(32);
BENCHMARK(BM_StringGramParallel)->Arg(16)->Arg(32);
BENCHMARK(BM_WalkGramSerial)->Arg(16)->Arg(32);
BENCHMARK(BM_WalkGramParallel)->Arg(16)->Arg(32);
BENCHMARK(BM_VerifySweep)->Arg(1)->Arg(4);

}  // namespace
}  // namespace kernelnn

BENCHMARK_MAIN();
