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


#ifndef KERNELNN_VERIFY_H_
#define KERNELNN_VERIFY_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kernelnn/seq_kernel.h"

namespace kernelnn {

// Tolerances of the verification suites.
inline constexpr double kIdentityTol = 1e-10;
inline constexpr double kDegenerationTol = 1e-12;
inline constexpr double kRkhsResidualTol = 1e-6;
// A random vector must leave at least this residual, or the range test
// would pass for anything.
inline constexpr double kRkhsControlMin = 1e-2;
inline constexpr double kWlTol = 1e-8;
inline constexpr double kGradTol = 1e-5;
inline constexpr double kPsdTol = 1e-8;
// Finite-difference step and the magnitude below which gradient entries are
// compared absolutely rather than relatively.
inline constexpr double kGradEps = 1e-5;
inline constexpr double kGradFloor = 1e-4;

struct VerifyOptions {
  std::string suite = "all";
  int seeds = 20;
  std::uint64_t base_seed = 1;
  std::optional<double> tol;
  std::optional<SeqVariant> variant;
  std::optional<int> n;
  std::optional<double> lambda;
  std::optional<int> depth;
  bool gated = false;
  // <= 0: OpenMP default, further capped by KERNELNN_THREADS.
  int threads = 0;
};

struct CheckRecord {
  std::string suite;
  std::uint64_t seed = 0;
  double max_rel_err = 0.0;
  double tol = 0.0;
  bool pass = false;
  std::size_t checks = 0;  // values compared

  std::string to_json() const;
};

const std::vector<std::string>& verify_suites();

// One record per (suite, seed). Unknown suites throw ConfigError.
std::vector<CheckRecord> run_verify(const VerifyOptions& options);

// Single-seed entry points, also used by the tests.
CheckRecord verify_theorem1(std::uint64_t seed, const VerifyOptions& o);
CheckRecord verify_theorem4(std::uint64_t seed, const VerifyOptions& o);
CheckRecord verify_cnn_degeneration(std::uint64_t seed, const VerifyOptions& o);
CheckRecord verify_gated_degeneration(std::uint64_t seed, const VerifyOptions& o);
CheckRecord verify_variants(std::uint64_t seed, const VerifyOptions& o);
CheckRecord verify_deep_rkhs(std::uint64_t seed, const VerifyOptions& o);
CheckRecord verify_wl(std::uint64_t seed, const VerifyOptions& o);
CheckRecord verify_gradcheck(std::uint64_t seed, const VerifyOptions& o);
CheckRecord verify_psd(std::uint64_t seed, const VerifyOptions& o);

// Thread count after applying KERNELNN_THREADS.
int verify_thread_count(int requested);

}  // namespace kernelnn

#endif  // KERNELNN_VERIFY_H_
