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


#include <doctest.h>

#include "kernelnn/errors.h"
#include "kernelnn/verify.h"

namespace kernelnn {
namespace {

TEST_CASE("every suite passes on a few seeds") {
  VerifyOptions o;
  o.seeds = 3;
  o.base_seed = 101;
  const std::vector<CheckRecord> records = run_verify(o);
  CHECK(records.size() == 3 * verify_suites().size());
  for (const CheckRecord& r : records) {
    CAPTURE(r.to_json());
    CHECK(r.pass);
    CHECK(r.checks > 0);
  }
}

TEST_CASE("suite options narrow the sweep") {
  VerifyOptions o;
  o.suite = "variants";
  o.seeds = 2;
  o.variant = SeqVariant::kAddNorm;
  o.n = 3;
  o.lambda = 0.2;
  for (const CheckRecord& r : run_verify(o)) CHECK(r.pass);
  o.suite = "theorem1";
  o.gated = true;
  for (const CheckRecord& r : run_verify(o)) CHECK(r.pass);
  o.suite = "theorem4";
  for (const CheckRecord& r : run_verify(o)) CHECK(r.pass);
}

TEST_CASE("parallel sweeps reproduce serial ones") {
  VerifyOptions o;
  o.suite = "psd";
  o.seeds = 4;
  o.threads = 1;
  const auto serial = run_verify(o);
  o.threads = 4;
  const auto parallel = run_verify(o);
  REQUIRE(serial.size() == parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].to_json() == parallel[i].to_json());
  }
}

TEST_CASE("a record fails when its error exceeds the tolerance") {
  VerifyOptions o;
  o.tol = 1e-300;
  const CheckRecord r = verify_gradcheck(1, o);
  CHECK_FALSE(r.pass);
  CHECK(r.max_rel_err > 0.0);
}

TEST_CASE("unknown suites are configuration errors") {
  VerifyOptions o;
  o.suite = "theorem9";
  CHECK_THROWS_AS(run_verify(o), ConfigError);
}

}  // namespace
}  // namespace kernelnn
