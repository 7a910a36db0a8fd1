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


#ifndef KERNELNN_CLI_H_
#define KERNELNN_CLI_H_

#include <ostream>
#include <string>
#include <vector>

namespace kernelnn {

// Process exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitVerifyFailed = 1;
inline constexpr int kExitInput = 2;
inline constexpr int kExitGuard = 3;
inline constexpr int kExitNumerical = 4;

// Runs the tool on `args` (without the program name). Results go to `out`,
// diagnostics to `err`. Never throws; every error maps onto an exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kernelnn

#endif  // KERNELNN_CLI_H_
