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


#ifndef KERNELNN_ERRORS_H_
#define KERNELNN_ERRORS_H_

#include <stdexcept>
#include <string>

namespace kernelnn {

// Base class for every error raised by the library. The CLI maps the
// concrete subclasses onto its exit-code contract.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand shapes do not agree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// A documented precondition was violated by the caller.
class ContractError : public Error {
 public:
  using Error::Error;
};

// Inconsistent model or training configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A brute-force oracle refused its input because enumeration would blow up.
class GuardError : public Error {
 public:
  using Error::Error;
};

// Exact kernel evaluation is only defined for the identity activation.
class UnsupportedActivationError : public Error {
 public:
  using Error::Error;
};

// Non-finite values where finite ones are required.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent data (bad token id, empty data set, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

// Text input that failed to parse. Carries the file name and 1-based line.
class ParseError : public DataError {
 public:
  ParseError(std::string file, int line, const std::string& message)
      : DataError(file + ":" + std::to_string(line) + ": " + message),
        file_(std::move(file)),
        line_(line) {}

  const std::string& file() const { return file_; }
  int line() const { return line_; }

 private:
  std::string file_;
  int line_;
};

}  // namespace kernelnn

#endif  // KERNELNN_ERRORS_H_
