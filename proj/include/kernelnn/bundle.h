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


#ifndef KERNELNN_BUNDLE_H_
#define KERNELNN_BUNDLE_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kernelnn/params.h"

namespace kernelnn {

// Versioned model container. Serialized as JSON with sorted keys; every
// tensor stores its shape and its values as 16 hex digits per entry, the
// bytes of the IEEE-754 double in little-endian order. Save, load, save is
// byte-identical.
struct ModelBundle {
  static constexpr int kFormatVersion = 1;
  static constexpr const char* kFormatName = "kernelnn-bundle";

  std::string kind;  // "seq", "graph" or "wl"
  nlohmann::json config;
  std::uint64_t seed = 0;
  std::vector<std::string> vocab;  // language models only
  ParameterSet params;
};

std::string serialize_bundle(const ModelBundle& bundle);
// Throws DataError on malformed input or a different format version.
ModelBundle parse_bundle(const std::string& text, const std::string& source);

void save_bundle(const ModelBundle& bundle, const std::string& path);
ModelBundle load_bundle(const std::string& path);

std::string encode_doubles(std::span<const double> values);
std::vector<double> decode_doubles(const std::string& hex);

}  // namespace kernelnn

#endif  // KERNELNN_BUNDLE_H_
