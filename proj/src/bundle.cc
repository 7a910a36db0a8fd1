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


#include "kernelnn/bundle.h"

#include <bit>
#include <cstring>

#include <fmt/format.h>

#include "kernelnn/errors.h"
#include "kernelnn/io.h"

namespace kernelnn {

namespace {

using nlohmann::json;

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

std::string encode_doubles(std::span<const double> values) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(values.size() * 16);
  for (double v : values) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int byte = 0; byte < 8; ++byte) {
      const auto b = static_cast<unsigned>((bits >> (8 * byte)) & 0xffu);
      out.push_back(kDigits[b >> 4]);
      out.push_back(kDigits[b & 0xfu]);
    }
  }
  return out;
}

std::vector<double> decode_doubles(const std::string& hex) {
  if (hex.size() % 16 != 0) {
    throw DataError(fmt::format("tensor data has {} hex digits, not a multiple of 16",
                                hex.size()));
  }
  std::vector<double> out;
  out.reserve(hex.size() / 16);
  for (std::size_t i = 0; i < hex.size(); i += 16) {
    std::uint64_t bits = 0;
    for (int byte = 0; byte < 8; ++byte) {
      const int hi = hex_value(hex[i + 2 * byte]);
      const int lo = hex_value(hex[i + 2 * byte + 1]);
      if (hi < 0 || lo < 0) throw DataError("tensor data contains a non-hex digit");
      bits |= static_cast<std::uint64_t>(hi * 16 + lo) << (8 * byte);
    }
    out.push_back(std::bit_cast<double>(bits));
  }
  return out;
}

std::string serialize_bundle(const ModelBundle& bundle) {
  json j;
  j["format"] = ModelBundle::kFormatName;
  j["version"] = ModelBundle::kFormatVersion;
  j["kind"] = bundle.kind;
  j["config"] = bundle.config;
  j["seed"] = bundle.seed;
  j["vocab"] = bundle.vocab;
  json tensors = json::array();
  for (const auto& [name, value] : bundle.params.entries()) {
    json t;
    t["name"] = name;
    t["shape"] = value.shape();
    t["data"] = encode_doubles(value.data());
    tensors.push_back(std::move(t));
  }
  j["tensors"] = std::move(tensors);
  return j.dump(1) + "\n";
}

ModelBundle parse_bundle(const std::string& text, const std::string& source) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(fmt::format("{}: not a model bundle: {}", source, e.what()));
  }
  try {
    if (j.at("format").get<std::string>() != ModelBundle::kFormatName) {
      throw DataError(fmt::format("{}: not a model bundle", source));
    }
    const int version = j.at("version").get<int>();
    if (version != ModelBundle::kFormatVersion) {
      throw DataError(fmt::format("{}: bundle format version {} is not supported (expected {})",
                                  source, version, ModelBundle::kFormatVersion));
    }
    ModelBundle b;
    b.kind = j.at("kind").get<std::string>();
    if (b.kind != "seq" && b.kind != "graph" && b.kind != "wl") {
      throw DataError(fmt::format("{}: unknown model kind '{}'", source, b.kind));
    }
    b.config = j.at("config");
    b.seed = j.at("seed").get<std::uint64_t>();
    b.vocab = j.at("vocab").get<std::vector<std::string>>();
    for (const json& t : j.at("tensors")) {
      const auto shape = t.at("shape").get<Shape>();
      std::vector<double> data = decode_doubles(t.at("data").get<std::string>());
      std::size_t count = 1;
      for (std::size_t e : shape) count *= e;
      if (shape.empty() || count != data.size()) {
        throw DataError(fmt::format("{}: tensor {} has {} values for shape {}", source,
                                    t.at("name").get<std::string>(), data.size(),
                                    shape_string(shape)));
      }
      b.params.set(t.at("name").get<std::string>(), Tensor(shape, std::move(data)));
    }
    return b;
  } catch (const json::exception& e) {
    throw DataError(fmt::format("{}: malformed bundle: {}", source, e.what()));
  }
}

void save_bundle(const ModelBundle& bundle, const std::string& path) {
  write_file(path, serialize_bundle(bundle));
}

ModelBundle load_bundle(const std::string& path) {
  return parse_bundle(read_file(path), path);
}

}  // namespace kernelnn
