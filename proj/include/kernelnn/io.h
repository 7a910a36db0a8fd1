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


#ifndef KERNELNN_IO_H_
#define KERNELNN_IO_H_

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "kernelnn/graph.h"
#include "kernelnn/graph_nn.h"
#include "kernelnn/seq_nn.h"
#include "kernelnn/sequence.h"
#include "kernelnn/train.h"

namespace kernelnn {

// ---- Corpus and vocabulary ------------------------------------------------

inline constexpr std::size_t kUnkId = 0;
inline constexpr std::size_t kEosId = 1;

class Vocabulary {
 public:
  // Contains only <unk> (id 0) and <eos> (id 1).
  Vocabulary();

  // Adds every whitespace-separated token of `lines` in first-seen order.
  static Vocabulary build(const std::vector<std::string>& lines);
  // One token per line; line number (0-based) is the id. Line 0 must be <unk>.
  static Vocabulary load(const std::string& path);
  // Same checks as load; `source` names the origin in errors.
  static Vocabulary from_tokens(const std::vector<std::string>& tokens,
                                const std::string& source);
  void save(const std::string& path) const;

  std::size_t size() const { return tokens_.size(); }
  // kUnkId for unknown tokens.
  std::size_t id(const std::string& token) const;
  const std::string& token(std::size_t id) const;
  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  void add(const std::string& token);
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
};

std::vector<std::string> read_lines(const std::string& path);

// Whitespace tokenization; every sentence ends with <eos>.
std::vector<std::size_t> encode_corpus(const std::vector<std::string>& lines,
                                       const Vocabulary& vocab);

// ---- Graph files ----------------------------------------------------------
//
// One graph per line:
//   <nodes> | <f_0>;<f_1>;... | <edges> [| <target>]
// Features are comma-separated decimals. Edges are space-separated "u-v"
// (undirected) or "u>v" (directed arc) pairs; an empty edge field means no
// edges. A graph containing any arc is directed and "u-v" adds both arcs.
// Blank lines and lines starting with '#' are skipped.

struct GraphRecord {
  FeatureGraph graph;
  std::optional<double> target;
  int line = 0;
};

std::vector<GraphRecord> parse_graph_text(const std::string& text,
                                          const std::string& file_name);
std::vector<GraphRecord> read_graph_file(const std::string& path);
std::string format_graph_record(const FeatureGraph& g, std::optional<double> target);

// ---- Sequence files -------------------------------------------------------
//
// One sequence per line: tokens separated by ';', components by ','. An empty
// line after stripping is skipped; the literal "-" is the empty sequence.

struct SequenceRecord {
  FeatureSequence sequence;
  int line = 0;
};

std::vector<SequenceRecord> parse_sequence_text(const std::string& text,
                                                const std::string& file_name);
std::vector<SequenceRecord> read_sequence_file(const std::string& path);

// ---- Configuration --------------------------------------------------------

std::string to_string(SeqVariant v);
SeqVariant parse_seq_variant(const std::string& s);
std::string to_string(DecayMode m);
DecayMode parse_decay_mode(const std::string& s);
std::string to_string(Composition c);
Composition parse_composition(const std::string& s);
std::string to_string(GraphModelKind k);
GraphModelKind parse_graph_model_kind(const std::string& s);

nlohmann::json to_json(const SeqModelConfig& cfg);
SeqModelConfig seq_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const GraphModelConfig& cfg);
GraphModelConfig graph_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TrainConfig& tc);
TrainConfig train_config_from_json(const nlohmann::json& j);

// Training config file: {"model": {...}, "train": {...}}. Unknown keys are
// rejected with ConfigError.
struct ExperimentConfig {
  std::string task;  // "lm" or "graph-reg"
  nlohmann::json model;
  TrainConfig train;
};

ExperimentConfig read_experiment_config(const std::string& path);

// Kernel values: exact zero prints "0", magnitudes below 1e-3 use %.12e,
// everything else %.12f.
std::string format_kernel_value(double v);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

}  // namespace kernelnn

#endif  // KERNELNN_IO_H_
