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


#include "kernelnn/io.h"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "kernelnn/errors.h"

namespace kernelnn {

namespace {

using nlohmann::json;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.emplace_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

double parse_double(const std::string& raw, const std::string& file, int line,
                    const char* what) {
  const std::string s = trim(raw);
  if (s.empty()) throw ParseError(file, line, fmt::format("empty {}", what));
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(v)) {
    throw ParseError(file, line, fmt::format("bad {} '{}'", what, s));
  }
  return v;
}

std::size_t parse_index(const std::string& raw, const std::string& file, int line,
                        const char* what) {
  const std::string s = trim(raw);
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError(file, line, fmt::format("bad {} '{}'", what, s));
  }
  return v;
}

Tensor parse_vector(const std::string& raw, const std::string& file, int line) {
  std::vector<double> values;
  for (const std::string& part : split(raw, ',')) {
    values.push_back(parse_double(part, file, line, "feature value"));
  }
  return Tensor::vector(std::move(values));
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

void reject_unknown(const json& j, std::initializer_list<const char*> allowed,
                    const char* section) {
  if (!j.is_object()) throw ConfigError(fmt::format("{} must be a JSON object", section));
  const std::set<std::string> known(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) {
      throw ConfigError(fmt::format("unknown key '{}' in {}", key, section));
    }
  }
}

template <typename F>
auto config_guard(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("bad configuration value: {}", e.what()));
  }
}

}  // namespace

// ---- Vocabulary -----------------------------------------------------------

Vocabulary::Vocabulary() {
  add("<unk>");
  add("<eos>");
}

void Vocabulary::add(const std::string& token) {
  if (index_.count(token)) return;
  index_[token] = tokens_.size();
  tokens_.push_back(token);
}

Vocabulary Vocabulary::build(const std::vector<std::string>& lines) {
  Vocabulary v;
  for (const std::string& line : lines) {
    for (const std::string& tok : split_ws(line)) v.add(tok);
  }
  return v;
}

Vocabulary Vocabulary::from_tokens(const std::vector<std::string>& tokens,
                                   const std::string& source) {
  Vocabulary v;
  v.tokens_.clear();
  v.index_.clear();
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::string tok = trim(tokens[i]);
    const int line = static_cast<int>(i) + 1;
    if (tok.empty()) throw ParseError(source, line, "empty vocabulary entry");
    if (v.index_.count(tok)) {
      throw ParseError(source, line, fmt::format("duplicate token '{}'", tok));
    }
    v.add(tok);
  }
  if (v.tokens_.size() < 2 || v.tokens_[kUnkId] != "<unk>" ||
      v.tokens_[kEosId] != "<eos>") {
    throw ParseError(source, 1, "vocabulary must start with <unk> and <eos>");
  }
  return v;
}

Vocabulary Vocabulary::load(const std::string& path) {
  return from_tokens(read_lines(path), path);
}

void Vocabulary::save(const std::string& path) const {
  std::string out;
  for (const std::string& t : tokens_) out += t + "\n";
  write_file(path, out);
}

std::size_t Vocabulary::id(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? kUnkId : it->second;
}

const std::string& Vocabulary::token(std::size_t id) const {
  if (id >= tokens_.size()) {
    throw DataError(fmt::format("token id {} outside vocabulary of {}", id, tokens_.size()));
  }
  return tokens_[id];
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot open {}", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(fmt::format("cannot write {}", path));
  out << contents;
  if (!out) throw DataError(fmt::format("write to {} failed", path));
}

std::vector<std::string> read_lines(const std::string& path) {
  std::vector<std::string> lines;
  std::istringstream in(read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

std::vector<std::size_t> encode_corpus(const std::vector<std::string>& lines,
                                       const Vocabulary& vocab) {
  std::vector<std::size_t> ids;
  for (const std::string& line : lines) {
    const auto toks = split_ws(line);
    if (toks.empty()) continue;
    for (const std::string& t : toks) ids.push_back(vocab.id(t));
    ids.push_back(kEosId);
  }
  return ids;
}

// ---- Graph files ----------------------------------------------------------

std::vector<GraphRecord> parse_graph_text(const std::string& text,
                                          const std::string& file_name) {
  std::vector<GraphRecord> out;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  std::size_t dim = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = trim(raw);
    if (s.empty() || s[0] == '#') continue;
    const auto fields = split(s, '|');
    if (fields.size() < 3 || fields.size() > 4) {
      throw ParseError(file_name, line,
                       fmt::format("expected 3 or 4 '|'-separated fields, got {}",
                                   fields.size()));
    }
    const std::size_t nodes = parse_index(fields[0], file_name, line, "node count");
    if (nodes == 0) throw ParseError(file_name, line, "graph has no nodes");
    const auto feats = split(trim(fields[1]), ';');
    if (feats.size() != nodes) {
      throw ParseError(file_name, line, fmt::format("{} feature vectors for {} nodes",
                                                    feats.size(), nodes));
    }
    std::vector<Tensor> features;
    for (const std::string& f : feats) {
      features.push_back(parse_vector(f, file_name, line));
      if (dim == 0) dim = features.back().size();
      if (features.back().size() != dim) {
        throw ParseError(file_name, line,
                         fmt::format("feature dimension {} differs from {} earlier in the file",
                                     features.back().size(), dim));
      }
    }
    std::vector<std::pair<std::size_t, std::size_t>> undirected;
    std::vector<std::pair<std::size_t, std::size_t>> arcs;
    for (const std::string& e : split_ws(fields[2])) {
      const auto sep = e.find_first_of("->");
      if (sep == std::string::npos) {
        throw ParseError(file_name, line, fmt::format("bad edge '{}'", e));
      }
      const std::size_t u = parse_index(e.substr(0, sep), file_name, line, "edge endpoint");
      const std::size_t v = parse_index(e.substr(sep + 1), file_name, line, "edge endpoint");
      if (u >= nodes || v >= nodes) {
        throw ParseError(file_name, line,
                         fmt::format("edge '{}' outside {} nodes", e, nodes));
      }
      (e[sep] == '-' ? undirected : arcs).emplace_back(u, v);
    }
    GraphRecord rec;
    rec.line = line;
    const bool directed = !arcs.empty();
    if (directed) {
      for (auto [u, v] : undirected) {
        arcs.emplace_back(u, v);
        if (u != v) arcs.emplace_back(v, u);
      }
      rec.graph = FeatureGraph::from_edges(std::move(features), arcs, true);
    } else {
      rec.graph = FeatureGraph::from_edges(std::move(features), undirected, false);
    }
    if (fields.size() == 4 && !trim(fields[3]).empty()) {
      rec.target = parse_double(fields[3], file_name, line, "target");
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<GraphRecord> read_graph_file(const std::string& path) {
  return parse_graph_text(read_file(path), path);
}

std::string format_graph_record(const FeatureGraph& g, std::optional<double> target) {
  std::vector<std::string> feats;
  for (const Tensor& f : g.features) {
    std::vector<std::string> parts;
    for (double v : f.data()) parts.push_back(fmt::format("{}", v));
    feats.push_back(fmt::format("{}", fmt::join(parts, ",")));
  }
  std::vector<std::string> edges;
  for (std::size_t v = 0; v < g.num_nodes(); ++v) {
    for (std::size_t u : g.neighbors[v]) {
      if (g.directed) {
        edges.push_back(fmt::format("{}>{}", v, u));
      } else if (v <= u) {
        edges.push_back(fmt::format("{}-{}", v, u));
      }
    }
  }
  std::string line = fmt::format("{} | {} | {}", g.num_nodes(), fmt::join(feats, ";"),
                                 fmt::join(edges, " "));
  if (target) line += fmt::format(" | {}", *target);
  return line;
}

// ---- Sequence files -------------------------------------------------------

std::vector<SequenceRecord> parse_sequence_text(const std::string& text,
                                                const std::string& file_name) {
  std::vector<SequenceRecord> out;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  std::size_t dim = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = trim(raw);
    if (s.empty() || s[0] == '#') continue;
    SequenceRecord rec;
    rec.line = line;
    if (s != "-") {
      for (const std::string& tok : split(s, ';')) {
        rec.sequence.tokens.push_back(parse_vector(tok, file_name, line));
        const std::size_t d = rec.sequence.tokens.back().size();
        if (dim == 0) dim = d;
        if (d != dim) {
          throw ParseError(file_name, line,
                           fmt::format("token dimension {} differs from {} earlier in the file",
                                       d, dim));
        }
      }
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<SequenceRecord> read_sequence_file(const std::string& path) {
  return parse_sequence_text(read_file(path), path);
}

// ---- Configuration --------------------------------------------------------

std::string to_string(SeqVariant v) {
  switch (v) {
    case SeqVariant::kMultUnnorm: return "mult-unnorm";
    case SeqVariant::kMultNorm: return "mult-norm";
    case SeqVariant::kAddNorm: return "add-norm";
  }
  return "?";
}

SeqVariant parse_seq_variant(const std::string& s) {
  if (s == "mult-unnorm") return SeqVariant::kMultUnnorm;
  if (s == "mult-norm") return SeqVariant::kMultNorm;
  if (s == "add-norm") return SeqVariant::kAddNorm;
  throw ConfigError(fmt::format(
      "unknown variant '{}' (expected mult-unnorm, mult-norm or add-norm)", s));
}

std::string to_string(DecayMode m) {
  switch (m) {
    case DecayMode::kConstant: return "constant";
    case DecayMode::kLearned: return "learned";
    case DecayMode::kGatedInput: return "gated-input";
    case DecayMode::kGatedInputState: return "gated-input-state";
  }
  return "?";
}

DecayMode parse_decay_mode(const std::string& s) {
  if (s == "constant") return DecayMode::kConstant;
  if (s == "learned") return DecayMode::kLearned;
  if (s == "gated-input") return DecayMode::kGatedInput;
  if (s == "gated-input-state") return DecayMode::kGatedInputState;
  throw ConfigError(fmt::format("unknown decay mode '{}'", s));
}

std::string to_string(Composition c) {
  return c == Composition::kMultiplicative ? "multiplicative" : "additive";
}

Composition parse_composition(const std::string& s) {
  if (s == "multiplicative") return Composition::kMultiplicative;
  if (s == "additive") return Composition::kAdditive;
  throw ConfigError(fmt::format("unknown composition '{}'", s));
}

std::string to_string(GraphModelKind k) {
  switch (k) {
    case GraphModelKind::kRandomWalk: return "rw";
    case GraphModelKind::kGeneralized: return "generalized";
    case GraphModelKind::kDeep: return "deep";
    case GraphModelKind::kWl: return "wl";
    case GraphModelKind::kGatedRandomWalk: return "gated-rw";
  }
  return "?";
}

GraphModelKind parse_graph_model_kind(const std::string& s) {
  if (s == "rw") return GraphModelKind::kRandomWalk;
  if (s == "generalized") return GraphModelKind::kGeneralized;
  if (s == "deep") return GraphModelKind::kDeep;
  if (s == "wl") return GraphModelKind::kWl;
  if (s == "gated-rw") return GraphModelKind::kGatedRandomWalk;
  throw ConfigError(fmt::format("unknown graph model kind '{}'", s));
}

json to_json(const SeqModelConfig& cfg) {
  json j;
  j["n"] = cfg.n;
  j["layers"] = cfg.layers;
  j["input_dim"] = cfg.input_dim;
  j["hidden"] = cfg.hidden;
  j["decay"] = to_string(cfg.decay);
  j["lambda"] = cfg.lambda;
  j["variant"] = to_string(cfg.variant);
  j["activation"] = std::string(to_string(cfg.activation));
  j["output"] = cfg.output == OutputMode::kLastState ? "last-state" : "linear-combination";
  j["output_weights"] = cfg.output_weights;
  j["highway"] = cfg.highway;
  return j;
}

SeqModelConfig seq_config_from_json(const json& j) {
  reject_unknown(j, {"n", "layers", "input_dim", "hidden", "decay", "lambda", "variant",
                     "activation", "output", "output_weights", "highway"},
                 "sequence model config");
  return config_guard([&] {
    SeqModelConfig c;
    c.n = get_or(j, "n", c.n);
    c.layers = get_or(j, "layers", c.layers);
    c.input_dim = get_or(j, "input_dim", c.input_dim);
    c.hidden = get_or(j, "hidden", c.hidden);
    if (j.contains("decay")) c.decay = parse_decay_mode(j.at("decay").get<std::string>());
    c.lambda = get_or(j, "lambda", c.lambda);
    if (j.contains("variant")) {
      c.variant = parse_seq_variant(j.at("variant").get<std::string>());
    }
    if (j.contains("activation")) {
      c.activation = parse_activation(j.at("activation").get<std::string>());
    }
    if (j.contains("output")) {
      const auto o = j.at("output").get<std::string>();
      if (o == "last-state") {
        c.output = OutputMode::kLastState;
      } else if (o == "linear-combination") {
        c.output = OutputMode::kLinearCombination;
      } else {
        throw ConfigError(fmt::format("unknown output mode '{}'", o));
      }
    }
    c.output_weights = get_or(j, "output_weights", c.output_weights);
    c.highway = get_or(j, "highway", c.highway);
    c.validate();
    return c;
  });
}

json to_json(const GraphModelConfig& cfg) {
  json j;
  j["kind"] = to_string(cfg.kind);
  j["n"] = cfg.n;
  j["layers"] = cfg.layers;
  j["input_dim"] = cfg.input_dim;
  j["hidden"] = cfg.hidden;
  j["lambda"] = cfg.lambda;
  j["composition"] = to_string(cfg.composition);
  j["activation"] = std::string(to_string(cfg.activation));
  j["mask_empty_walks"] = cfg.mask_empty_walks;
  return j;
}

GraphModelConfig graph_config_from_json(const json& j) {
  reject_unknown(j, {"kind", "n", "layers", "input_dim", "hidden", "lambda",
                     "composition", "activation", "mask_empty_walks"},
                 "graph model config");
  return config_guard([&] {
    GraphModelConfig c;
    if (j.contains("kind")) c.kind = parse_graph_model_kind(j.at("kind").get<std::string>());
    c.n = get_or(j, "n", c.n);
    c.layers = get_or(j, "layers", c.layers);
    c.input_dim = get_or(j, "input_dim", c.input_dim);
    c.hidden = get_or(j, "hidden", c.hidden);
    c.lambda = get_or(j, "lambda", c.lambda);
    if (j.contains("composition")) {
      c.composition = parse_composition(j.at("composition").get<std::string>());
    }
    if (j.contains("activation")) {
      c.activation = parse_activation(j.at("activation").get<std::string>());
    }
    c.mask_empty_walks = get_or(j, "mask_empty_walks", c.mask_empty_walks);
    c.validate();
    return c;
  });
}

json to_json(const TrainConfig& tc) {
  json j;
  j["epochs"] = tc.epochs;
  j["max_steps"] = tc.max_steps;
  j["batch_size"] = tc.batch_size;
  j["unroll"] = tc.unroll;
  j["dropout"] = tc.dropout;
  j["seed"] = tc.seed;
  j["optimizer"] = tc.optimizer.kind == OptimizerKind::kSgd ? "sgd" : "adam";
  j["learning_rate"] = tc.optimizer.learning_rate;
  j["lr_decay"] = tc.optimizer.lr_decay;
  j["decay_start_epoch"] = tc.optimizer.decay_start_epoch;
  j["clip"] = tc.optimizer.clip;
  return j;
}

TrainConfig train_config_from_json(const json& j) {
  reject_unknown(j, {"epochs", "max_steps", "batch_size", "unroll", "dropout", "seed",
                     "optimizer", "learning_rate", "lr_decay", "decay_start_epoch", "clip"},
                 "train config");
  return config_guard([&] {
    TrainConfig t;
    t.epochs = get_or(j, "epochs", t.epochs);
    t.max_steps = get_or(j, "max_steps", t.max_steps);
    t.batch_size = get_or(j, "batch_size", t.batch_size);
    t.unroll = get_or(j, "unroll", t.unroll);
    t.dropout = get_or(j, "dropout", t.dropout);
    t.seed = get_or(j, "seed", t.seed);
    if (j.contains("optimizer")) {
      const auto o = j.at("optimizer").get<std::string>();
      if (o == "sgd") {
        t.optimizer.kind = OptimizerKind::kSgd;
      } else if (o == "adam") {
        t.optimizer.kind = OptimizerKind::kAdam;
      } else {
        throw ConfigError(fmt::format("unknown optimizer '{}'", o));
      }
    }
    t.optimizer.learning_rate = get_or(j, "learning_rate", t.optimizer.learning_rate);
    t.optimizer.lr_decay = get_or(j, "lr_decay", t.optimizer.lr_decay);
    t.optimizer.decay_start_epoch =
        get_or(j, "decay_start_epoch", t.optimizer.decay_start_epoch);
    t.optimizer.clip = get_or(j, "clip", t.optimizer.clip);
    t.validate();
    return t;
  });
}

ExperimentConfig read_experiment_config(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("{}: invalid JSON: {}", path, e.what()));
  }
  reject_unknown(j, {"task", "model", "train"}, "experiment config");
  ExperimentConfig c;
  c.task = config_guard([&] { return get_or<std::string>(j, "task", ""); });
  c.model = j.value("model", json::object());
  c.train = train_config_from_json(j.value("train", json::object()));
  return c;
}

std::string format_kernel_value(double v) {
  if (v == 0.0) return "0";
  if (std::fabs(v) < 1e-3) return fmt::format("{:.12e}", v);
  return fmt::format("{:.12f}", v);
}

}  // namespace kernelnn
