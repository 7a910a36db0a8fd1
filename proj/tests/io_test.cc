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


#include <cmath>
#include <filesystem>

#include <doctest.h>

#include "kernelnn/bundle.h"
#include "kernelnn/errors.h"
#include "kernelnn/io.h"
#include "kernelnn/random.h"

namespace kernelnn {
namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("kernelnn_io_" + name)).string();
}

TEST_CASE("graph file grammar") {
  const std::string text =
      "# comment\n"
      "\n"
      "3 | 1,0;0,1;0.5,-2 | 0-1 1-2 | 4.25\n"
      "2 | 1,1;2,2 |\n"
      "2 | 1,0;0,1 | 0>1\n";
  const auto records = parse_graph_text(text, "g.txt");
  REQUIRE(records.size() == 3);
  CHECK(records[0].line == 3);
  CHECK(records[0].graph.neighbors[1] == std::vector<std::size_t>{0, 2});
  CHECK(records[0].graph.features[2] == Tensor::vector({0.5, -2}));
  CHECK(*records[0].target == 4.25);
  CHECK_FALSE(records[1].target);
  CHECK(records[1].graph.num_arcs() == 0);
  CHECK(records[2].graph.directed);
  CHECK(records[2].graph.neighbors[1].empty());
}

TEST_CASE("graph records round-trip through text") {
  Rng rng(4);
  for (bool directed : {false, true}) {
    FeatureGraph g = random_graph(rng, 5, 3, 0.5);
    if (directed) g = FeatureGraph::from_edges(g.features, {{0, 1}, {2, 1}, {4, 0}}, true);
    const auto back = parse_graph_text(format_graph_record(g, -1.5), "x");
    REQUIRE(back.size() == 1);
    CHECK(back[0].graph.features == g.features);
    CHECK(back[0].graph.neighbors == g.neighbors);
    CHECK(back[0].graph.directed == directed);
    CHECK(*back[0].target == -1.5);
  }
}

TEST_CASE("graph parse errors carry the line number") {
  auto line_of = [](const std::string& text) {
    try {
      parse_graph_text(text, "bad.txt");
    } catch (const ParseError& e) {
      CHECK(e.file() == "bad.txt");
      CHECK(std::string(e.what()).find("bad.txt:") == 0);
      return e.line();
    }
    return -1;
  };
  CHECK(line_of("1 | 1 |\n2 | 1;2 | 0-5\n") == 2);
  CHECK(line_of("\n\n3 | 1;2 |\n") == 3);
  CHECK(line_of("1 | 1,2 |\n1 | 1 |\n") == 2);
  CHECK(line_of("x | 1 |\n") == 1);
  CHECK(line_of("1 | 1 | | 2 | 3\n") == 1);
  CHECK(line_of("1 | abc |\n") == 1);
  CHECK(line_of("2 | 1;2 | 0=1\n") == 1);
  CHECK(line_of("1 | 1 | | nan-ish\n") == 1);
}

TEST_CASE("sequence file grammar") {
  const auto recs = parse_sequence_text("1,0;0,1\n-\n# skip\n0.5,0.25\n", "s.txt");
  REQUIRE(recs.size() == 3);
  CHECK(recs[0].sequence.length() == 2);
  CHECK(recs[1].sequence.empty());
  CHECK(recs[2].line == 4);
  CHECK_THROWS_AS(parse_sequence_text("1,0\n1,0,0\n", "s.txt"), ParseError);
  CHECK_THROWS_AS(parse_sequence_text("1;;2\n", "s.txt"), ParseError);
}

TEST_CASE("vocabulary and corpus encoding") {
  const Vocabulary v = Vocabulary::build({"a b a", "c"});
  CHECK(v.size() == 5);
  CHECK(v.token(kUnkId) == "<unk>");
  CHECK(v.token(kEosId) == "<eos>");
  CHECK(v.id("a") == 2);
  CHECK(v.id("zzz") == kUnkId);
  const std::vector<std::size_t> ids = encode_corpus({"a b", "", "c zzz"}, v);
  CHECK(ids == std::vector<std::size_t>{2, 3, kEosId, 4, kUnkId, kEosId});

  const std::string path = temp_path("vocab.txt");
  v.save(path);
  CHECK(Vocabulary::load(path).tokens() == v.tokens());
  write_file(path, "a\n<eos>\n");
  CHECK_THROWS_AS(Vocabulary::load(path), ParseError);
  write_file(path, "<unk>\n<eos>\nx\nx\n");
  CHECK_THROWS_AS(Vocabulary::load(path), ParseError);
  std::filesystem::remove(path);
}

TEST_CASE("configs round-trip and reject unknown keys") {
  SeqModelConfig s;
  s.n = 3;
  s.layers = 2;
  s.hidden = 5;
  s.decay = DecayMode::kGatedInputState;
  s.variant = SeqVariant::kAddNorm;
  s.highway = true;
  s.input_dim = 5;
  CHECK(to_json(seq_config_from_json(to_json(s))) == to_json(s));

  GraphModelConfig g;
  g.kind = GraphModelKind::kWl;
  g.layers = 2;
  g.composition = Composition::kAdditive;
  g.mask_empty_walks = true;
  CHECK(to_json(graph_config_from_json(to_json(g))) == to_json(g));

  TrainConfig t;
  t.epochs = 7;
  t.optimizer.kind = OptimizerKind::kAdam;
  t.optimizer.clip = 5.0;
  CHECK(to_json(train_config_from_json(to_json(t))) == to_json(t));

  CHECK_THROWS_AS(seq_config_from_json(nlohmann::json{{"hiddn", 3}}), ConfigError);
  CHECK_THROWS_AS(graph_config_from_json(nlohmann::json{{"kind", "cnn"}}), ConfigError);
  CHECK_THROWS_AS(seq_config_from_json(nlohmann::json{{"n", "two"}}), ConfigError);
  CHECK_THROWS_AS(seq_config_from_json(nlohmann::json{{"lambda", 1.5}}), ConfigError);
}

TEST_CASE("enum names") {
  for (SeqVariant v : {SeqVariant::kMultUnnorm, SeqVariant::kMultNorm, SeqVariant::kAddNorm}) {
    CHECK(parse_seq_variant(to_string(v)) == v);
  }
  for (GraphModelKind k : {GraphModelKind::kRandomWalk, GraphModelKind::kGeneralized,
                           GraphModelKind::kDeep, GraphModelKind::kWl,
                           GraphModelKind::kGatedRandomWalk}) {
    CHECK(parse_graph_model_kind(to_string(k)) == k);
  }
  CHECK_THROWS_AS(parse_seq_variant("add-unnorm"), ConfigError);
}

TEST_CASE("kernel value formatting") {
  CHECK(format_kernel_value(0.0) == "0");
  CHECK(format_kernel_value(1.0) == "1.000000000000");
  CHECK(format_kernel_value(-2.5) == "-2.500000000000");
  CHECK(format_kernel_value(1.25e-5) == "1.250000000000e-05");
}

TEST_CASE("bundle round trip is byte exact") {
  Rng rng(7);
  ModelBundle b;
  b.kind = "seq";
  SeqModelConfig cfg;
  cfg.hidden = 3;
  b.config = to_json(cfg);
  b.seed = 42;
  b.vocab = {"<unk>", "<eos>", "a"};
  b.params.set("lm.embed", random_tensor(rng, {3, 1}));
  b.params.set("seq.0.W1", random_tensor(rng, {3, 1}));
  Tensor odd({2});
  odd[0] = -0.0;
  odd[1] = 5e-324;
  b.params.set("z.odd", odd);

  const std::string text = serialize_bundle(b);
  const ModelBundle back = parse_bundle(text, "mem");
  CHECK(serialize_bundle(back) == text);
  CHECK(back.params.at("seq.0.W1") == b.params.at("seq.0.W1"));
  CHECK(std::signbit(back.params.at("z.odd")[0]));
  CHECK(back.params.at("z.odd")[1] == 5e-324);

  const std::string path = temp_path("bundle.json");
  save_bundle(b, path);
  const std::string first = read_file(path);
  save_bundle(load_bundle(path), path);
  CHECK(read_file(path) == first);
  std::filesystem::remove(path);
}

TEST_CASE("bundle version mismatch and corruption are rejected") {
  ModelBundle b;
  b.kind = "graph";
  b.config = nlohmann::json::object();
  b.params.set("g.0.W1", Tensor({1, 1}, 2.0));
  nlohmann::json j = nlohmann::json::parse(serialize_bundle(b));
  j["version"] = ModelBundle::kFormatVersion + 1;
  CHECK_THROWS_AS(parse_bundle(j.dump(), "v"), DataError);
  CHECK_THROWS_AS(parse_bundle("{not json", "c"), DataError);
  CHECK(encode_doubles(std::vector<double>{1.0}) == "000000000000f03f");
  CHECK(decode_doubles("000000000000f03f") == std::vector<double>{1.0});
  CHECK_THROWS_AS(decode_doubles("00f03f"), DataError);
}

TEST_CASE("experiment config") {
  const std::string path = temp_path("exp.json");
  write_file(path, R"({"task": "lm", "model": {"n": 1}, "train": {"epochs": 3, "optimizer": "adam"}})");
  const ExperimentConfig c = read_experiment_config(path);
  CHECK(c.task == "lm");
  CHECK(c.train.epochs == 3);
  CHECK(c.train.optimizer.kind == OptimizerKind::kAdam);
  write_file(path, R"({"task": "lm", "extra": 1})");
  CHECK_THROWS_AS(read_experiment_config(path), ConfigError);
  write_file(path, "{");
  CHECK_THROWS_AS(read_experiment_config(path), ConfigError);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(read_file(path), DataError);
}

}  // namespace
}  // namespace kernelnn
