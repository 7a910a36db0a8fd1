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


#include "kernelnn/cli.h"

#include <algorithm>
#include <fstream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "kernelnn/bundle.h"
#include "kernelnn/errors.h"
#include "kernelnn/graph_kernel.h"
#include "kernelnn/io.h"
#include "kernelnn/random.h"
#include "kernelnn/verify.h"

namespace kernelnn {

namespace {

struct KernelArgs {
  std::string type = "auto";
  std::string variant = "mult-unnorm";
  int n = 2;
  double lambda = 0.5;
  int depth = 1;
  bool gated = false;
  std::vector<std::string> files;
  std::string out;
};

struct VerifyArgs {
  std::string suite = "all";
  int seeds = 20;
  std::optional<double> tol;
  std::optional<std::string> variant;
  std::optional<int> n;
  std::optional<double> lambda;
  std::optional<int> depth;
  bool gated = false;
  int threads = 0;
  std::string out;
};

struct TrainArgs {
  std::string config;
  std::string data;
  std::string valid;
  std::string out;
  std::string metrics;
};

struct EvalArgs {
  std::string model;
  std::string data;
  std::string out;
  std::size_t unroll = 35;
};

void emit(const std::string& text, std::ostream& out, const std::string& path) {
  out << text;
  if (!path.empty()) write_file(path, text);
}

bool looks_like_graph_file(const std::string& path) {
  for (const std::string& raw : read_lines(path)) {
    const auto first = raw.find_first_not_of(" \t\r");
    if (first == std::string::npos || raw[first] == '#') continue;
    return raw.find('|') != std::string::npos;
  }
  return false;
}

// Line i of the first file against line i of the second, or consecutive
// records of a single file.
template <typename Record>
std::vector<std::pair<Record, Record>> pair_records(std::vector<std::vector<Record>> sets,
                                                    const std::vector<std::string>& files) {
  std::vector<std::pair<Record, Record>> pairs;
  if (sets.size() == 1) {
    if (sets[0].size() % 2 != 0) {
      throw DataError(fmt::format("{}: a single input file needs an even number of records, "
                                  "got {}", files[0], sets[0].size()));
    }
    for (std::size_t i = 0; i < sets[0].size(); i += 2) {
      pairs.emplace_back(std::move(sets[0][i]), std::move(sets[0][i + 1]));
    }
  } else {
    if (sets[0].size() != sets[1].size()) {
      throw DataError(fmt::format("{} has {} records but {} has {}", files[0], sets[0].size(),
                                  files[1], sets[1].size()));
    }
    for (std::size_t i = 0; i < sets[0].size(); ++i) {
      pairs.emplace_back(std::move(sets[0][i]), std::move(sets[1][i]));
    }
  }
  if (pairs.empty()) throw DataError(fmt::format("{}: no records", files[0]));
  return pairs;
}

SeqKernelConfig seq_kernel_config(const KernelArgs& a) {
  SeqKernelConfig c;
  c.n = a.n;
  c.lambda = a.lambda;
  switch (parse_seq_variant(a.variant)) {
    case SeqVariant::kMultUnnorm:
      break;
    case SeqVariant::kMultNorm:
      c.normalization = Normalization::kNormalized;
      break;
    case SeqVariant::kAddNorm:
      c.composition = Composition::kAdditive;
      c.normalization = Normalization::kNormalized;
      break;
  }
  c.validate();
  return c;
}

int cmd_kernel(const KernelArgs& a, std::ostream& out) {
  if (a.gated) {
    throw ConfigError("--gated needs learned gate parameters; the kernel command "
                      "evaluates ungated kernels only");
  }
  if (a.files.empty() || a.files.size() > 2) {
    throw ConfigError("kernel expects one or two input files");
  }
  if (a.depth < 1) throw ConfigError("--depth must be >= 1");
  std::string type = a.type;
  if (type == "auto") type = looks_like_graph_file(a.files[0]) ? "graph" : "seq";
  std::string text;
  if (type == "seq") {
    const SeqKernelConfig cfg = seq_kernel_config(a);
    std::vector<std::vector<FeatureSequence>> sets;
    for (const std::string& f : a.files) {
      std::vector<FeatureSequence> seqs;
      for (SequenceRecord& r : read_sequence_file(f)) seqs.push_back(std::move(r.sequence));
      sets.push_back(std::move(seqs));
    }
    for (const auto& [x, y] : pair_records(std::move(sets), a.files)) {
      const double v = a.depth == 1 ? string_kernel(x, y, cfg)
                                    : deep_sequence_kernel(x, y, a.depth, cfg);
      text += format_kernel_value(v) + "\n";
    }
  } else if (type == "graph") {
    GraphKernelConfig cfg;
    cfg.n = a.n;
    cfg.lambda = a.lambda;
    cfg.depth = a.depth;
    if (a.variant == "add-norm") cfg.composition = Composition::kAdditive;
    cfg.validate();
    std::vector<std::vector<FeatureGraph>> sets;
    for (const std::string& f : a.files) {
      std::vector<FeatureGraph> graphs;
      for (GraphRecord& r : read_graph_file(f)) graphs.push_back(std::move(r.graph));
      sets.push_back(std::move(graphs));
    }
    for (const auto& [g, h] : pair_records(std::move(sets), a.files)) {
      const double v = a.depth == 1 ? random_walk_kernel(g, h, cfg) : deep_graph_kernel(g, h, cfg);
      text += format_kernel_value(v) + "\n";
    }
  } else {
    throw ConfigError(fmt::format("--type must be seq, graph or auto, got '{}'", type));
  }
  emit(text, out, a.out);
  return kExitOk;
}

int cmd_verify(const VerifyArgs& a, std::uint64_t seed, std::ostream& out, std::ostream& err) {
  VerifyOptions o;
  o.suite = a.suite;
  o.seeds = a.seeds;
  o.base_seed = seed;
  o.tol = a.tol;
  if (a.variant) o.variant = parse_seq_variant(*a.variant);
  o.n = a.n;
  o.lambda = a.lambda;
  o.depth = a.depth;
  o.gated = a.gated;
  o.threads = a.threads;
  if (o.n && (*o.n < 1 || *o.n > kMaxOracleOrder)) {
    throw GuardError(fmt::format("--n must lie in [1, {}]", kMaxOracleOrder));
  }
  if (o.lambda && !(*o.lambda >= 0.0 && *o.lambda < 1.0)) {
    throw ConfigError("--lambda must lie in [0, 1)");
  }
  if (o.depth && (*o.depth < 1 || *o.depth > 3)) throw ConfigError("--depth must lie in [1, 3]");
  if (o.tol && !(*o.tol >= 0.0)) throw ConfigError("--tol must be non-negative");

  const std::vector<CheckRecord> records = run_verify(o);
  std::string text;
  std::size_t failed = 0;
  for (const CheckRecord& r : records) {
    text += r.to_json() + "\n";
    if (!r.pass) ++failed;
  }
  emit(text, out, a.out);
  err << fmt::format("{} checks, {} failed\n", records.size(), failed);
  return failed == 0 ? kExitOk : kExitVerifyFailed;
}

std::vector<GraphExample> graph_examples(const std::string& path) {
  std::vector<GraphExample> data;
  for (GraphRecord& r : read_graph_file(path)) {
    if (!r.target) throw ParseError(path, r.line, "graph record has no target");
    data.push_back({std::move(r.graph), *r.target});
  }
  if (data.empty()) throw DataError(fmt::format("{}: no graphs", path));
  return data;
}

void check_feature_dim(const std::vector<GraphExample>& data, std::size_t dim,
                       const std::string& path) {
  for (const GraphExample& ex : data) {
    if (ex.graph.num_nodes() > 0 && ex.graph.dim() != dim) {
      throw DataError(fmt::format("{}: feature dimension {} does not match model input_dim {}",
                                  path, ex.graph.dim(), dim));
    }
  }
}

std::vector<std::size_t> corpus_stream(const std::string& path, const Vocabulary& vocab) {
  const std::vector<std::size_t> stream = encode_corpus(read_lines(path), vocab);
  if (stream.empty()) throw DataError(fmt::format("{}: empty corpus", path));
  return stream;
}

int cmd_train(const TrainArgs& a, std::optional<std::uint64_t> seed, std::ostream& out) {
  ExperimentConfig exp = read_experiment_config(a.config);
  if (seed) exp.train.seed = *seed;
  const std::string metrics_path = a.metrics.empty() ? a.out + ".metrics.jsonl" : a.metrics;
  std::string metrics;
  const MetricSink sink = [&](const MetricRecord& r) {
    metrics += r.to_json() + "\n";
    out << r.to_json() << "\n";
  };

  ModelBundle bundle;
  bundle.seed = exp.train.seed;
  Rng rng(exp.train.seed);
  if (exp.task == "lm") {
    const SeqModelConfig cfg = seq_config_from_json(exp.model);
    const Vocabulary vocab = Vocabulary::build(read_lines(a.data));
    LmData data;
    data.train = corpus_stream(a.data, vocab);
    if (!a.valid.empty()) data.valid = corpus_stream(a.valid, vocab);
    data.vocab = vocab.size();
    bundle.kind = "seq";
    bundle.config = to_json(cfg);
    bundle.vocab = vocab.tokens();
    bundle.params = init_lm_params(cfg, vocab.size(), rng);
    train_lm(cfg, bundle.params, data, exp.train, sink);
  } else if (exp.task == "graph-reg") {
    const GraphModelConfig cfg = graph_config_from_json(exp.model);
    const std::vector<GraphExample> train = graph_examples(a.data);
    check_feature_dim(train, cfg.input_dim, a.data);
    std::vector<GraphExample> valid;
    if (!a.valid.empty()) {
      valid = graph_examples(a.valid);
      check_feature_dim(valid, cfg.input_dim, a.valid);
    }
    bundle.kind = cfg.kind == GraphModelKind::kWl ? "wl" : "graph";
    bundle.config = to_json(cfg);
    bundle.params = init_graph_params(cfg, rng);
    add_regression_head(bundle.params, cfg.hidden, rng);
    train_graph_regression(cfg, bundle.params, train, valid, exp.train, sink);
  } else {
    throw ConfigError(fmt::format("{}: task must be 'lm' or 'graph-reg', got '{}'", a.config,
                                  exp.task));
  }
  save_bundle(bundle, a.out);
  write_file(metrics_path, metrics);
  return kExitOk;
}

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const ModelBundle bundle = load_bundle(a.model);
  nlohmann::ordered_json j;
  j["model"] = bundle.kind;
  if (bundle.kind == "seq") {
    if (looks_like_graph_file(a.data)) {
      throw DataError(fmt::format("{}: graph data given to a sequence model", a.data));
    }
    const SeqModelConfig cfg = seq_config_from_json(bundle.config);
    const Vocabulary vocab = Vocabulary::from_tokens(bundle.vocab, a.model);
    const LmEvaluation ev = evaluate_lm(cfg, bundle.params, corpus_stream(a.data, vocab), a.unroll);
    j["tokens"] = ev.tokens;
    j["loss"] = ev.loss;
    j["perplexity"] = ev.perplexity;
  } else if (bundle.kind == "graph" || bundle.kind == "wl") {
    const GraphModelConfig cfg = graph_config_from_json(bundle.config);
    const std::vector<GraphExample> data = graph_examples(a.data);
    check_feature_dim(data, cfg.input_dim, a.data);
    const RegressionEvaluation ev = evaluate_regression(cfg, bundle.params, data);
    j["graphs"] = data.size();
    j["mse"] = ev.mse;
    j["rmse"] = ev.rmse;
  } else {
    throw DataError(fmt::format("{}: unknown model kind '{}'", a.model, bundle.kind));
  }
  emit(j.dump() + "\n", out, a.out);
  return kExitOk;
}

void add_verify_options(CLI::App* cmd, VerifyArgs& v, bool with_suite) {
  if (with_suite) {
    cmd->add_option("--suite", v.suite,
                    "all or one of: theorem1, theorem4, cnn-degeneration, gated-degeneration, "
                    "variants, deep-rkhs, wl, gradcheck, psd");
  }
  cmd->add_option("--seeds", v.seeds, "Seeds per suite")->capture_default_str();
  cmd->add_option("--tol", v.tol, "Override the suite tolerance");
  cmd->add_option("--variant", v.variant, "Restrict to one recurrence variant");
  cmd->add_option("--n", v.n, "Restrict to one order");
  cmd->add_option("--lambda", v.lambda, "Fix the decay");
  cmd->add_option("--depth", v.depth, "Layers for deep and WL checks");
  cmd->add_flag("--gated", v.gated, "Check the gated forms");
  cmd->add_option("--threads", v.threads, "Worker threads (capped by KERNELNN_THREADS)");
  cmd->add_option("--out", v.out, "Also write the report here");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Kernel-derived recurrent and graph networks: kernels, checks, training"};
  app.require_subcommand(1);
  std::optional<std::uint64_t> seed;
  app.add_option("--seed", seed, "Seed for every random choice")->trigger_on_parse(false);

  KernelArgs kernel;
  CLI::App* k = app.add_subcommand("kernel", "Print kernel values for pairs of inputs");
  k->add_option("--type", kernel.type, "seq, graph or auto")->capture_default_str();
  k->add_option("--variant", kernel.variant, "mult-unnorm, mult-norm or add-norm")
      ->capture_default_str();
  k->add_option("--n", kernel.n, "Subsequence length / walk nodes")->capture_default_str();
  k->add_option("--lambda", kernel.lambda, "Decay")->capture_default_str();
  k->add_option("--depth", kernel.depth, "Recursive kernel depth")->capture_default_str();
  k->add_flag("--gated", kernel.gated, "Not supported without a model");
  k->add_option("--out", kernel.out, "Also write the values here");
  k->add_option("files", kernel.files, "One file (consecutive pairs) or two (line by line)")
      ->required()
      ->check(CLI::ExistingFile);

  VerifyArgs verify;
  CLI::App* v = app.add_subcommand("verify", "Run verification sweeps");
  add_verify_options(v, verify, true);

  VerifyArgs grad;
  CLI::App* g = app.add_subcommand("gradcheck", "Same as verify --suite gradcheck");
  add_verify_options(g, grad, false);

  TrainArgs train;
  CLI::App* t = app.add_subcommand("train", "Train a model from a config file");
  t->add_option("--config", train.config, "Experiment config (JSON)")->required()
      ->check(CLI::ExistingFile);
  t->add_option("--data", train.data, "Training corpus or graph file")->required()
      ->check(CLI::ExistingFile);
  t->add_option("--valid", train.valid, "Validation data")->check(CLI::ExistingFile);
  t->add_option("--out", train.out, "Output model bundle")->required();
  t->add_option("--metrics", train.metrics, "Metrics file (default <out>.metrics.jsonl)");

  EvalArgs eval;
  CLI::App* e = app.add_subcommand("eval", "Evaluate a model bundle");
  e->add_option("--model", eval.model, "Model bundle")->required()->check(CLI::ExistingFile);
  e->add_option("--data", eval.data, "Corpus or graph file")->required()
      ->check(CLI::ExistingFile);
  e->add_option("--unroll", eval.unroll, "Window length for language models")
      ->capture_default_str();
  e->add_option("--out", eval.out, "Also write the metrics here");

  for (CLI::App* sub : {k, v, g, t, e}) sub->fallthrough();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitInput;
  }

  try {
    if (*k) return cmd_kernel(kernel, out);
    if (*v) return cmd_verify(verify, seed.value_or(1), out, err);
    if (*g) {
      grad.suite = "gradcheck";
      return cmd_verify(grad, seed.value_or(1), out, err);
    }
    if (*t) return cmd_train(train, seed, out);
    if (*e) return cmd_eval(eval, out);
  } catch (const GuardError& ex) {
    err << "guard: " << ex.what() << "\n";
    return kExitGuard;
  } catch (const NumericalError& ex) {
    err << "numerical: " << ex.what() << "\n";
    return kExitNumerical;
  } catch (const Error& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitInput;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}

}  // namespace kernelnn
