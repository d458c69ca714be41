// Copyright 2026 The shannon-eval Authors.
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

// Command-line entry point: scoring, batch runs, baseline validation,
// correlation and bias tables, heatmaps, and reference-model training.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "shannon/backend.h"
#include "shannon/error.h"
#include "shannon/harness.h"
#include "shannon/heatmap.h"
#include "shannon/info_metrics.h"
#include "shannon/ngram_backend.h"
#include "shannon/remote_backend.h"
#include "shannon/text.h"

namespace shannon {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

constexpr const char* kEndpointEnv = "SHANNON_ENDPOINT";

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDegenerateNormalization: return 3;
    case ErrorCode::kBackendUnavailable: return 4;
    case ErrorCode::kProtocolError: return 5;
    case ErrorCode::kAbortBatch: return 6;
    case ErrorCode::kUndefinedCorrelation:
    case ErrorCode::kIncompleteGrid: return 7;
    case ErrorCode::kGreedyUnsupported: return 8;
    default: return 2;
  }
}

struct Options {
  std::string backend = "reference";
  std::string model;
  std::string endpoint;
  int timeout_ms = 30000;
  int retries = 3;
  NGramConfig ngram;
  size_t vocab_size = 50000;
  std::string k = "0";
  std::string separator = "\\n";
  double epsilon = 1e-9;
  std::string metrics = "all";
  uint64_t seed = 0;
  size_t concurrency = 1;
  std::string format = "json";
  std::string out;
  std::string config;

  std::string doc;
  std::string summary;
  std::string data;
  std::string input_format = "summeval-jsonl";
  std::string scores;
  std::string level = "system";
  std::string method = "kendall-tau-b";
  size_t sample = 0;
  size_t max_pairs = 0;
  std::optional<double> anchor;
  std::vector<std::string> corpus;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read '" + path + "'");
  return std::string((std::istreambuf_iterator<char>(in)), {});
}

std::string trim_right(std::string s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  return s;
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write '" + path + "'");
  out << content;
  if (!out.flush()) throw Error(ErrorCode::kIoError, "cannot write '" + path + "'");
}

std::string unescape(const std::string& s) {
  std::string out;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\' || i + 1 == s.size()) {
      out.push_back(s[i]);
      continue;
    }
    switch (s[++i]) {
      case 'n': out.push_back('\n'); break;
      case 't': out.push_back('\t'); break;
      case '\\': out.push_back('\\'); break;
      default: out.push_back('\\'); out.push_back(s[i]);
    }
  }
  return out;
}

// --- option registration ---------------------------------------------------

void add_backend_options(CLI::App* app, Options& o) {
  app->add_option("--backend", o.backend, "reference | remote | uniform")
      ->check(CLI::IsMember({"reference", "remote", "uniform"}));
  app->add_option("--model", o.model, "trained reference model (JSON); default: train on the inputs");
  app->add_option("--endpoint", o.endpoint,
                  std::string("remote scoring service URL (or $") + kEndpointEnv + ")");
  app->add_option("--timeout-ms", o.timeout_ms, "remote request timeout");
  app->add_option("--retries", o.retries, "remote retries on transient failures");
  app->add_option("--ngram-order", o.ngram.order, "reference n-gram order");
  app->add_option("--alpha", o.ngram.alpha, "add-alpha smoothing");
  app->add_option("--cache-weight", o.ngram.cache_weight, "prompt-cache interpolation weight");
  app->add_option("--cache-order", o.ngram.cache_order, "prompt-cache order (1 or 2)");
  app->add_option("--context-limit", o.ngram.context_limit, "context limit of in-process backends");
  app->add_option("--vocab-size", o.vocab_size, "uniform backend vocabulary size");
}

void add_scoring_options(CLI::App* app, Options& o) {
  app->add_option("--k", o.k, "upstream sentences in the prompt (integer or 'all')");
  app->add_option("--separator", o.separator, "text between helper and upstream context (\\n, \\t escapes)");
  app->add_option("--epsilon", o.epsilon, "degeneracy threshold (nats)");
  app->add_option("--metrics,--metric", o.metrics, "comma list of shannon, infodiff, blanc, or all");
  app->add_option("--concurrency", o.concurrency, "requests in flight");
  app->add_option("--config", o.config, "JSON file supplying defaults for flags not given");
}

void add_format_options(CLI::App* app, Options& o) {
  app->add_option("--format", o.format, "json | text")->check(CLI::IsMember({"json", "text"}));
  app->add_option("--out", o.out, "output file (default: standard output)");
}

// Values from --config fill in options that were not given on the command
// line. Keys use the long flag names with '-' or '_'.
void apply_config(CLI::App* app, Options& o) {
  if (o.config.empty()) return;
  const auto cfg = json::parse(read_file(o.config), nullptr, false);
  if (cfg.is_discarded() || !cfg.is_object()) {
    throw Error(ErrorCode::kSchemaError, "config file '" + o.config + "' is not a JSON object");
  }
  const std::map<std::string, std::function<void(const json&)>> setters = {
      {"backend", [&](const json& v) { o.backend = v.get<std::string>(); }},
      {"model", [&](const json& v) { o.model = v.get<std::string>(); }},
      {"endpoint", [&](const json& v) { o.endpoint = v.get<std::string>(); }},
      {"timeout-ms", [&](const json& v) { o.timeout_ms = v.get<int>(); }},
      {"retries", [&](const json& v) { o.retries = v.get<int>(); }},
      {"ngram-order", [&](const json& v) { o.ngram.order = v.get<int>(); }},
      {"alpha", [&](const json& v) { o.ngram.alpha = v.get<double>(); }},
      {"cache-weight", [&](const json& v) { o.ngram.cache_weight = v.get<double>(); }},
      {"cache-order", [&](const json& v) { o.ngram.cache_order = v.get<int>(); }},
      {"context-limit", [&](const json& v) { o.ngram.context_limit = v.get<size_t>(); }},
      {"vocab-size", [&](const json& v) { o.vocab_size = v.get<size_t>(); }},
      {"k", [&](const json& v) { o.k = v.is_string() ? v.get<std::string>() : std::to_string(v.get<size_t>()); }},
      {"separator", [&](const json& v) { o.separator = v.get<std::string>(); }},
      {"epsilon", [&](const json& v) { o.epsilon = v.get<double>(); }},
      {"metrics", [&](const json& v) { o.metrics = v.get<std::string>(); }},
      {"seed", [&](const json& v) { o.seed = v.get<uint64_t>(); }},
      {"concurrency", [&](const json& v) { o.concurrency = v.get<size_t>(); }},
  };
  for (const auto& [raw_key, value] : cfg.items()) {
    std::string key = raw_key;
    std::replace(key.begin(), key.end(), '_', '-');
    auto it = setters.find(key);
    if (it == setters.end()) {
      throw Error(ErrorCode::kSchemaError, "unknown config key '" + raw_key + "'");
    }
    CLI::Option* opt = app->get_option_no_throw("--" + key);
    if (opt != nullptr && opt->count() > 0) continue;
    try {
      it->second(value);
    } catch (const json::exception&) {
      throw Error(ErrorCode::kSchemaError, "config key '" + raw_key + "' has the wrong type");
    }
  }
}

// --- resolution ------------------------------------------------------------

ScoringConfig scoring_config(const Options& o) {
  ScoringConfig c;
  if (o.k == "all" || o.k == "inf") {
    c.k_upstream = ScoringConfig::kAllUpstream;
  } else {
    size_t used = 0;
    long long k = -1;
    try {
      k = std::stoll(o.k, &used);
    } catch (const std::exception&) {
    }
    if (k < 0 || used != o.k.size()) {
      throw Error(ErrorCode::kInvalidArgument, "--k must be a non-negative integer or 'all'");
    }
    c.k_upstream = static_cast<size_t>(k);
  }
  c.helper_separator = unescape(o.separator);
  c.degeneracy_epsilon = o.epsilon;
  c.concurrency = std::max<size_t>(o.concurrency, 1);
  c.validate();
  return c;
}

std::unique_ptr<Backend> make_backend(CLI::App* app, const Options& o,
                                      const std::vector<std::string>& corpus) {
  if (o.backend == "uniform") {
    return std::make_unique<UniformBackend>(o.vocab_size, o.ngram.context_limit);
  }
  if (o.backend == "remote") {
    RemoteOptions r;
    r.endpoint = o.endpoint;
    if (app->count("--endpoint") == 0) {
      if (const char* env = std::getenv(kEndpointEnv); env && *env) r.endpoint = env;
    }
    if (r.endpoint.empty()) {
      throw Error(ErrorCode::kInvalidArgument,
                  std::string("remote backend needs --endpoint or $") + kEndpointEnv);
    }
    r.timeout = std::chrono::milliseconds(o.timeout_ms);
    r.retries = o.retries;
    r.max_concurrency = std::max<size_t>(o.concurrency, 1);
    return std::make_unique<RemoteBackend>(r);
  }
  if (o.model.empty()) {
    return std::make_unique<NGramBackend>(train_ngram(corpus, o.ngram));
  }
  const auto parsed = json::parse(read_file(o.model), nullptr, false);
  if (parsed.is_discarded()) {
    throw Error(ErrorCode::kSchemaError, "model file '" + o.model + "' is not JSON");
  }
  NGramBackend model = NGramBackend::from_json(parsed);
  NGramConfig cfg = model.config();
  if (app->count("--ngram-order")) cfg.order = o.ngram.order;
  if (app->count("--alpha")) cfg.alpha = o.ngram.alpha;
  if (app->count("--cache-weight")) cfg.cache_weight = o.ngram.cache_weight;
  if (app->count("--cache-order")) cfg.cache_order = o.ngram.cache_order;
  if (app->count("--context-limit")) cfg.context_limit = o.ngram.context_limit;
  return std::make_unique<NGramBackend>(model.with_config(cfg));
}

DatasetFormat dataset_format(const Options& o) { return parse_dataset_format(o.input_format); }

std::vector<std::string> dataset_corpus(const EvalDataset& ds) {
  std::vector<std::string> corpus;
  for (const auto& [_, doc] : ds.documents) corpus.push_back(doc.text);
  return corpus;
}

void announce_hash(const std::string& hash) { std::cerr << "config_hash: " << hash << "\n"; }

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// --- commands --------------------------------------------------------------

int cmd_score(CLI::App* app, const Options& o) {
  const std::string doc_text = trim_right(read_file(o.doc));
  const std::string summary = trim_right(read_file(o.summary));
  const Document doc = make_document(fs::path(o.doc).filename().string(), doc_text);
  const auto metrics = parse_metrics(o.metrics);
  const ScoringConfig config = scoring_config(o);
  const auto backend = make_backend(app, o, {doc_text});
  announce_hash(config_hash(*backend, config));

  const MetricResult result = evaluate(doc, summary, config, *backend, metrics);
  ordered_json out = ordered_json::object();
  std::string text;
  int code = 0;
  for (Metric m : metrics) {
    const std::string key(metric_key(m));
    if (auto v = result.value(m)) {
      out[key] = *v;
      text += key + "\t" + format_number(*v) + "\n";
    } else if (auto it = result.errors.find(m); it != result.errors.end()) {
      std::cerr << "shannon: " << key << ": " << it->second.what() << "\n";
      if (code == 0) code = exit_code(it->second.code());
    }
  }
  write_output(o.out, o.format == "text" ? text : out.dump() + "\n");
  return code;
}

int cmd_batch(CLI::App* app, const Options& o) {
  const EvalDataset ds = load_dataset(o.data, dataset_format(o));
  const auto metrics = parse_metrics(o.metrics);
  const ScoringConfig config = scoring_config(o);
  const auto backend = make_backend(app, o, dataset_corpus(ds));
  BatchOptions batch;
  batch.score_path = o.out;
  batch.concurrency = std::max<size_t>(o.concurrency, 1);
  if (o.max_pairs > 0) batch.max_pairs = o.max_pairs;
  announce_hash(config_hash(*backend, config));
  const BatchSummary s = run_metrics(ds, config, *backend, metrics, batch);
  ordered_json report = {{"config_hash", s.config_hash},
                         {"pairs_total", s.pairs_total},
                         {"pairs_already_done", s.pairs_already_done},
                         {"pairs_scored", s.pairs_scored},
                         {"error_records", s.error_records},
                         {"score_file", o.out}};
  std::cout << report.dump() << "\n";
  return 0;
}

int cmd_validate(CLI::App* app, const Options& o) {
  const EvalDataset ds = load_dataset(o.data, dataset_format(o));
  const auto metrics = parse_metrics(o.metrics);
  const ScoringConfig config = scoring_config(o);
  const auto backend = make_backend(app, o, dataset_corpus(ds));
  announce_hash(config_hash(*backend, config));
  const ValidationReport report =
      baseline_validation(validation_items(ds), metrics, config, *backend, o.seed, o.sample);
  write_output(o.out, o.format == "text" ? render_text(report) : to_json(report).dump(2) + "\n");
  return 0;
}

int emit_table(const CorrelationTable& table, const Options& o) {
  announce_hash(table.config_hash);
  write_output(o.out, o.format == "text" ? render_text(table) : to_json(table).dump(2) + "\n");
  return 0;
}

int cmd_correlate(const Options& o) {
  const EvalDataset ds = load_dataset(o.data, dataset_format(o));
  const ScoreTable scores = load_score_file(o.scores);
  return emit_table(correlation_table(ds, scores, parse_correlation_level(o.level),
                                      parse_correlation_method(o.method)),
                    o);
}

int cmd_bias(const Options& o) {
  const EvalDataset ds = load_dataset(o.data, dataset_format(o));
  const ScoreTable scores = load_score_file(o.scores);
  return emit_table(bias_table(ds, scores, parse_correlation_method(o.method),
                               parse_correlation_level(o.level)),
                    o);
}

int cmd_viz(CLI::App* app, const Options& o) {
  const std::string doc_text = trim_right(read_file(o.doc));
  const std::string summary = trim_right(read_file(o.summary));
  const Document doc = make_document(fs::path(o.doc).filename().string(), doc_text);
  const ScoringConfig config = scoring_config(o);
  const auto backend = make_backend(app, o, {doc_text});
  announce_hash(config_hash(*backend, config));

  Rng rng(o.seed);
  const std::string shuffled = shuffle_words(summary, rng);
  HeatmapSpec spec;
  spec.document = doc;
  spec.model_id = backend->model_id();
  spec.anchor = o.anchor;
  const InfoProfile base = document_info(doc, std::nullopt, config, *backend);
  const InfoProfile given = summary.empty() ? base : document_info(doc, summary, config, *backend);
  const InfoProfile self = document_info(doc, doc.text, config, *backend);
  const InfoProfile scrambled =
      shuffled.empty() ? base : document_info(doc, shuffled, config, *backend);
  spec.scenarios = {{"I(D)", base},
                    {"I(D|S)", given},
                    {"I(D|D)", self},
                    {"I(D|shuffled S)", scrambled}};
  spec.metrics["info_diff"] = base.total_info - given.total_info;
  try {
    spec.metrics["shannon_score"] =
        shannon_from_profiles(base, given, self, config.degeneracy_epsilon);
  } catch (const Error& e) {
    std::cerr << "shannon: shannon_score: " << e.what() << "\n";
  }
  if (o.out.empty()) throw Error(ErrorCode::kInvalidArgument, "viz needs --out");
  write_output(o.out, render_heatmap(spec));
  return 0;
}

int cmd_train(const Options& o) {
  std::vector<std::string> corpus;
  for (const auto& path : o.corpus) corpus.push_back(read_file(path));
  if (!o.data.empty()) {
    for (auto& text : dataset_corpus(load_dataset(o.data, dataset_format(o)))) {
      corpus.push_back(std::move(text));
    }
  }
  const NGramBackend model = train_ngram(corpus, o.ngram);
  if (o.out.empty()) throw Error(ErrorCode::kInvalidArgument, "train-ngram needs --out");
  write_output(o.out, model.to_json().dump() + "\n");
  std::cerr << "model_id: " << model.model_id() << "\n";
  return 0;
}

int run(int argc, char** argv) {
  Options o;
  CLI::App app{"Reference-free summary evaluation with language-model surprisal (nats)."};
  app.require_subcommand(1);

  CLI::App* score = app.add_subcommand("score", "score one document/summary pair");
  score->add_option("--doc", o.doc, "document text file")->required()->check(CLI::ExistingFile);
  score->add_option("--summary", o.summary, "summary text file")->required()->check(CLI::ExistingFile);
  add_backend_options(score, o);
  add_scoring_options(score, o);
  add_format_options(score, o);

  CLI::App* batch = app.add_subcommand("batch", "score every dataset entry into a resumable score file");
  batch->add_option("--data", o.data, "dataset (JSONL)")->required()->check(CLI::ExistingFile);
  batch->add_option("--input-format", o.input_format, "summeval-jsonl | pairs-jsonl");
  batch->add_option("--out", o.out, "score file (appended to; resumable)")->required();
  batch->add_option("--max-pairs", o.max_pairs, "stop after N pairs")->group("");
  add_backend_options(batch, o);
  add_scoring_options(batch, o);

  CLI::App* validate = app.add_subcommand("validate", "original vs shuffled vs wrong-summary check");
  validate->add_option("--data", o.data, "dataset with reference summaries")->required()->check(CLI::ExistingFile);
  validate->add_option("--input-format", o.input_format, "summeval-jsonl | pairs-jsonl");
  validate->add_option("--seed", o.seed, "RNG seed");
  validate->add_option("--sample", o.sample, "documents to sample (0 = all)");
  add_backend_options(validate, o);
  add_scoring_options(validate, o);
  add_format_options(validate, o);

  CLI::App* correlate = app.add_subcommand("correlate", "correlate scores with human ratings");
  CLI::App* bias = app.add_subcommand("bias", "correlate metrics and ratings with summary statistics");
  for (CLI::App* sub : {correlate, bias}) {
    sub->add_option("--data", o.data, "annotated dataset")->required()->check(CLI::ExistingFile);
    sub->add_option("--input-format", o.input_format, "summeval-jsonl | pairs-jsonl");
    sub->add_option("--scores", o.scores, "score file from 'batch'")->required()->check(CLI::ExistingFile);
    sub->add_option("--method", o.method, "kendall-tau-b | spearman | pearson");
    add_format_options(sub, o);
  }
  correlate->add_option("--level", o.level, "system | summary");
  bias->add_option("--level", o.level, "summary | system")->default_str("summary");

  CLI::App* viz = app.add_subcommand("viz", "token information heatmap (HTML)");
  viz->add_option("--doc", o.doc, "document text file")->required()->check(CLI::ExistingFile);
  viz->add_option("--summary", o.summary, "summary text file")->required()->check(CLI::ExistingFile);
  viz->add_option("--seed", o.seed, "seed for the shuffled-summary row");
  viz->add_option("--anchor", o.anchor, "surprisal (nats) at full shading");
  viz->add_option("--out", o.out, "HTML output file")->required();
  add_backend_options(viz, o);
  add_scoring_options(viz, o);

  CLI::App* train = app.add_subcommand("train-ngram", "train the reference n-gram model");
  train->add_option("--corpus", o.corpus, "plain-text documents")->check(CLI::ExistingFile);
  train->add_option("--data", o.data, "dataset whose documents form the corpus")->check(CLI::ExistingFile);
  train->add_option("--input-format", o.input_format, "summeval-jsonl | pairs-jsonl");
  train->add_option("--ngram-order", o.ngram.order, "n-gram order");
  train->add_option("--alpha", o.ngram.alpha, "add-alpha smoothing");
  train->add_option("--cache-weight", o.ngram.cache_weight, "prompt-cache interpolation weight");
  train->add_option("--cache-order", o.ngram.cache_order, "prompt-cache order (1 or 2)");
  train->add_option("--context-limit", o.ngram.context_limit, "context limit");
  train->add_option("--out", o.out, "model file (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  if (bias->parsed() && bias->count("--level") == 0) o.level = "summary";

  try {
    for (CLI::App* sub : {score, batch, validate, viz}) {
      if (sub->parsed()) apply_config(sub, o);
    }
    if (score->parsed()) return cmd_score(score, o);
    if (batch->parsed()) return cmd_batch(batch, o);
    if (validate->parsed()) return cmd_validate(validate, o);
    if (correlate->parsed()) return cmd_correlate(o);
    if (bias->parsed()) return cmd_bias(o);
    if (viz->parsed()) return cmd_viz(viz, o);
    if (train->parsed()) return cmd_train(o);
  } catch (const Error& e) {
    std::cerr << "shannon: " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "shannon: internal error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace
}  // namespace shannon

int main(int argc, char** argv) { return shannon::run(argc, argv); }
