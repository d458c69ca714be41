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

#include "shannon/harness.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include "shannon/error.h"
#include "shannon/hash.h"

namespace shannon {
namespace {

using ordered_json = nlohmann::ordered_json;

Error schema_error(size_t line, const std::string& message) {
  return Error(ErrorCode::kSchemaError, "line " + std::to_string(line) + ": " + message);
}

std::optional<std::string> string_field(const nlohmann::json& obj,
                                        const char* name, size_t line,
                                        bool required) {
  auto it = obj.find(name);
  if (it == obj.end() || it->is_null()) {
    if (required) throw schema_error(line, std::string("missing \"") + name + "\"");
    return std::nullopt;
  }
  if (!it->is_string()) {
    throw schema_error(line, std::string("\"") + name + "\" must be a string");
  }
  return it->get<std::string>();
}

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
           c == '\v';
  });
}

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

bool retryable(const std::string& error) {
  for (ErrorCode code : {ErrorCode::kBackendUnavailable, ErrorCode::kProtocolError,
                         ErrorCode::kAbortBatch}) {
    if (error.starts_with(error_code_name(code))) return true;
  }
  return false;
}

std::string format_value(const std::optional<double>& v) {
  if (!v) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", *v);
  return buf;
}

ordered_json optional_json(const std::optional<double>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

}  // namespace

// ---------------------------------------------------------------------------
// Datasets

DatasetFormat parse_dataset_format(std::string_view name) {
  if (name == "summeval-jsonl" || name == "summeval") return DatasetFormat::kSummEvalJsonl;
  if (name == "pairs-jsonl" || name == "pairs") return DatasetFormat::kPairsJsonl;
  throw Error(ErrorCode::kInvalidArgument, "unknown dataset format '" + std::string(name) + "'");
}

EvalDataset parse_dataset(std::istream& in, DatasetFormat format) {
  EvalDataset dataset;
  std::set<std::string> dimensions;
  std::set<std::pair<std::string, std::string>> seen;
  std::string raw;
  size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (is_blank(raw)) continue;
    const auto obj = nlohmann::json::parse(raw, nullptr, /*allow_exceptions=*/false);
    if (obj.is_discarded() || !obj.is_object()) {
      throw schema_error(line, "not a JSON object");
    }
    EvalEntry entry;
    entry.line = line;
    entry.doc_id = *string_field(obj, "doc_id", line, true);
    const bool summeval = format == DatasetFormat::kSummEvalJsonl;
    entry.system_id =
        string_field(obj, "system_id", line, summeval).value_or("default");
    entry.summary = *string_field(obj, "summary", line, true);
    entry.ref_summary = string_field(obj, "ref_summary", line, false);

    auto ann = obj.find("annotations");
    if (ann == obj.end() || ann->is_null()) {
      if (summeval) throw schema_error(line, "missing \"annotations\"");
    } else {
      if (!ann->is_object()) throw schema_error(line, "\"annotations\" must be an object");
      for (const auto& [dim, list] : ann->items()) {
        if (!list.is_array() || list.empty()) {
          throw schema_error(line, "annotation \"" + dim + "\" must be a non-empty array");
        }
        std::vector<double> ratings;
        for (const auto& v : list) {
          if (!v.is_number()) {
            throw schema_error(line, "annotation \"" + dim + "\" has a non-numeric rating");
          }
          ratings.push_back(v.get<double>());
          if (!std::isfinite(ratings.back())) {
            throw schema_error(line, "annotation \"" + dim + "\" is not finite");
          }
        }
        entry.annotations.emplace(dim, std::move(ratings));
        dimensions.insert(dim);
      }
    }

    const auto text = string_field(obj, "document", line, false);
    std::optional<std::vector<std::string>> sentences;
    if (auto it = obj.find("sentences"); it != obj.end() && !it->is_null()) {
      if (!it->is_array()) throw schema_error(line, "\"sentences\" must be an array");
      sentences.emplace();
      for (const auto& s : *it) {
        if (!s.is_string()) throw schema_error(line, "\"sentences\" must hold strings");
        sentences->push_back(s.get<std::string>());
      }
    }
    if (text || sentences) {
      Document doc;
      try {
        doc = sentences ? make_document(entry.doc_id, text.value_or(""), *sentences)
                        : make_document(entry.doc_id, *text);
      } catch (const Error& e) {
        throw schema_error(line, e.what());
      }
      auto [it, inserted] = dataset.documents.emplace(entry.doc_id, doc);
      if (!inserted && (it->second.text != doc.text ||
                        it->second.sentences != doc.sentences)) {
        throw Error(ErrorCode::kIntegrityError,
                    "line " + std::to_string(line) + ": document '" + entry.doc_id +
                        "' differs from its earlier definition");
      }
    }
    if (!seen.emplace(entry.doc_id, entry.system_id).second) {
      throw Error(ErrorCode::kIntegrityError,
                  "line " + std::to_string(line) + ": duplicate (doc_id, system_id) ('" +
                      entry.doc_id + "', '" + entry.system_id + "')");
    }
    dataset.entries.push_back(std::move(entry));
  }
  for (const auto& entry : dataset.entries) {
    if (dataset.documents.count(entry.doc_id) == 0) {
      throw Error(ErrorCode::kIntegrityError,
                  "line " + std::to_string(entry.line) + ": doc_id '" + entry.doc_id +
                      "' has no document");
    }
  }
  dataset.dimensions.assign(dimensions.begin(), dimensions.end());
  return dataset;
}

EvalDataset load_dataset(const std::filesystem::path& path, DatasetFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  return parse_dataset(in, format);
}

// ---------------------------------------------------------------------------
// Score files

std::string score_record_line(const ScoreRecord& record) {
  ordered_json j;
  j["doc_id"] = record.doc_id;
  j["system_id"] = record.system_id;
  j["metric"] = record.metric;
  if (record.value) {
    j["value"] = *record.value;
  } else {
    j["error"] = record.error;
  }
  j["config_hash"] = record.config_hash;
  return j.dump();
}

std::optional<double> ScoreTable::value(const CellKey& key,
                                        const std::string& metric) const {
  auto it = values.find(key);
  if (it == values.end()) return std::nullopt;
  auto jt = it->second.find(metric);
  if (jt == it->second.end()) return std::nullopt;
  return jt->second;
}

bool ScoreTable::has_record(const CellKey& key, const std::string& metric) const {
  if (value(key, metric)) return true;
  auto it = errors.find(key);
  return it != errors.end() && it->second.count(metric) > 0;
}

std::vector<std::string> ScoreTable::metrics() const {
  std::set<std::string> present;
  for (const auto& [_, m] : values) {
    for (const auto& [name, __] : m) present.insert(name);
  }
  for (const auto& [_, m] : errors) {
    for (const auto& [name, __] : m) present.insert(name);
  }
  std::vector<std::string> out;
  for (Metric m : all_metrics()) {
    if (present.erase(std::string(metric_key(m)))) out.emplace_back(metric_key(m));
  }
  out.insert(out.end(), present.begin(), present.end());
  return out;
}

ScoreTable load_score_file(const std::filesystem::path& path) {
  ScoreTable table;
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    if (!std::filesystem::exists(path)) return table;
    throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string content = buffer.str();
  size_t pos = 0;
  size_t line = 0;
  while (pos < content.size()) {
    const size_t nl = content.find('\n', pos);
    if (nl == std::string::npos) break;  // interrupted write
    ++line;
    const std::string raw = content.substr(pos, nl - pos);
    pos = nl + 1;
    if (is_blank(raw)) continue;
    const auto obj = nlohmann::json::parse(raw, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) {
      throw schema_error(line, "score record is not a JSON object");
    }
    const CellKey key{*string_field(obj, "system_id", line, true),
                      *string_field(obj, "doc_id", line, true)};
    const std::string metric = *string_field(obj, "metric", line, true);
    const std::string hash = *string_field(obj, "config_hash", line, true);
    if (table.config_hash.empty()) {
      table.config_hash = hash;
    } else if (table.config_hash != hash) {
      throw Error(ErrorCode::kIntegrityError,
                  path.string() + " mixes config hashes " + table.config_hash +
                      " and " + hash);
    }
    if (auto v = obj.find("value"); v != obj.end()) {
      if (!v->is_number()) throw schema_error(line, "\"value\" must be a number");
      table.values[key][metric] = v->get<double>();
      if (auto it = table.errors.find(key); it != table.errors.end()) {
        it->second.erase(metric);
      }
    } else {
      table.errors[key][metric] = *string_field(obj, "error", line, true);
      if (auto it = table.values.find(key); it != table.values.end()) {
        it->second.erase(metric);
      }
    }
  }
  return table;
}

std::string config_hash(const Backend& backend, const ScoringConfig& config) {
  ScoringConfig normalized = config;
  normalized.want_greedy = false;
  const nlohmann::json resolved = {{"backend", backend.describe()},
                                   {"scoring", normalized.to_json()}};
  return hex64(fnv1a64(resolved.dump()));
}

BatchSummary run_metrics(const EvalDataset& dataset, const ScoringConfig& config,
                         const Backend& backend, const std::vector<Metric>& metrics,
                         const BatchOptions& options) {
  BatchSummary summary;
  summary.config_hash = config_hash(backend, config);
  summary.pairs_total = dataset.entries.size();

  const ScoreTable existing = load_score_file(options.score_path);
  if (!existing.config_hash.empty() && existing.config_hash != summary.config_hash) {
    throw Error(ErrorCode::kIntegrityError,
                options.score_path.string() + " was written with config " +
                    existing.config_hash + ", current config is " +
                    summary.config_hash);
  }
  // Drop a partial trailing line left by an interrupted run.
  if (std::filesystem::exists(options.score_path)) {
    std::ifstream in(options.score_path, std::ios::binary);
    std::string content((std::istreambuf_iterator<char>(in)), {});
    in.close();
    if (!content.empty() && content.back() != '\n') {
      const size_t keep = content.rfind('\n');
      std::filesystem::resize_file(options.score_path,
                                   keep == std::string::npos ? 0 : keep + 1);
    }
  }

  struct Task {
    size_t entry;
    std::vector<Metric> missing;
  };
  std::vector<Task> todo;
  for (size_t i = 0; i < dataset.entries.size(); ++i) {
    const EvalEntry& e = dataset.entries[i];
    const CellKey key{e.system_id, e.doc_id};
    Task task{i, {}};
    for (Metric m : metrics) {
      const std::string name(metric_key(m));
      bool done = existing.value(key, name).has_value();
      if (!done) {
        auto it = existing.errors.find(key);
        done = it != existing.errors.end() && it->second.count(name) > 0 &&
               !retryable(it->second.at(name));
      }
      if (!done) task.missing.push_back(m);
    }
    if (task.missing.empty()) {
      ++summary.pairs_already_done;
    } else {
      todo.push_back(std::move(task));
    }
  }
  if (options.max_pairs && todo.size() > *options.max_pairs) {
    todo.resize(*options.max_pairs);
  }
  if (todo.empty()) return summary;

  std::ofstream out(options.score_path, std::ios::binary | std::ios::app);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + options.score_path.string());

  struct Outcome {
    std::vector<ScoreRecord> records;
    bool backend_failure = false;
  };
  size_t workers = std::max<size_t>(options.concurrency, 1);
  if (backend.max_concurrency() > 0) workers = std::min(workers, backend.max_concurrency());
  ScoringConfig pair_config = config;
  if (workers > 1) pair_config.concurrency = 1;

  auto score_pair = [&](const Task& task) {
    const EvalEntry& e = dataset.entries[task.entry];
    Outcome outcome;
    auto record = [&](Metric m) {
      ScoreRecord r;
      r.doc_id = e.doc_id;
      r.system_id = e.system_id;
      r.metric = metric_key(m);
      r.config_hash = summary.config_hash;
      return r;
    };
    try {
      const MetricResult result = evaluate(dataset.documents.at(e.doc_id), e.summary,
                                           pair_config, backend, task.missing);
      for (Metric m : task.missing) {
        ScoreRecord r = record(m);
        if (auto it = result.errors.find(m); it != result.errors.end()) {
          r.error = it->second.what();
        } else if (auto v = result.value(m); v && std::isfinite(*v)) {
          r.value = *v;
        } else {
          r.error = "IntegrityError: non-finite value";
        }
        outcome.records.push_back(std::move(r));
      }
    } catch (const Error& err) {
      outcome.backend_failure = err.code() == ErrorCode::kBackendUnavailable ||
                                err.code() == ErrorCode::kProtocolError;
      outcome.records.clear();
      for (Metric m : task.missing) {
        ScoreRecord r = record(m);
        r.error = err.what();
        outcome.records.push_back(std::move(r));
      }
    }
    return outcome;
  };

  std::vector<std::optional<Outcome>> slots(todo.size());
  std::mutex mu;
  std::condition_variable ready;
  std::atomic<size_t> next{0};
  std::atomic<bool> stop{false};
  std::vector<std::jthread> pool;
  for (size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (size_t i = next++; i < todo.size() && !stop; i = next++) {
        Outcome outcome = score_pair(todo[i]);
        std::lock_guard lock(mu);
        slots[i] = std::move(outcome);
        ready.notify_all();
      }
    });
  }

  size_t consecutive_failures = 0;
  bool aborted = false;
  for (size_t i = 0; i < todo.size(); ++i) {
    Outcome outcome;
    {
      std::unique_lock lock(mu);
      ready.wait(lock, [&] { return slots[i].has_value(); });
      outcome = std::move(*slots[i]);
    }
    std::string chunk;
    for (const auto& r : outcome.records) {
      chunk += score_record_line(r);
      chunk.push_back('\n');
      if (!r.value) ++summary.error_records;
    }
    out << chunk;
    out.flush();
    ++summary.pairs_scored;
    consecutive_failures = outcome.backend_failure ? consecutive_failures + 1 : 0;
    if (consecutive_failures > options.max_consecutive_failures) {
      aborted = true;
      break;
    }
  }
  if (aborted) {
    stop = true;
    pool.clear();  // joins
    throw Error(ErrorCode::kAbortBatch,
                std::to_string(consecutive_failures) +
                    " consecutive backend failures; progress saved to " +
                    options.score_path.string());
  }
  return summary;
}

// ---------------------------------------------------------------------------
// Baseline validation

std::string shuffle_words(std::string_view text, Rng& rng) {
  std::vector<std::string> words;
  std::istringstream in{std::string(text)};
  for (std::string w; in >> w;) words.push_back(w);
  rng.shuffle(words);
  std::string out;
  for (size_t i = 0; i < words.size(); ++i) {
    if (i > 0) out.push_back(' ');
    out += words[i];
  }
  return out;
}

std::vector<ValidationItem> validation_items(const EvalDataset& dataset) {
  std::vector<ValidationItem> items;
  std::set<std::string> used;
  for (const auto& e : dataset.entries) {
    if (!used.insert(e.doc_id).second) continue;
    items.push_back({dataset.documents.at(e.doc_id), e.ref_summary.value_or(e.summary)});
  }
  return items;
}

ValidationReport baseline_validation(const std::vector<ValidationItem>& items,
                                     const std::vector<Metric>& metrics,
                                     const ScoringConfig& config,
                                     const Backend& backend, uint64_t seed,
                                     size_t sample_size) {
  if (items.size() < 2) {
    throw Error(ErrorCode::kNeedTwoDocuments,
                "wrong-summary assignment needs at least two documents");
  }
  auto wants = [&](Metric m) {
    return std::find(metrics.begin(), metrics.end(), m) != metrics.end();
  };
  ValidationReport report;
  report.seed = seed;
  report.config_hash = config_hash(backend, config);

  Rng rng(seed);
  std::vector<size_t> chosen(items.size());
  std::iota(chosen.begin(), chosen.end(), 0);
  if (sample_size > 0 && sample_size < items.size()) {
    rng.shuffle(chosen);
    chosen.resize(sample_size);
    std::sort(chosen.begin(), chosen.end());
  }
  if (chosen.size() < 2) {
    throw Error(ErrorCode::kNeedTwoDocuments, "sample must hold at least two documents");
  }
  const std::vector<size_t> wrong = rng.derangement(chosen.size());

  ScoringConfig scoring = config;
  scoring.want_greedy = backend.supports_greedy();
  for (size_t r = 0; r < chosen.size(); ++r) {
    const ValidationItem& item = items[chosen[r]];
    const ValidationItem& other = items[chosen[wrong[r]]];
    ValidationRow row;
    row.doc_id = item.document.id;
    row.wrong_doc_id = other.document.id;
    row.shuffled_summary = shuffle_words(item.reference, rng);
    const std::array<std::string_view, 3> helpers = {
        item.reference, row.shuffled_summary, other.reference};

    const InfoProfile base = document_info(item.document, std::nullopt, scoring, backend);
    std::optional<InfoProfile> self;
    if (wants(Metric::kShannonScore)) {
      self = document_info(item.document, item.document.text, scoring, backend);
    }
    if (scoring.want_greedy) row.greedy_hits.emplace();
    for (size_t v = 0; v < 3; ++v) {
      const InfoProfile given =
          is_blank(helpers[v]) ? base
                               : document_info(item.document, helpers[v], scoring, backend);
      row.info_given[v] = given.total_info;
      if (row.greedy_hits) (*row.greedy_hits)[v] = given.greedy_hits.value_or(0);
      for (Metric m : metrics) {
        const std::string key(metric_key(m));
        auto& slot = row.scores[key][v];
        try {
          switch (m) {
            case Metric::kInfoDiff:
              slot = base.total_info - given.total_info;
              break;
            case Metric::kShannonScore:
              slot = shannon_from_profiles(base, given, *self, config.degeneracy_epsilon);
              break;
            case Metric::kBlancShannon:
              slot = blanc_from_profiles(base, given);
              break;
          }
        } catch (const Error& e) {
          row.errors.emplace(key, e.what());
        }
      }
    }
    report.rows.push_back(std::move(row));
  }

  for (Metric m : metrics) {
    const std::string key(metric_key(m));
    ValidationStats stats;
    std::array<double, 3> sums{};
    double min_gap = std::numeric_limits<double>::infinity();
    for (const auto& row : report.rows) {
      const auto& t = row.scores.at(key);
      if (!t[0] || !t[1] || !t[2]) continue;
      ++stats.documents;
      for (size_t v = 0; v < 3; ++v) sums[v] += *t[v];
      min_gap = std::min(min_gap, *t[0] - *t[2]);
      if (*t[0] <= *t[2]) ++stats.violations_wrong;
      if (*t[0] <= *t[1]) ++stats.violations_shuffled;
    }
    if (stats.documents > 0) {
      for (size_t v = 0; v < 3; ++v) {
        stats.mean[v] = sums[v] / static_cast<double>(stats.documents);
      }
      stats.min_original_minus_wrong = min_gap;
    }
    report.stats.emplace(key, stats);
  }
  return report;
}

ordered_json to_json(const ValidationReport& report) {
  static constexpr const char* kVariants[] = {"original", "shuffled", "wrong"};
  ordered_json out;
  out["seed"] = report.seed;
  out["config_hash"] = report.config_hash;
  ordered_json stats = ordered_json::object();
  for (const auto& [metric, s] : report.stats) {
    ordered_json j;
    for (size_t v = 0; v < 3; ++v) j[std::string("mean_") + kVariants[v]] = s.mean[v];
    j["min_original_minus_wrong"] = s.min_original_minus_wrong;
    j["violations_wrong"] = s.violations_wrong;
    j["violations_shuffled"] = s.violations_shuffled;
    j["documents"] = s.documents;
    stats[metric] = std::move(j);
  }
  out["stats"] = std::move(stats);
  ordered_json rows = ordered_json::array();
  for (const auto& row : report.rows) {
    ordered_json j;
    j["doc_id"] = row.doc_id;
    j["wrong_doc_id"] = row.wrong_doc_id;
    j["shuffled_summary"] = row.shuffled_summary;
    ordered_json scores = ordered_json::object();
    for (const auto& [metric, triple] : row.scores) {
      ordered_json t;
      for (size_t v = 0; v < 3; ++v) t[kVariants[v]] = optional_json(triple[v]);
      scores[metric] = std::move(t);
    }
    j["scores"] = std::move(scores);
    ordered_json info;
    for (size_t v = 0; v < 3; ++v) info[kVariants[v]] = row.info_given[v];
    j["info_given_summary"] = std::move(info);
    if (row.greedy_hits) {
      ordered_json hits;
      for (size_t v = 0; v < 3; ++v) hits[kVariants[v]] = (*row.greedy_hits)[v];
      j["greedy_hits"] = std::move(hits);
    }
    if (!row.errors.empty()) j["errors"] = row.errors;
    rows.push_back(std::move(j));
  }
  out["rows"] = std::move(rows);
  return out;
}

std::string render_text(const ValidationReport& report) {
  std::ostringstream out;
  out << "# baseline validation seed=" << report.seed
      << " config_hash=" << report.config_hash << " documents=" << report.rows.size()
      << "\n";
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-14s %10s %10s %10s %12s %8s %8s\n", "metric",
                "original", "shuffled", "wrong", "min(o-w)", "viol_w", "viol_s");
  out << buf;
  for (const auto& [metric, s] : report.stats) {
    std::snprintf(buf, sizeof(buf), "%-14s %10.4f %10.4f %10.4f %12.4f %8zu %8zu\n",
                  metric.c_str(), s.mean[0], s.mean[1], s.mean[2],
                  s.min_original_minus_wrong, s.violations_wrong,
                  s.violations_shuffled);
    out << buf;
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Correlation and bias tables

CorrelationLevel parse_correlation_level(std::string_view name) {
  if (name == "system") return CorrelationLevel::kSystem;
  if (name == "summary") return CorrelationLevel::kSummary;
  throw Error(ErrorCode::kInvalidArgument, "unknown level '" + std::string(name) + "'");
}

std::string_view correlation_level_name(CorrelationLevel level) {
  return level == CorrelationLevel::kSystem ? "system" : "summary";
}

namespace {

void require_complete(const EvalDataset& dataset, const ScoreTable& scores,
                      const std::vector<std::string>& metrics) {
  std::vector<std::string> missing;
  for (const auto& e : dataset.entries) {
    for (const auto& m : metrics) {
      if (!scores.has_record({e.system_id, e.doc_id}, m)) {
        missing.push_back("(" + e.system_id + ", " + e.doc_id + ", " + m + ")");
      }
    }
  }
  if (missing.empty()) return;
  std::string list;
  for (size_t i = 0; i < missing.size() && i < 10; ++i) {
    list += (i ? ", " : "") + missing[i];
  }
  if (missing.size() > 10) list += ", ...";
  throw Error(ErrorCode::kIncompleteGrid,
              std::to_string(missing.size()) + " score(s) missing: " + list);
}

// Per-entry value of a row (metric or human dimension); nullopt if absent.
using RowFn = std::function<std::optional<double>(const EvalEntry&)>;

CorrelationCell correlate_cell(const std::vector<const EvalEntry*>& entries,
                               const RowFn& row, const RowFn& column,
                               CorrelationLevel level, CorrelationMethod method) {
  CorrelationCell cell;
  try {
    CellValues xs;
    CellRatings ys;
    PairedSeries series;
    size_t missing = 0;
    for (const EvalEntry* e : entries) {
      const auto x = row(*e);
      const auto y = column(*e);
      if (!x || !y) {
        ++missing;
        continue;
      }
      xs[{e->system_id, e->doc_id}] = *x;
      ys[{e->system_id, e->doc_id}] = {*y};
      series.xs.push_back(*x);
      series.ys.push_back(*y);
    }
    if (missing > 0) {
      throw Error(ErrorCode::kIncompleteGrid,
                  std::to_string(missing) + " entr" + (missing == 1 ? "y" : "ies") +
                      " without a value");
    }
    if (level == CorrelationLevel::kSystem) {
      series = system_level(xs, ys).series();
    }
    cell.n = series.xs.size();
    cell.value = correlate(method, series);
  } catch (const Error& e) {
    cell.error = e.what();
  }
  return cell;
}

std::optional<double> mean_rating(const EvalEntry& e, const std::string& dim) {
  auto it = e.annotations.find(dim);
  if (it == e.annotations.end() || it->second.empty()) return std::nullopt;
  return mean(it->second);
}

}  // namespace

CorrelationTable correlation_table(const EvalDataset& dataset,
                                   const ScoreTable& scores,
                                   CorrelationLevel level,
                                   CorrelationMethod method) {
  CorrelationTable table;
  table.level = level;
  table.method = method;
  table.config_hash = scores.config_hash;
  table.rows = dataset.dimensions;
  table.columns = scores.metrics();
  require_complete(dataset, scores, table.columns);

  std::vector<const EvalEntry*> entries;
  for (const auto& e : dataset.entries) entries.push_back(&e);
  for (const auto& dim : table.rows) {
    for (const auto& metric : table.columns) {
      table.cells[dim][metric] = correlate_cell(
          entries, [&](const EvalEntry& e) { return mean_rating(e, dim); },
          [&](const EvalEntry& e) { return scores.value({e.system_id, e.doc_id}, metric); },
          level, method);
    }
  }
  return table;
}

CorrelationTable bias_table(const EvalDataset& dataset, const ScoreTable& scores,
                            CorrelationMethod method, CorrelationLevel level) {
  CorrelationTable table;
  table.level = level;
  table.method = method;
  table.config_hash = scores.config_hash;
  const auto metrics = scores.metrics();
  require_complete(dataset, scores, metrics);
  table.rows = metrics;
  table.rows.insert(table.rows.end(), dataset.dimensions.begin(), dataset.dimensions.end());
  table.columns = summary_stat_names();

  std::vector<const EvalEntry*> entries;
  std::map<const EvalEntry*, SummaryStats> stats;
  for (const auto& e : dataset.entries) {
    try {
      stats.emplace(&e, summary_stats(dataset.documents.at(e.doc_id),
                                      SummaryText{e.doc_id, e.system_id, e.summary}));
      entries.push_back(&e);
    } catch (const Error& err) {
      if (err.code() != ErrorCode::kEmptySummary) throw;
    }
  }
  const std::set<std::string> metric_rows(metrics.begin(), metrics.end());
  for (const auto& row : table.rows) {
    RowFn row_fn;
    if (metric_rows.count(row)) {
      row_fn = [&scores, row](const EvalEntry& e) {
        return scores.value({e.system_id, e.doc_id}, row);
      };
    } else {
      row_fn = [row](const EvalEntry& e) { return mean_rating(e, row); };
    }
    for (const auto& column : table.columns) {
      table.cells[row][column] = correlate_cell(
          entries, row_fn,
          [&](const EvalEntry& e) -> std::optional<double> {
            return summary_stat_value(stats.at(&e), column);
          },
          level, method);
    }
  }
  return table;
}

ordered_json to_json(const CorrelationTable& table) {
  ordered_json out;
  out["level"] = correlation_level_name(table.level);
  out["method"] = correlation_method_name(table.method);
  out["config_hash"] = table.config_hash;
  out["rows"] = table.rows;
  out["columns"] = table.columns;
  ordered_json cells = ordered_json::object();
  ordered_json errors = ordered_json::object();
  for (const auto& row : table.rows) {
    ordered_json r = ordered_json::object();
    for (const auto& column : table.columns) {
      const CorrelationCell& cell = table.cells.at(row).at(column);
      r[column] = optional_json(cell.value);
      if (!cell.error.empty()) errors[row][column] = cell.error;
    }
    cells[row] = std::move(r);
  }
  out["table"] = std::move(cells);
  out["errors"] = std::move(errors);
  return out;
}

std::string render_text(const CorrelationTable& table) {
  std::ostringstream out;
  out << "# level=" << correlation_level_name(table.level)
      << " method=" << correlation_method_name(table.method)
      << " config_hash=" << table.config_hash << "\n";
  size_t first = 0;
  for (const auto& row : table.rows) first = std::max(first, row.size());
  std::vector<size_t> widths;
  for (const auto& c : table.columns) widths.push_back(std::max<size_t>(c.size(), 8));
  auto pad = [](const std::string& s, size_t w, bool left) {
    const std::string fill(w > s.size() ? w - s.size() : 0, ' ');
    return left ? s + fill : fill + s;
  };
  out << pad("", first, true);
  for (size_t i = 0; i < table.columns.size(); ++i) {
    out << "  " << pad(table.columns[i], widths[i], false);
  }
  out << "\n";
  for (const auto& row : table.rows) {
    out << pad(row, first, true);
    for (size_t i = 0; i < table.columns.size(); ++i) {
      out << "  " << pad(format_value(table.cells.at(row).at(table.columns[i]).value),
                         widths[i], false);
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace shannon
